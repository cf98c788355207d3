//! Design and verification of variable-density k-space undersampling schemes
//! for compressed-sensing MRI.
//!
//! The crate covers the full pipeline: matrix-free unitary operators between
//! the wavelet and k-space domains ([`gridops`]), the optimal sampling
//! density and its diagnostics ([`density`]), the low-frequency center
//! region and sparsification ([`lowfreq`]), mask generation ([`masks`]),
//! equality-constrained l1 reconstruction ([`solver`]), and Monte-Carlo PSNR
//! benchmarking ([`bench`]).

pub mod bench;
pub mod density;
pub mod error;
pub mod formats;
pub mod fourier;
pub mod gridops;
pub mod lowfreq;
pub mod manifest;
pub mod masks;
pub mod phantom;
pub mod solver;
pub mod wavelet;

pub use error::{CsError, Result};
