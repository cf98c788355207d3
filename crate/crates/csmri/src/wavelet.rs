//! Periodic orthogonal wavelet transforms (Symmlet filter bank and the
//! ideal frequency-partition Shannon wavelet).
//!
//! All transforms are exactly orthogonal on the torus: the analysis step is
//! circular correlation + dyadic downsampling and the synthesis step is its
//! transpose, with quadrature-mirror high-pass `g[t] = (-1)^t h[L-1-t]`.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{CsError, Result};

/// Orthonormal Symmlet low-pass filter with 10 vanishing moments (20 taps),
/// from the standard published table. Verified in tests by `||h||_2 = 1`,
/// `sum h = sqrt(2)`, double-shift orthogonality and the moment conditions.
pub const SYMMLET10_LOWPASS: [f64; 20] = [
    0.000770_159_809_114_490_1,
    0.000095_632_670_722_894_75,
    -0.008_641_299_277_022_422,
    -0.001_465_382_581_305_051_3,
    0.045_927_239_231_092_2,
    0.011_609_893_903_711_381,
    -0.159_494_278_884_917_57,
    -0.070_880_535_783_243_85,
    0.471_690_666_938_439_25,
    0.769_510_037_021_107_1,
    0.383_826_761_067_085_46,
    -0.035_536_740_473_817_55,
    -0.031_990_056_882_427_8,
    0.049_994_972_077_376_69,
    0.005_764_912_033_581_909,
    -0.020_354_939_812_311_29,
    -0.000_804_358_932_016_444,
    0.004_593_173_585_311_828,
    0.000_057_036_083_618_494_284,
    -0.000_459_329_421_004_658_8,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WaveletFamily {
    /// Symmlet (least-asymmetric orthonormal) filter bank; the field is the
    /// number of vanishing moments. Only the 10-moment table is bundled.
    Symmlet(usize),
    /// Ideal frequency-partition wavelet, built per level as a full-length
    /// circular filter from its box transfer function.
    Shannon,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WaveletSpec {
    pub family: WaveletFamily,
    /// Decomposition depth J.
    pub levels: usize,
}

impl WaveletSpec {
    pub fn symmlet(vanishing_moments: usize, levels: usize) -> Result<Self> {
        if vanishing_moments != 10 {
            return Err(CsError::UnsupportedWavelet(format!(
                "symmlet({vanishing_moments}); only the 10-vanishing-moment filter table is bundled"
            )));
        }
        Ok(WaveletSpec {
            family: WaveletFamily::Symmlet(vanishing_moments),
            levels,
        })
    }

    pub fn shannon(levels: usize) -> Self {
        WaveletSpec {
            family: WaveletFamily::Shannon,
            levels,
        }
    }

    /// 1 <= J <= log2(N) - 2, and N must be a power of two >= 8.
    pub fn validate_for(&self, side: usize) -> Result<()> {
        check_side(side)?;
        let max_levels = side.trailing_zeros() as usize - 2;
        if self.levels < 1 || self.levels > max_levels {
            return Err(CsError::BadDepth {
                levels: self.levels,
                side,
            });
        }
        Ok(())
    }

    /// Low-pass analysis filter for a signal of length `len` at the current
    /// level. Symmlet filters are length-independent; the Shannon filter is
    /// regenerated per length.
    fn lowpass(&self, len: usize) -> Vec<f64> {
        match self.family {
            WaveletFamily::Symmlet(_) => SYMMLET10_LOWPASS.to_vec(),
            WaveletFamily::Shannon => shannon_lowpass(len),
        }
    }
}

pub fn check_side(side: usize) -> Result<()> {
    if side < 8 || !side.is_power_of_two() {
        return Err(CsError::BadSide(side));
    }
    Ok(())
}

/// Circular Shannon low-pass of length `len`: inverse DFT of the box transfer
/// function that is sqrt(2) on the open centered band |k| < len/4 and 1 on the
/// two edge frequencies |k| = len/4 (the split keeps |H(k)|^2 + |H(k+M/2)|^2 = 2,
/// hence exact orthogonality, while the filter stays real and symmetric).
fn shannon_lowpass(len: usize) -> Vec<f64> {
    assert!(len >= 4 && len % 4 == 0, "shannon filter length must be a multiple of 4");
    let m = len as f64;
    let quarter = len / 4;
    let mut h = vec![0.0; len];
    for (t, ht) in h.iter_mut().enumerate() {
        let mut acc = std::f64::consts::SQRT_2; // k = 0
        for k in 1..quarter {
            acc += 2.0 * std::f64::consts::SQRT_2
                * (2.0 * std::f64::consts::PI * k as f64 * t as f64 / m).cos();
        }
        acc += 2.0 * (2.0 * std::f64::consts::PI * quarter as f64 * t as f64 / m).cos();
        *ht = acc / m;
    }
    h
}

/// Quadrature-mirror high-pass of `h`.
fn highpass_of(h: &[f64]) -> Vec<f64> {
    let l = h.len();
    (0..l)
        .map(|t| if t % 2 == 0 { h[l - 1 - t] } else { -h[l - 1 - t] })
        .collect()
}

/// Wrap a filter to length `m` by circular folding (needed when the filter is
/// longer than the signal at deep levels).
fn wrap_filter(h: &[f64], m: usize) -> Vec<f64> {
    if h.len() <= m {
        return h.to_vec();
    }
    let mut out = vec![0.0; m];
    for (t, &v) in h.iter().enumerate() {
        out[t % m] += v;
    }
    out
}

/// Scalar the filter bank can act on: f64 for the public transform, complex
/// for the solver's internal iterates.
pub trait WaveletScalar:
    Copy
    + Default
    + std::ops::Add<Output = Self>
    + std::ops::AddAssign
    + std::ops::Mul<f64, Output = Self>
{
}

impl WaveletScalar for f64 {}
impl WaveletScalar for num_complex::Complex64 {}

/// One periodic analysis step on `x[..m]`: first half becomes approximation,
/// second half detail.
fn analyze_1d<T: WaveletScalar>(x: &mut [T], scratch: &mut [T], h: &[f64], g: &[f64]) {
    let m = x.len();
    let half = m / 2;
    for i in 0..half {
        let mut a = T::default();
        let mut d = T::default();
        for t in 0..h.len() {
            let v = x[(2 * i + t) % m];
            a += v * h[t];
            d += v * g[t];
        }
        scratch[i] = a;
        scratch[half + i] = d;
    }
    x.copy_from_slice(&scratch[..m]);
}

/// Transpose of `analyze_1d`.
fn synthesize_1d<T: WaveletScalar>(x: &mut [T], scratch: &mut [T], h: &[f64], g: &[f64]) {
    let m = x.len();
    let half = m / 2;
    scratch[..m].fill(T::default());
    for i in 0..half {
        let a = x[i];
        let d = x[half + i];
        for t in 0..h.len() {
            scratch[(2 * i + t) % m] += a * h[t] + d * g[t];
        }
    }
    x.copy_from_slice(&scratch[..m]);
}

/// Forward 2D periodic orthogonal DWT into the standard pyramidal layout.
pub fn dwt2_raw<T: WaveletScalar>(values: &mut Array2<T>, spec: &WaveletSpec) -> Result<()> {
    let side = values.nrows();
    spec.validate_for(side)?;
    let mut scratch = vec![T::default(); side];
    let mut row = vec![T::default(); side];
    for level in 0..spec.levels {
        let m = side >> level;
        let h = wrap_filter(&spec.lowpass(m), m);
        let g = highpass_of(&h);
        for r in 0..m {
            for c in 0..m {
                row[c] = values[(r, c)];
            }
            analyze_1d(&mut row[..m], &mut scratch, &h, &g);
            for c in 0..m {
                values[(r, c)] = row[c];
            }
        }
        for c in 0..m {
            for r in 0..m {
                row[r] = values[(r, c)];
            }
            analyze_1d(&mut row[..m], &mut scratch, &h, &g);
            for r in 0..m {
                values[(r, c)] = row[r];
            }
        }
    }
    Ok(())
}

/// Inverse of [`dwt2_raw`] (also its adjoint: the transform is orthogonal).
pub fn idwt2_raw<T: WaveletScalar>(values: &mut Array2<T>, spec: &WaveletSpec) -> Result<()> {
    let side = values.nrows();
    spec.validate_for(side)?;
    let mut scratch = vec![T::default(); side];
    let mut row = vec![T::default(); side];
    for level in (0..spec.levels).rev() {
        let m = side >> level;
        let h = wrap_filter(&spec.lowpass(m), m);
        let g = highpass_of(&h);
        for c in 0..m {
            for r in 0..m {
                row[r] = values[(r, c)];
            }
            synthesize_1d(&mut row[..m], &mut scratch, &h, &g);
            for r in 0..m {
                values[(r, c)] = row[r];
            }
        }
        for r in 0..m {
            for c in 0..m {
                row[c] = values[(r, c)];
            }
            synthesize_1d(&mut row[..m], &mut scratch, &h, &g);
            for c in 0..m {
                values[(r, c)] = row[c];
            }
        }
    }
    Ok(())
}

/// Subband identifier within the pyramidal layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subband {
    /// Approximation block at depth J.
    Approx,
    /// Detail block at the given level (1 = finest), orientation 0 = LH
    /// (rows low, cols high), 1 = HL, 2 = HH.
    Detail { level: usize, orientation: usize },
}

/// Top-left corner and side length of a subband block.
pub fn subband_block(side: usize, levels: usize, band: Subband) -> (usize, usize, usize) {
    match band {
        Subband::Approx => (0, 0, side >> levels),
        Subband::Detail { level, orientation } => {
            let m = side >> level;
            match orientation {
                0 => (0, m, m),
                1 => (m, 0, m),
                _ => (m, m, m),
            }
        }
    }
}

/// All 3J + 1 subbands of a depth-J decomposition, coarsest first.
pub fn all_subbands(levels: usize) -> Vec<Subband> {
    let mut bands = vec![Subband::Approx];
    for level in (1..=levels).rev() {
        for orientation in 0..3 {
            bands.push(Subband::Detail { level, orientation });
        }
    }
    bands
}

/// Subbands counted as "low frequency": the approximation block plus the
/// `low_levels` coarsest detail levels.
pub fn low_subbands(levels: usize, low_levels: usize) -> Result<Vec<Subband>> {
    if low_levels > levels {
        return Err(CsError::LowLevelsTooDeep { low_levels, levels });
    }
    let mut bands = vec![Subband::Approx];
    for step in 0..low_levels {
        let level = levels - step;
        for orientation in 0..3 {
            bands.push(Subband::Detail { level, orientation });
        }
    }
    Ok(bands)
}
