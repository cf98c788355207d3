//! The k-space center region Omega spanned by the low-frequency wavelet
//! atoms, recovery of their coefficients from fully sampled center data, and
//! the sparsified residual target.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::density::subband_modulus_map;
use crate::error::{CsError, Result};
use crate::gridops::{self, KSpaceGrid, WaveletCoeffs};
use crate::wavelet::{self, WaveletFamily, WaveletSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Provenance {
    /// Exact union of atom Fourier supports (Shannon wavelets); records the
    /// number of low-frequency atoms n1.
    ExactShannon { atoms: usize },
    /// Relative modulus threshold on subband representatives (Symmlet atoms
    /// have full Fourier support).
    ThresholdedSymmlet { tau: f64, atoms: usize },
    /// Plain centered square of the given width.
    CentralSquare { width: usize },
}

/// Sorted set of distinct linear frequency indices.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencySet {
    side: usize,
    indices: Vec<usize>,
    provenance: Provenance,
}

impl FrequencySet {
    pub fn new(side: usize, mut indices: Vec<usize>, provenance: Provenance) -> Result<Self> {
        wavelet::check_side(side)?;
        indices.sort_unstable();
        indices.dedup();
        if let Some(&bad) = indices.iter().find(|&&i| i >= side * side) {
            return Err(CsError::IndexOutOfRange { index: bad, side });
        }
        Ok(FrequencySet {
            side,
            indices,
            provenance,
        })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indices.binary_search(&index).is_ok()
    }

    /// Centered square of the given width (fully sampled center heuristic).
    pub fn central_square(side: usize, width: usize) -> Result<Self> {
        wavelet::check_side(side)?;
        if width > side {
            return Err(CsError::Config(format!(
                "central square width {width} exceeds side {side}"
            )));
        }
        let start = side / 2 - width / 2;
        let mut indices = Vec::with_capacity(width * width);
        for r in start..start + width {
            for c in start..start + width {
                indices.push(gridops::linear_index(side, r, c));
            }
        }
        FrequencySet::new(side, indices, Provenance::CentralSquare { width })
    }
}

/// Number of coefficients in the approximation block plus `low_levels`
/// coarsest detail levels.
fn low_atom_count(side: usize, levels: usize, low_levels: usize) -> usize {
    let approx = (side >> levels) * (side >> levels);
    let mut count = approx;
    for step in 0..low_levels {
        let m = side >> (levels - step - 1);
        count += 3 * (m / 2) * (m / 2);
    }
    count
}

/// Omega: frequencies covered by the low-frequency wavelet atoms.
///
/// Shannon atoms have exact box supports, so Omega is their exact union
/// (modulus above machine noise). Symmlet atoms cover the whole grid, so
/// Omega keeps the frequencies where the max modulus across low subband
/// representatives exceeds `tau` times its peak; `tau = 0` would degenerate
/// to the full grid and is rejected.
pub fn omega_region(
    spec: &WaveletSpec,
    side: usize,
    low_levels: usize,
    tau: f64,
) -> Result<FrequencySet> {
    spec.validate_for(side)?;
    if !(0.0..1.0).contains(&tau) {
        return Err(CsError::Config(format!("tau must lie in [0, 1), got {tau}")));
    }
    let bands = wavelet::low_subbands(spec.levels, low_levels)?;
    let mut max_map = ndarray::Array2::<f64>::zeros((side, side));
    for band in &bands {
        let modulus = subband_modulus_map(spec, side, *band)?;
        for (v, m) in max_map.iter_mut().zip(modulus.iter()) {
            if *m > *v {
                *v = *m;
            }
        }
    }
    let atoms = low_atom_count(side, spec.levels, low_levels);
    let (threshold, provenance) = match spec.family {
        WaveletFamily::Shannon => (1e-12, Provenance::ExactShannon { atoms }),
        WaveletFamily::Symmlet(_) => {
            if tau == 0.0 {
                return Err(CsError::DegenerateTau);
            }
            let peak = max_map.iter().cloned().fold(0.0f64, f64::max);
            (tau * peak, Provenance::ThresholdedSymmlet { tau, atoms })
        }
    };
    let indices: Vec<usize> = max_map
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > threshold)
        .map(|(i, _)| i)
        .collect();
    FrequencySet::new(side, indices, provenance)
}

/// x_Omega: embed the center samples (zeros off Omega) and apply the adjoint
/// transform. `center_values` is aligned with `omega.indices()` order.
/// Returns the coefficients and the discarded imaginary norm.
pub fn x_omega(
    center_values: &[Complex64],
    omega: &FrequencySet,
    spec: &WaveletSpec,
) -> Result<(WaveletCoeffs, f64)> {
    if center_values.len() != omega.len() {
        return Err(CsError::MeasurementLength {
            got: center_values.len(),
            expected: omega.len(),
        });
    }
    let mut kspace = KSpaceGrid::zeros(omega.side())?;
    for (&idx, &v) in omega.indices().iter().zip(center_values) {
        let (r, c) = gridops::split_index(omega.side(), idx);
        kspace.values_mut()[(r, c)] = v;
    }
    gridops::a0_adjoint(&kspace, spec)
}

#[derive(Debug, Clone, Copy)]
pub struct SparsityReport {
    /// Entries above 1e-6 * ||x||_inf before subtraction.
    pub before: usize,
    /// Entries above the same threshold after subtraction.
    pub after: usize,
}

/// x - x_Omega, with an effective-sparsity diagnostic.
pub fn sparsify(
    x: &WaveletCoeffs,
    x_omega: &WaveletCoeffs,
) -> Result<(WaveletCoeffs, SparsityReport)> {
    if x.spec() != x_omega.spec() || x.side() != x_omega.side() {
        return Err(CsError::SpecMismatch);
    }
    let peak = x.values().iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    let threshold = 1e-6 * peak;
    let diff = x.values() - x_omega.values();
    let before = x.values().iter().filter(|v| v.abs() > threshold).count();
    let after = diff.iter().filter(|v| v.abs() > threshold).count();
    Ok((
        WaveletCoeffs::new(diff, *x.spec())?,
        SparsityReport { before, after },
    ))
}
