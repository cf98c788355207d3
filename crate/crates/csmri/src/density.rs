//! Per-frequency row infinity norms of A0, the optimal sampling density pi,
//! K(P), the restricted density pi*, polynomial densities, and the
//! measurement-count bound diagnostic.

use ndarray::Array2;

use crate::error::{CsError, Result};
use crate::gridops::{self, WaveletCoeffs};
use crate::lowfreq::FrequencySet;
use crate::wavelet::{self, Subband, WaveletSpec};

/// Entry i holds the infinity norm of row i of A0 (rows are indexed by
/// frequency position on the centered grid).
#[derive(Debug, Clone)]
pub struct InfNormMap {
    side: usize,
    values: Array2<f64>,
    spec: WaveletSpec,
}

impl InfNormMap {
    pub fn side(&self) -> usize {
        self.side
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn spec(&self) -> &WaveletSpec {
        &self.spec
    }
}

/// Nonnegative probability mass over frequency positions, summing to 1.
/// `normalizer` carries L (or L*) when the density derives from an
/// [`InfNormMap`].
#[derive(Debug, Clone)]
pub struct Density {
    side: usize,
    mass: Array2<f64>,
    normalizer: Option<f64>,
}

impl Density {
    /// Normalize nonnegative weights into a density.
    pub fn from_weights(weights: Array2<f64>) -> Result<Self> {
        let side = weights.nrows();
        if weights.ncols() != side {
            return Err(CsError::SideMismatch(side, weights.ncols()));
        }
        if weights.iter().any(|&w| !w.is_finite() || w < 0.0) {
            return Err(CsError::NonFinite("density weights"));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(CsError::NonFinite("density normalization (zero total mass)"));
        }
        let mass = weights.mapv(|w| w / total);
        Ok(Density {
            side,
            mass,
            normalizer: None,
        })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn mass(&self) -> &Array2<f64> {
        &self.mass
    }

    /// L (or L*) when derived from an infinity-norm map.
    pub fn normalizer(&self) -> Option<f64> {
        self.normalizer
    }

    pub fn mass_at(&self, index: usize) -> f64 {
        let (r, c) = gridops::split_index(self.side, index);
        self.mass[(r, c)]
    }

    pub fn support_size(&self) -> usize {
        self.mass.iter().filter(|&&m| m > 0.0).count()
    }
}

/// Modulus of the Fourier transform of one representative atom per subband.
/// Within a subband all atoms are circular translates, so their Fourier
/// moduli coincide; the representative sits at the block corner.
pub fn subband_modulus_map(spec: &WaveletSpec, side: usize, band: Subband) -> Result<Array2<f64>> {
    let (r0, c0, _) = wavelet::subband_block(side, spec.levels, band);
    let mut coeffs = WaveletCoeffs::zeros(side, *spec)?;
    coeffs.values_mut()[(r0, c0)] = 1.0;
    let kspace = gridops::a0_apply(&coeffs)?;
    Ok(kspace.values().mapv(|v| v.norm()))
}

/// Row infinity norms of A0: per subband, transform one representative atom,
/// take the pointwise modulus, then the pointwise max across the 3J + 1
/// subbands.
pub fn infnorm_map(spec: &WaveletSpec, side: usize) -> Result<InfNormMap> {
    spec.validate_for(side)?;
    let mut values: Array2<f64> = Array2::zeros((side, side));
    for band in wavelet::all_subbands(spec.levels) {
        let modulus = subband_modulus_map(spec, side, band)?;
        for (v, m) in values.iter_mut().zip(modulus.iter()) {
            if *m > *v {
                *v = *m;
            }
        }
    }
    Ok(InfNormMap {
        side,
        values,
        spec: *spec,
    })
}

/// pi_i = ||a_i||_inf^2 / L with L = sum of squared infinity norms.
pub fn optimal_density(map: &InfNormMap) -> Density {
    let squared = map.values.mapv(|v| v * v);
    let l: f64 = squared.iter().sum();
    Density {
        side: map.side,
        mass: squared.mapv(|v| v / l),
        normalizer: Some(l),
    }
}

/// K(P) = sup_i ||a_i||_inf / sqrt(P_i). Zero mass at a frequency with a
/// positive row norm makes K infinite; that index is reported as an error.
pub fn k_of_density(map: &InfNormMap, density: &Density) -> Result<f64> {
    if map.side != density.side {
        return Err(CsError::SideMismatch(map.side, density.side));
    }
    let mut sup = 0.0f64;
    for (idx, (&m, &p)) in map.values.iter().zip(density.mass.iter()).enumerate() {
        if m > 0.0 && p <= 0.0 {
            return Err(CsError::ZeroMassAtActiveFrequency { index: idx });
        }
        if m > 0.0 {
            sup = sup.max(m / p.sqrt());
        }
    }
    Ok(sup)
}

/// pi*: zero on omega, proportional to the squared row norms elsewhere,
/// normalized by L* = sum off omega.
pub fn restricted_density(map: &InfNormMap, omega: &FrequencySet) -> Result<Density> {
    if map.side != omega.side() {
        return Err(CsError::SideMismatch(map.side, omega.side()));
    }
    let n = map.side * map.side;
    if omega.len() >= n {
        return Err(CsError::OmegaCoversGrid);
    }
    let mut squared = map.values.mapv(|v| v * v);
    for &idx in omega.indices() {
        let (r, c) = gridops::split_index(map.side, idx);
        squared[(r, c)] = 0.0;
    }
    let l_star: f64 = squared.iter().sum();
    if l_star <= 0.0 {
        return Err(CsError::OmegaCoversGrid);
    }
    Ok(Density {
        side: map.side,
        mass: squared.mapv(|v| v / l_star),
        normalizer: Some(l_star),
    })
}

/// Polynomial variable-density profile on the centered grid:
/// (1 - (sqrt(2)/N) * sqrt(kx^2 + ky^2))^p, clamped at 0, normalized.
pub fn polynomial_density(side: usize, p: u32) -> Result<Density> {
    wavelet::check_side(side)?;
    let half = side as isize / 2;
    let weights = Array2::from_shape_fn((side, side), |(r, c)| {
        let ky = (r as isize - half) as f64;
        let kx = (c as isize - half) as f64;
        let radial = 1.0 - (2.0f64.sqrt() / side as f64) * (kx * kx + ky * ky).sqrt();
        radial.max(0.0).powi(p as i32)
    });
    Density::from_weights(weights)
}

/// Inputs of the measurement-count bound.
#[derive(Debug, Clone, Copy)]
pub struct BoundQuery {
    /// Sparsity level s.
    pub sparsity: usize,
    /// Ambient dimension n.
    pub ambient: usize,
    /// K(P)^2 (for pi this is L).
    pub k_squared: f64,
    /// Universal constants, user-supplied.
    pub c: f64,
    pub d: f64,
    /// Failure probability epsilon in (0, 1).
    pub epsilon: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct BoundReport {
    /// Smallest m satisfying both inequalities.
    pub required_m: usize,
    /// ln^4(n), the scaling constant the diagnostic reports.
    pub log4_n: f64,
}

fn bound_satisfied(m: usize, rhs_log: f64, rhs_plain: f64) -> bool {
    let mf = m as f64;
    let log_ok = if m == 1 {
        rhs_log <= 0.0
    } else {
        mf / mf.ln() >= rhs_log
    };
    log_ok && mf >= rhs_plain
}

/// Smallest integer m <= n satisfying m/ln(m) >= C K^2 s ln^2(s) ln(n) and
/// m >= D K^2 s ln(1/eps). Diagnostic only; the bound is typically vacuous
/// at practical n.
pub fn bound_required_m(query: &BoundQuery) -> Result<BoundReport> {
    let s = query.sparsity as f64;
    let n = query.ambient as f64;
    if query.sparsity == 0 || query.ambient == 0 {
        return Err(CsError::Config("sparsity and ambient dimension must be positive".into()));
    }
    if !(query.epsilon > 0.0 && query.epsilon < 1.0) {
        return Err(CsError::Config("epsilon must lie in (0, 1)".into()));
    }
    let rhs_log = query.c * query.k_squared * s * s.ln().powi(2) * n.ln();
    let rhs_plain = query.d * query.k_squared * s * (1.0 / query.epsilon).ln();
    let log4_n = n.ln().powi(4);
    // m / ln(m) is monotone increasing for m >= 3; scan the few small values
    // and binary search the rest.
    for m in 1..=3usize.min(query.ambient) {
        if bound_satisfied(m, rhs_log, rhs_plain) {
            return Ok(BoundReport { required_m: m, log4_n });
        }
    }
    if !bound_satisfied(query.ambient, rhs_log, rhs_plain) {
        return Err(CsError::BoundVacuous);
    }
    let (mut lo, mut hi) = (3usize, query.ambient);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if bound_satisfied(mid, rhs_log, rhs_plain) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(BoundReport { required_m: hi, log4_n })
}
