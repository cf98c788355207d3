//! Equality-constrained l1 minimization over a masked row subset of A0, by
//! Douglas-Rachford splitting.
//!
//! On a duplicate-free mask the rows are orthonormal (AA* = I), so the
//! affine projection w -> w + A*(y - Aw) is closed-form and exact; the
//! splitting alternates it with soft-thresholding. Iterates live in C^n so
//! the projection identity holds exactly; the real part is taken only when
//! producing output coefficients or images.

use ndarray::Array2;
use num_complex::Complex64;
use std::collections::HashMap;

use crate::density::Density;
use crate::error::{CsError, Result};
use crate::fourier;
use crate::gridops::{a0_apply, MeasurementOperator, ImageGrid, WaveletCoeffs};
use crate::lowfreq::{x_omega, FrequencySet};
use crate::masks::{CategoricalSampler, RngStream, SamplingMask};
use crate::wavelet::{self, WaveletSpec};

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub max_iters: usize,
    /// Relative-change stopping threshold on the projected iterate.
    pub tol: f64,
    /// Soft-threshold step gamma > 0.
    pub gamma: f64,
    pub verbose: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iters: 2000,
            tol: 1e-7,
            gamma: 1.0,
            verbose: false,
        }
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct SolveReport {
    pub iterations: usize,
    pub final_rel_change: f64,
    /// ||A w - y||_2 / ||y||_2 for the final (projected) iterate.
    pub constraint_residual: f64,
    /// Subsampled l1-objective trace: (iteration, ||w||_1).
    pub objective_trace: Vec<(usize, f64)>,
    pub converged: bool,
    /// l2 norm of the imaginary part dropped when realizing the output.
    pub imag_discarded: f64,
}

fn soft_threshold(values: &Array2<Complex64>, gamma: f64) -> Array2<Complex64> {
    values.mapv(|v| {
        let m = v.norm();
        if m <= gamma {
            Complex64::default()
        } else {
            v * ((m - gamma) / m)
        }
    })
}

fn l1_norm(values: &Array2<Complex64>) -> f64 {
    values.iter().map(|v| v.norm()).sum()
}

fn diff_norm(a: &Array2<Complex64>, b: &Array2<Complex64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Core Douglas-Rachford loop over complex coefficients.
fn basis_pursuit_complex(
    op: &MeasurementOperator,
    y: &[Complex64],
    opts: &SolverOptions,
) -> Result<(Array2<Complex64>, SolveReport)> {
    if op.has_duplicates() {
        return Err(CsError::DuplicateIndices);
    }
    if y.len() != op.len() {
        return Err(CsError::MeasurementLength {
            got: y.len(),
            expected: op.len(),
        });
    }
    if y.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(CsError::NonFinite("measurements"));
    }
    let side = op.side();
    let y_norm = y.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();

    let project = |z: &Array2<Complex64>| -> Result<Array2<Complex64>> {
        let az = op.apply_complex(z)?;
        let residual: Vec<Complex64> = y.iter().zip(&az).map(|(yi, ai)| yi - ai).collect();
        let correction = op.adjoint_complex(&residual)?;
        Ok(z + &correction)
    };

    let mut z: Array2<Complex64> = Array2::default((side, side));
    let mut w = project(&z)?;
    let mut rel_change = f64::INFINITY;
    let mut trace = vec![(0usize, l1_norm(&w))];
    let mut iterations = 0;
    let mut converged = false;
    for iter in 1..=opts.max_iters {
        iterations = iter;
        let reflected = w.mapv(|v| v * 2.0) - &z;
        let v = soft_threshold(&reflected, opts.gamma);
        z = &z + &v - &w;
        let w_next = project(&z)?;
        rel_change = diff_norm(&w_next, &w) / w_next.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt().max(1e-30);
        w = w_next;
        if iter % 25 == 0 {
            trace.push((iter, l1_norm(&w)));
        }
        if opts.verbose && iter % 100 == 0 {
            eprintln!("iter {iter}: rel_change {rel_change:.3e}");
        }
        if rel_change < opts.tol {
            converged = true;
            break;
        }
    }
    let aw = op.apply_complex(&w)?;
    let residual = aw
        .iter()
        .zip(y)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt()
        / y_norm.max(1e-30);
    let report = SolveReport {
        iterations,
        final_rel_change: rel_change,
        constraint_residual: residual,
        objective_trace: trace,
        converged,
        imag_discarded: 0.0,
    };
    Ok((w, report))
}

/// Solve argmin ||w||_1 subject to A w = y over a duplicate-free mask.
/// Non-convergence (max_iters hit) is returned in the report, not silent.
pub fn basis_pursuit(
    op: &MeasurementOperator,
    y: &[Complex64],
    opts: &SolverOptions,
) -> Result<(WaveletCoeffs, SolveReport)> {
    let (w, mut report) = basis_pursuit_complex(op, y, opts)?;
    let (real, imag) = fourier::real_part_with_residual(&w);
    report.imag_discarded = imag;
    Ok((WaveletCoeffs::new(real, *op.spec())?, report))
}

/// Two-stage reconstruction: recover x_Omega from the fully sampled center,
/// subtract its predicted data, solve basis pursuit on the sparse residual,
/// and synthesize the image.
pub fn reconstruct_two_stage(
    mask: &SamplingMask,
    y: &[Complex64],
    omega: &FrequencySet,
    spec: &WaveletSpec,
    opts: &SolverOptions,
) -> Result<(ImageGrid, SolveReport)> {
    if y.len() != mask.indices().len() {
        return Err(CsError::MeasurementLength {
            got: y.len(),
            expected: mask.indices().len(),
        });
    }
    let position: HashMap<usize, usize> = mask
        .indices()
        .iter()
        .enumerate()
        .map(|(pos, &idx)| (idx, pos))
        .collect();
    let mut center = Vec::with_capacity(omega.len());
    for &idx in omega.indices() {
        match position.get(&idx) {
            Some(&pos) => center.push(y[pos]),
            None => return Err(CsError::MaskMissingOmega(idx)),
        }
    }
    let (xo, _) = x_omega(&center, omega, spec)?;
    let op = MeasurementOperator::new(mask.indices().to_vec(), *spec, mask.side())?;
    let predicted = op.apply(&xo)?;
    let residual_data: Vec<Complex64> = y.iter().zip(&predicted).map(|(a, b)| a - b).collect();
    let (w, mut report) = basis_pursuit_complex(&op, &residual_data, opts)?;
    let combined = w + &xo.values().mapv(|v| Complex64::new(v, 0.0));
    let mut spatial = combined;
    wavelet::idwt2_raw(&mut spatial, spec)?;
    let (real, imag) = fourier::real_part_with_residual(&spatial);
    report.imag_discarded = imag;
    Ok((ImageGrid::new(real)?, report))
}

/// Double-solve comparison backing the duplicate-rejection argument: the
/// deduplicated first-m-draw system and the extended exactly-m-distinct
/// system must agree on the recovered signal.
pub fn dedup_equivalence_check(
    density: &Density,
    draws: usize,
    stream: RngStream,
    planted: &WaveletCoeffs,
    opts: &SolverOptions,
) -> Result<(bool, f64)> {
    let side = density.side();
    let n = side * side;
    let sampler = CategoricalSampler::new(density);
    let mut rng = stream.rng();
    let mut visited = vec![false; n];
    let mut order: Vec<usize> = Vec::new();
    for _ in 0..draws {
        let idx = sampler.draw(&mut rng);
        if !visited[idx] {
            visited[idx] = true;
            order.push(idx);
        }
    }
    let first_mask = order.clone();
    // keep drawing until the distinct count matches the draw count (capped
    // by the support size, which bounds what rejection can ever reach)
    let target = draws.min(density.support_size());
    while order.len() < target {
        let idx = sampler.draw(&mut rng);
        if !visited[idx] {
            visited[idx] = true;
            order.push(idx);
        }
    }
    let spec = *planted.spec();
    let full = a0_apply(planted)?;
    let solve = |indices: Vec<usize>| -> Result<WaveletCoeffs> {
        let op = MeasurementOperator::new(indices, spec, side)?;
        let y = op.gather(&full);
        Ok(basis_pursuit(&op, &y, opts)?.0)
    };
    let a = solve(first_mask)?;
    let b = solve(order)?;
    let diff = a
        .values()
        .iter()
        .zip(b.values().iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    let scale = planted.norm().max(1e-30);
    let rel = diff / scale;
    Ok((rel <= 10.0 * opts.tol.max(1e-7), rel))
}
