//! Sampling mask generation: i.i.d. categorical draws, duplicate-free draws
//! by rejection, the two-stage (omega + high-frequency) scheme, radial
//! spokes, and spirals, all calibrated to a target measurement budget.

use ndarray::Array2;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::density::Density;
use crate::error::{CsError, Result};
use crate::gridops::{linear_index, split_index};
use crate::lowfreq::FrequencySet;
use crate::wavelet::check_side;

/// Seedable, platform-stable generator identity. Identical (seed, stream)
/// pairs yield identical draw sequences on every platform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        RngStream { seed, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AngleMode {
    Uniform,
    Random,
}

/// Tagged description of how a mask was generated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SchemeDescriptor {
    Iid { density: String },
    Distinct { density: String },
    TwoStage { omega_size: usize, density: String },
    Radial { spokes: usize, angle_mode: AngleMode },
    Spiral { center_fraction: f64, spacing: f64 },
}

/// Set of distinct frequency indices in draw order, with optional draw
/// multiplicities and generation metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingMask {
    side: usize,
    /// Distinct indices, in order of first visit.
    indices: Vec<usize>,
    /// Draw counts aligned with `indices`, when draws can repeat.
    multiplicities: Option<Vec<u32>>,
    scheme: SchemeDescriptor,
    seed: u64,
    budget_fraction: f64,
    draws_total: usize,
    /// Leading count of indices that belong to the omega stage.
    omega_prefix: usize,
}

impl SamplingMask {
    /// Rehydrates a mask from stored parts (e.g. a file plus its sidecar).
    pub fn from_parts(
        side: usize,
        indices: Vec<usize>,
        scheme: SchemeDescriptor,
        seed: u64,
        budget_fraction: f64,
        draws_total: usize,
        omega_prefix: usize,
    ) -> Result<Self> {
        check_side(side)?;
        if indices.is_empty() {
            return Err(CsError::EmptyMask);
        }
        let mut seen = vec![false; side * side];
        for &i in &indices {
            if i >= side * side {
                return Err(CsError::IndexOutOfRange { index: i, side });
            }
            if seen[i] {
                return Err(CsError::DuplicateIndices);
            }
            seen[i] = true;
        }
        if omega_prefix > indices.len() {
            return Err(CsError::Config(format!(
                "omega prefix {omega_prefix} exceeds index count {}",
                indices.len()
            )));
        }
        Ok(SamplingMask {
            side,
            indices,
            multiplicities: None,
            scheme,
            seed,
            budget_fraction,
            draws_total,
            omega_prefix,
        })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn multiplicities(&self) -> Option<&[u32]> {
        self.multiplicities.as_deref()
    }

    pub fn scheme(&self) -> &SchemeDescriptor {
        &self.scheme
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn budget_fraction(&self) -> f64 {
        self.budget_fraction
    }

    pub fn draws_total(&self) -> usize {
        self.draws_total
    }

    pub fn distinct_count(&self) -> usize {
        self.indices.len()
    }

    pub fn distinct_fraction(&self) -> f64 {
        self.indices.len() as f64 / (self.side * self.side) as f64
    }

    pub fn omega_prefix(&self) -> usize {
        self.omega_prefix
    }

    pub fn contains_all(&self, set: &FrequencySet) -> bool {
        let mut member = vec![false; self.side * self.side];
        for &i in &self.indices {
            member[i] = true;
        }
        set.indices().iter().all(|&i| member[i])
    }
}

/// Inverse-CDF categorical sampler over the flattened grid (prefix sums,
/// O(log n) per draw).
pub struct CategoricalSampler {
    cumulative: Vec<f64>,
}

impl CategoricalSampler {
    pub fn new(density: &Density) -> Self {
        let mut cumulative = Vec::with_capacity(density.side() * density.side());
        let mut acc = 0.0;
        for &m in density.mass().iter() {
            acc += m;
            cumulative.push(acc);
        }
        CategoricalSampler { cumulative }
    }

    pub fn draw(&self, rng: &mut impl Rng) -> usize {
        let total = *self.cumulative.last().unwrap();
        let u = rng.gen::<f64>() * total;
        self.cumulative
            .partition_point(|&c| c <= u)
            .min(self.cumulative.len() - 1)
    }
}

/// m independent draws from the density, with multiplicities recorded.
pub fn draw_iid(density: &Density, draws: usize, stream: RngStream) -> Result<SamplingMask> {
    if draws == 0 {
        return Err(CsError::Config("draw count must be >= 1".into()));
    }
    let side = density.side();
    let n = side * side;
    let sampler = CategoricalSampler::new(density);
    let mut rng = stream.rng();
    let mut order = Vec::new();
    let mut count = vec![0u32; n];
    for _ in 0..draws {
        let idx = sampler.draw(&mut rng);
        if count[idx] == 0 {
            order.push(idx);
        }
        count[idx] += 1;
    }
    let multiplicities: Vec<u32> = order.iter().map(|&i| count[i]).collect();
    let budget_fraction = order.len() as f64 / n as f64;
    Ok(SamplingMask {
        side,
        indices: order,
        multiplicities: Some(multiplicities),
        scheme: SchemeDescriptor::Iid {
            density: "caller-supplied".into(),
        },
        seed: stream.seed,
        budget_fraction,
        draws_total: draws,
        omega_prefix: 0,
    })
}

/// Keep drawing, discarding repeats, until exactly `target_distinct` distinct
/// indices are collected. Total draws (m + m2) are recorded.
pub fn draw_distinct(
    density: &Density,
    target_distinct: usize,
    stream: RngStream,
) -> Result<SamplingMask> {
    let support = density.support_size();
    if support < target_distinct {
        return Err(CsError::SupportTooSmall {
            support,
            requested: target_distinct,
        });
    }
    let side = density.side();
    let n = side * side;
    let sampler = CategoricalSampler::new(density);
    let mut rng = stream.rng();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(target_distinct);
    let mut draws_total = 0usize;
    while order.len() < target_distinct {
        let idx = sampler.draw(&mut rng);
        draws_total += 1;
        if !visited[idx] {
            visited[idx] = true;
            order.push(idx);
        }
    }
    Ok(SamplingMask {
        side,
        indices: order,
        multiplicities: None,
        scheme: SchemeDescriptor::Distinct {
            density: "caller-supplied".into(),
        },
        seed: stream.seed,
        budget_fraction: target_distinct as f64 / n as f64,
        draws_total,
        omega_prefix: 0,
    })
}

/// Zero the density on omega and renormalize (pi* when the input is pi).
pub fn restrict_off_omega(density: &Density, omega: &FrequencySet) -> Result<Density> {
    let side = density.side();
    if side != omega.side() {
        return Err(CsError::SideMismatch(side, omega.side()));
    }
    let mut weights = density.mass().clone();
    for &idx in omega.indices() {
        let (r, c) = split_index(side, idx);
        weights[(r, c)] = 0.0;
    }
    Density::from_weights(weights).map_err(|_| CsError::OmegaCoversGrid)
}

/// Omega fully sampled, plus duplicate-free draws from the off-omega
/// restriction of the density until the total distinct budget is met.
pub fn two_stage_mask(
    omega: &FrequencySet,
    density_high: &Density,
    budget_fraction: f64,
    stream: RngStream,
) -> Result<SamplingMask> {
    let side = omega.side();
    let n = side * side;
    let target = (budget_fraction * n as f64).round() as usize;
    if omega.len() > target {
        return Err(CsError::OmegaExceedsBudget {
            omega: omega.len(),
            budget: target,
        });
    }
    let restricted = restrict_off_omega(density_high, omega)?;
    let remaining = target - omega.len();
    let mut indices: Vec<usize> = omega.indices().to_vec();
    let draws_total;
    if remaining > 0 {
        let high = draw_distinct(&restricted, remaining, stream)?;
        draws_total = high.draws_total;
        indices.extend_from_slice(high.indices());
    } else {
        draws_total = 0;
    }
    Ok(SamplingMask {
        side,
        indices,
        multiplicities: None,
        scheme: SchemeDescriptor::TwoStage {
            omega_size: omega.len(),
            density: "caller-supplied".into(),
        },
        seed: stream.seed,
        budget_fraction,
        draws_total,
        omega_prefix: omega.len(),
    })
}

/// Integer pixels of a diameter through DC at angle `theta`, by Bresenham.
fn spoke_pixels(side: usize, theta: f64) -> Vec<(i64, i64)> {
    let center = (side / 2) as f64;
    let (dy, dx) = theta.sin_cos();
    let limit = |pos: f64, dir: f64| -> f64 {
        if dir.abs() < 1e-12 {
            f64::INFINITY
        } else if dir > 0.0 {
            ((side - 1) as f64 - pos) / dir
        } else {
            -pos / dir
        }
    };
    let t_pos = limit(center, dx).min(limit(center, dy));
    let t_neg = limit(center, -dx).min(limit(center, -dy));
    let start = (
        (center - t_neg * dy).round() as i64,
        (center - t_neg * dx).round() as i64,
    );
    let end = (
        (center + t_pos * dy).round() as i64,
        (center + t_pos * dx).round() as i64,
    );
    bresenham(start, end)
}

fn bresenham(start: (i64, i64), end: (i64, i64)) -> Vec<(i64, i64)> {
    let (mut r, mut c) = start;
    let dr = (end.0 - r).abs();
    let dc = (end.1 - c).abs();
    let sr = if end.0 > r { 1 } else { -1 };
    let sc = if end.1 > c { 1 } else { -1 };
    let mut err = dc - dr;
    let mut pixels = Vec::new();
    loop {
        pixels.push((r, c));
        if (r, c) == end {
            break;
        }
        let e2 = 2 * err;
        if e2 > -dr {
            err -= dr;
            c += sc;
        }
        if e2 < dc {
            err += dc;
            r += sr;
        }
    }
    pixels
}

fn mark_pixels(side: usize, pixels: &[(i64, i64)], visited: &mut [bool], count: &mut usize) {
    for &(r, c) in pixels {
        if r >= 0 && c >= 0 && (r as usize) < side && (c as usize) < side {
            let idx = linear_index(side, r as usize, c as usize);
            if !visited[idx] {
                visited[idx] = true;
                *count += 1;
            }
        }
    }
}

fn radial_coverage(side: usize, angles: &[f64]) -> (Vec<usize>, usize) {
    let n = side * side;
    let mut visited = vec![false; n];
    let mut count = 0;
    for &theta in angles {
        mark_pixels(side, &spoke_pixels(side, theta), &mut visited, &mut count);
    }
    let indices = visited
        .iter()
        .enumerate()
        .filter(|(_, &v)| v)
        .map(|(i, _)| i)
        .collect();
    (indices, count)
}

/// Discretized diameters through DC; the spoke count is calibrated so the
/// distinct-pixel fraction hits the budget as closely as the geometry
/// allows.
pub fn radial_mask(
    side: usize,
    budget_fraction: f64,
    angle_mode: AngleMode,
    stream: RngStream,
) -> Result<SamplingMask> {
    check_side(side)?;
    if !(0.0..=1.0).contains(&budget_fraction) {
        return Err(CsError::Config(format!(
            "budget fraction {budget_fraction} out of [0, 1]"
        )));
    }
    let n = side * side;
    let target = (budget_fraction * n as f64).round() as usize;
    let cap = 8 * side;
    // Random mode draws a fixed pool of angles up front so that coverage is
    // monotone in the spoke count and the calibration stays deterministic.
    let pool: Vec<f64> = match angle_mode {
        AngleMode::Uniform => Vec::new(),
        AngleMode::Random => {
            let mut rng = stream.rng();
            (0..cap)
                .map(|_| rng.gen::<f64>() * std::f64::consts::PI)
                .collect()
        }
    };
    let angles_for = |spokes: usize| -> Vec<f64> {
        match angle_mode {
            AngleMode::Uniform => (0..spokes)
                .map(|k| k as f64 * std::f64::consts::PI / spokes as f64)
                .collect(),
            AngleMode::Random => pool[..spokes].to_vec(),
        }
    };
    let mut best: Option<(usize, usize, Vec<usize>)> = None; // (|count-target|, spokes, indices)
    for spokes in 1..=cap {
        let (indices, count) = radial_coverage(side, &angles_for(spokes));
        let gap = count.abs_diff(target);
        if best.as_ref().map_or(true, |(g, _, _)| gap < *g) {
            best = Some((gap, spokes, indices));
        }
        if count >= target {
            break;
        }
        if spokes == cap && count < target {
            return Err(CsError::UnreachableBudget {
                requested: budget_fraction,
                achievable: count as f64 / n as f64,
            });
        }
    }
    let (_, spokes, indices) = best.unwrap();
    Ok(SamplingMask {
        side,
        indices,
        multiplicities: None,
        scheme: SchemeDescriptor::Radial { spokes, angle_mode },
        seed: stream.seed,
        budget_fraction,
        draws_total: spokes,
        omega_prefix: 0,
    })
}

fn spiral_coverage(side: usize, r0: f64, spacing: f64) -> Vec<usize> {
    let n = side * side;
    let center = (side / 2) as f64;
    let mut visited = vec![false; n];
    let mut count = 0;
    // fully sampled central disc
    for r in 0..side {
        for c in 0..side {
            let dy = r as f64 - center;
            let dx = c as f64 - center;
            if (dx * dx + dy * dy).sqrt() <= r0 {
                let idx = linear_index(side, r, c);
                if !visited[idx] {
                    visited[idx] = true;
                    count += 1;
                }
            }
        }
    }
    // Archimedean arm r = spacing * theta, rasterized outward from the disc
    // (infinite spacing means no arm at all)
    if spacing.is_finite() {
        let r_max = side as f64 * 0.71; // reach the grid corners
        let mut theta = r0 / spacing;
        loop {
            let r = spacing * theta;
            if r > r_max {
                break;
            }
            let row = (center + r * theta.sin()).round() as i64;
            let col = (center + r * theta.cos()).round() as i64;
            mark_pixels(side, &[(row, col)], &mut visited, &mut count);
            theta += 0.35 / r.max(1.0);
        }
    }
    visited
        .iter()
        .enumerate()
        .filter(|(_, &v)| v)
        .map(|(i, _)| i)
        .collect()
}

/// Fully sampled central disc plus an Archimedean spiral; the turn spacing is
/// calibrated by bisection to hit the budget. Fully deterministic.
pub fn spiral_mask(side: usize, budget_fraction: f64, center_fraction: f64) -> Result<SamplingMask> {
    check_side(side)?;
    let n = side * side;
    let target = (budget_fraction * n as f64).round() as usize;
    let r0 = (center_fraction * n as f64 / std::f64::consts::PI).sqrt();
    let disc = spiral_coverage(side, r0, f64::INFINITY);
    if disc.len() > target {
        return Err(CsError::OmegaExceedsBudget {
            omega: disc.len(),
            budget: target,
        });
    }
    if disc.len() == target {
        return Ok(SamplingMask {
            side,
            indices: disc,
            multiplicities: None,
            scheme: SchemeDescriptor::Spiral {
                center_fraction,
                spacing: f64::INFINITY,
            },
            seed: 0,
            budget_fraction,
            draws_total: 0,
            omega_prefix: 0,
        });
    }
    let densest = spiral_coverage(side, r0, 0.3);
    if densest.len() < target {
        return Err(CsError::UnreachableBudget {
            requested: budget_fraction,
            achievable: densest.len() as f64 / n as f64,
        });
    }
    // coverage decreases as spacing grows; bisect
    let (mut lo, mut hi) = (0.3f64, side as f64);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if spiral_coverage(side, r0, mid).len() >= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let covered = spiral_coverage(side, r0, lo);
    Ok(SamplingMask {
        side,
        indices: covered,
        multiplicities: None,
        scheme: SchemeDescriptor::Spiral {
            center_fraction,
            spacing: lo,
        },
        seed: 0,
        budget_fraction,
        draws_total: 0,
        omega_prefix: 0,
    })
}

/// Point density supported on a single index (test helper and degenerate
/// case of the categorical sampler).
pub fn point_mass(side: usize, index: usize) -> Result<Density> {
    check_side(side)?;
    let mut weights = Array2::zeros((side, side));
    let (r, c) = split_index(side, index);
    weights[(r, c)] = 1.0;
    Density::from_weights(weights)
}
