//! PSNR metric, Monte-Carlo experiment runner, and gain tables comparing
//! single-stage and two-stage sampling strategies.

use serde::{Deserialize, Serialize};
use std::path::PathBuf;

use crate::density::{infnorm_map, optimal_density, polynomial_density, Density};
use crate::error::{CsError, Result};
use crate::formats;
use crate::gridops::{a0_apply, dwt2, idwt2, ImageGrid, KSpaceGrid, MeasurementOperator};
use crate::lowfreq::{omega_region, FrequencySet};
use crate::masks::{
    draw_distinct, radial_mask, spiral_mask, two_stage_mask, AngleMode, RngStream, SamplingMask,
};
use crate::phantom::{phantom, PhantomVariant};
use crate::solver::{basis_pursuit, reconstruct_two_stage, SolverOptions};
use crate::wavelet::{WaveletFamily, WaveletSpec};

/// Peak signal-to-noise ratio in dB. Peak is the maximum absolute value of
/// the reference (its dynamic range is arbitrary after transform pipelines).
/// Identical images return the +infinity sentinel.
pub fn psnr(reference: &ImageGrid, test: &ImageGrid) -> Result<f64> {
    if reference.side() != test.side() {
        return Err(CsError::SideMismatch(reference.side(), test.side()));
    }
    let peak = reference.values().iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    if peak == 0.0 {
        return Err(CsError::Config("reference image is identically zero".into()));
    }
    let n = (reference.side() * reference.side()) as f64;
    let mse = reference
        .values()
        .iter()
        .zip(test.values().iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / n;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (peak * peak / mse).log10())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "lowercase")]
pub enum ReferenceSource {
    File { path: PathBuf },
    Phantom { side: usize, variant: PhantomVariant },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WaveletConfig {
    pub family: String,
    #[serde(default = "default_moments")]
    pub vanishing_moments: usize,
    pub levels: usize,
}

fn default_moments() -> usize {
    10
}

impl WaveletConfig {
    pub fn to_spec(&self) -> Result<WaveletSpec> {
        match self.family.as_str() {
            "symmlet" => WaveletSpec::symmlet(self.vanishing_moments, self.levels),
            "shannon" => Ok(WaveletSpec::shannon(self.levels)),
            other => Err(CsError::UnsupportedWavelet(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct OmegaConfig {
    #[serde(default)]
    pub low_levels: usize,
    #[serde(default = "default_tau")]
    pub tau: f64,
}

fn default_tau() -> f64 {
    0.01
}

impl Default for OmegaConfig {
    fn default() -> Self {
        OmegaConfig {
            low_levels: 0,
            tau: default_tau(),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub max_iters: usize,
    pub tol: f64,
    pub gamma: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let opts = SolverOptions::default();
        SolverConfig {
            max_iters: opts.max_iters,
            tol: opts.tol,
            gamma: opts.gamma,
        }
    }
}

impl SolverConfig {
    pub fn to_options(&self) -> SolverOptions {
        SolverOptions {
            max_iters: self.max_iters,
            tol: self.tol,
            gamma: self.gamma,
            verbose: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum SchemeConfig {
    Pi,
    Poly { p: u32 },
    TwoStagePistar,
    TwoStagePoly { p: u32 },
    Radial { angle_mode: AngleMode },
    Spiral { center_fraction: f64 },
}

impl SchemeConfig {
    pub fn label(&self) -> String {
        match self {
            SchemeConfig::Pi => "pi".into(),
            SchemeConfig::Poly { p } => format!("poly{p}"),
            SchemeConfig::TwoStagePistar => "two_stage_pistar".into(),
            SchemeConfig::TwoStagePoly { p } => format!("two_stage_poly{p}"),
            SchemeConfig::Radial { angle_mode: AngleMode::Uniform } => "radial_uniform".into(),
            SchemeConfig::Radial { angle_mode: AngleMode::Random } => "radial_random".into(),
            SchemeConfig::Spiral { .. } => "spiral".into(),
        }
    }

    /// Deterministic schemes give identical masks on every trial.
    pub fn is_deterministic(&self) -> bool {
        matches!(
            self,
            SchemeConfig::Radial {
                angle_mode: AngleMode::Uniform
            } | SchemeConfig::Spiral { .. }
        )
    }

    pub fn is_two_stage(&self) -> bool {
        matches!(
            self,
            SchemeConfig::TwoStagePistar | SchemeConfig::TwoStagePoly { .. }
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub reference: ReferenceSource,
    pub wavelet: WaveletConfig,
    #[serde(default = "default_budget")]
    pub budget_fraction: f64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    pub schemes: Vec<SchemeConfig>,
    pub base_seed: u64,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub omega: OmegaConfig,
}

fn default_budget() -> f64 {
    0.2
}

fn default_trials() -> usize {
    10
}

#[derive(Debug, Clone)]
pub struct ResultRow {
    pub label: String,
    pub mean_psnr: f64,
    /// Sample standard deviation (divisor trials - 1); None for a single
    /// effective trial.
    pub std_db: Option<f64>,
    pub per_trial: Vec<f64>,
    /// Stream ids used per trial.
    pub streams: Vec<u64>,
    pub mean_iterations: f64,
    pub errors: Vec<String>,
}

fn mean_and_std(values: &[f64]) -> (f64, Option<f64>) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, None);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, Some(var.sqrt()))
}

pub fn load_reference(source: &ReferenceSource) -> Result<ImageGrid> {
    match source {
        ReferenceSource::File { path } => formats::load_image(path),
        ReferenceSource::Phantom { side, variant } => phantom(*side, *variant),
    }
}

/// Shared precomputed quantities for one experiment.
struct ExperimentContext {
    reference: ImageGrid,
    y_full: KSpaceGrid,
    spec: WaveletSpec,
    pi: Density,
    omega: FrequencySet,
    side: usize,
    target: usize,
}

impl ExperimentContext {
    fn build(cfg: &ExperimentConfig) -> Result<Self> {
        let reference = load_reference(&cfg.reference)?;
        let side = reference.side();
        let spec = cfg.wavelet.to_spec()?;
        spec.validate_for(side)?;
        let x = dwt2(&reference, &spec)?;
        let y_full = a0_apply(&x)?;
        let pi = optimal_density(&infnorm_map(&spec, side)?);
        let tau = match spec.family {
            WaveletFamily::Shannon => 0.0,
            WaveletFamily::Symmlet(_) => cfg.omega.tau,
        };
        let omega = omega_region(&spec, side, cfg.omega.low_levels, tau)?;
        let target = (cfg.budget_fraction * (side * side) as f64).round() as usize;
        Ok(ExperimentContext {
            reference,
            y_full,
            spec,
            pi,
            omega,
            side,
            target,
        })
    }

    fn build_mask(
        &self,
        scheme: &SchemeConfig,
        budget: f64,
        stream: RngStream,
    ) -> Result<SamplingMask> {
        match scheme {
            SchemeConfig::Pi => draw_distinct(&self.pi, self.target, stream),
            SchemeConfig::Poly { p } => {
                draw_distinct(&polynomial_density(self.side, *p)?, self.target, stream)
            }
            SchemeConfig::TwoStagePistar => two_stage_mask(&self.omega, &self.pi, budget, stream),
            SchemeConfig::TwoStagePoly { p } => {
                two_stage_mask(&self.omega, &polynomial_density(self.side, *p)?, budget, stream)
            }
            SchemeConfig::Radial { angle_mode } => {
                radial_mask(self.side, budget, *angle_mode, stream)
            }
            SchemeConfig::Spiral { center_fraction } => {
                spiral_mask(self.side, budget, *center_fraction)
            }
        }
    }
}

/// One (scheme, trial) job: build the mask, simulate the acquisition,
/// reconstruct, and score.
fn run_trial(
    ctx: &ExperimentContext,
    scheme: &SchemeConfig,
    budget: f64,
    opts: &SolverOptions,
    stream: RngStream,
) -> Result<(f64, usize)> {
    let mask = ctx.build_mask(scheme, budget, stream)?;
    let op = MeasurementOperator::new(mask.indices().to_vec(), ctx.spec, ctx.side)?;
    let y = op.gather(&ctx.y_full);
    let (recon, report) = if scheme.is_two_stage() {
        reconstruct_two_stage(&mask, &y, &ctx.omega, &ctx.spec, opts)?
    } else {
        let (w, report) = basis_pursuit(&op, &y, opts)?;
        (idwt2(&w)?, report)
    };
    Ok((psnr(&ctx.reference, &recon)?, report.iterations))
}

/// Run every scheme for the configured number of trials. Fully deterministic
/// given the base seed; rows are sorted by mean PSNR descending. Trial
/// failures are recorded per-row and never abort other schemes.
pub fn run_monte_carlo(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    if cfg.trials == 0 {
        return Err(CsError::Config("trials must be >= 1".into()));
    }
    if cfg.schemes.is_empty() {
        return Err(CsError::Config("scheme list must be nonempty".into()));
    }
    let ctx = ExperimentContext::build(cfg)?;
    let opts = cfg.solver.to_options();
    let mut rows = Vec::new();
    for (scheme_idx, scheme) in cfg.schemes.iter().enumerate() {
        let trials = if scheme.is_deterministic() { 1 } else { cfg.trials };
        let mut per_trial = Vec::new();
        let mut streams = Vec::new();
        let mut iterations = Vec::new();
        let mut errors = Vec::new();
        for trial in 0..trials {
            let stream_id = (scheme_idx as u64) << 32 | trial as u64;
            let stream = RngStream::new(cfg.base_seed, stream_id);
            streams.push(stream_id);
            match run_trial(&ctx, scheme, cfg.budget_fraction, &opts, stream) {
                Ok((psnr_db, iters)) => {
                    per_trial.push(psnr_db);
                    iterations.push(iters as f64);
                }
                Err(err) => errors.push(format!("trial {trial}: {err}")),
            }
        }
        let (mean, std) = if per_trial.is_empty() {
            (f64::NAN, None)
        } else {
            mean_and_std(&per_trial)
        };
        let mean_iterations = if iterations.is_empty() {
            0.0
        } else {
            iterations.iter().sum::<f64>() / iterations.len() as f64
        };
        rows.push(ResultRow {
            label: scheme.label(),
            mean_psnr: mean,
            std_db: std,
            per_trial,
            streams,
            mean_iterations,
            errors,
        });
    }
    rows.sort_by(|a, b| b.mean_psnr.partial_cmp(&a.mean_psnr).unwrap_or(std::cmp::Ordering::Equal));
    Ok(rows)
}

#[derive(Debug, Clone)]
pub struct GainRow {
    pub label: String,
    pub single_mean: f64,
    pub two_stage_mean: f64,
    pub gain_db: f64,
    pub delta_std: Option<f64>,
}

fn base_label(label: &str) -> &str {
    let stripped = label.strip_prefix("two_stage_").unwrap_or(label);
    if stripped == "pistar" {
        "pi"
    } else {
        stripped
    }
}

/// Per-scheme PSNR gain of the two-stage strategy over its single-stage
/// analogue, matched by scheme label.
pub fn gain_report(single_stage: &[ResultRow], two_stage: &[ResultRow]) -> Result<Vec<GainRow>> {
    let mut gains = Vec::new();
    for two in two_stage {
        let base = base_label(&two.label);
        let single = single_stage
            .iter()
            .find(|row| base_label(&row.label) == base)
            .ok_or_else(|| {
                CsError::Config(format!("no single-stage row matching label {}", two.label))
            })?;
        let delta_std = match (single.std_db, two.std_db) {
            (Some(a), Some(b)) => Some(b - a),
            _ => None,
        };
        gains.push(GainRow {
            label: base.to_string(),
            single_mean: single.mean_psnr,
            two_stage_mean: two.mean_psnr,
            gain_db: two.mean_psnr - single.mean_psnr,
            delta_std,
        });
    }
    Ok(gains)
}

fn format_db(v: f64) -> String {
    if v.is_infinite() {
        "inf".into()
    } else {
        format!("{v:.6}")
    }
}

/// Summary CSV, one row per scheme. Header comments pin the metric
/// conventions so the numbers are interpretable on their own.
pub fn summary_csv(rows: &[ResultRow], cfg: &ExperimentConfig) -> String {
    let mut out = String::new();
    out.push_str("# psnr peak = max |reference|; std divisor = trials - 1\n");
    out.push_str("scheme,mean_psnr_db,std_db,trials,budget,seed\n");
    for row in rows {
        let std = row
            .std_db
            .map(|s| format_db(s))
            .unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            row.label,
            format_db(row.mean_psnr),
            std,
            row.per_trial.len(),
            cfg.budget_fraction,
            cfg.base_seed
        ));
    }
    out
}

/// Per-trial detail CSV.
pub fn detail_csv(rows: &[ResultRow], cfg: &ExperimentConfig) -> String {
    let mut out = String::new();
    out.push_str("scheme,trial,stream,psnr_db,base_seed\n");
    for row in rows {
        for (trial, (&psnr_db, &stream)) in row.per_trial.iter().zip(&row.streams).enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                row.label,
                trial,
                stream,
                format_db(psnr_db),
                cfg.base_seed
            ));
        }
    }
    out
}
