use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use csmri::bench::{self, ExperimentConfig};
use csmri::density::{
    infnorm_map, k_of_density, optimal_density, polynomial_density, restricted_density, Density,
};
use csmri::error::{CsError, Result};
use csmri::formats;
use csmri::gridops::{dwt2, a0_apply, idwt2, MeasurementOperator};
use csmri::lowfreq::omega_region;
use csmri::manifest::RunManifest;
use csmri::masks::{
    draw_distinct, radial_mask, spiral_mask, two_stage_mask, AngleMode, RngStream, SamplingMask,
    SchemeDescriptor,
};
use csmri::phantom::{phantom, PhantomVariant};
use csmri::solver::{basis_pursuit, reconstruct_two_stage, SolverOptions};
use csmri::wavelet::{WaveletFamily, WaveletSpec};

#[derive(Parser)]
#[command(
    name = "csmri",
    version,
    about = "Variable-density k-space sampling design and l1 reconstruction"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct WaveletArgs {
    /// Wavelet family: symmlet or shannon
    #[arg(long, default_value = "symmlet")]
    wavelet: String,
    /// Vanishing moments (symmlet only)
    #[arg(long, default_value_t = 10)]
    moments: usize,
    /// Decomposition depth J
    #[arg(long, default_value_t = 4)]
    levels: usize,
}

impl WaveletArgs {
    fn to_spec(&self) -> Result<WaveletSpec> {
        match self.wavelet.as_str() {
            "symmlet" => WaveletSpec::symmlet(self.moments, self.levels),
            "shannon" => Ok(WaveletSpec::shannon(self.levels)),
            other => Err(CsError::UnsupportedWavelet(other.to_string())),
        }
    }
}

#[derive(Args, Clone)]
struct OmegaArgs {
    /// Detail levels included in the low-frequency set (beyond approximation)
    #[arg(long = "low-levels", default_value_t = 0)]
    low_levels: usize,
    /// Relative modulus threshold defining omega for symmlet atoms
    #[arg(long, default_value_t = 0.01)]
    tau: f64,
}

#[derive(Args, Clone)]
struct SolverArgs {
    #[arg(long = "max-iters", default_value_t = 2000)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
}

impl SolverArgs {
    fn to_options(&self) -> SolverOptions {
        SolverOptions {
            max_iters: self.max_iters,
            tol: self.tol,
            gamma: self.gamma,
            verbose: false,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compute the row-norm map, the optimal density pi, and its omega-restricted variant
    Density {
        /// Grid side N (power of two)
        #[arg(long, default_value_t = 256)]
        n: usize,
        #[command(flatten)]
        wavelet: WaveletArgs,
        #[command(flatten)]
        omega: OmegaArgs,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw a sampling mask
    Mask {
        /// pi | pistar | poly:p | radial:uniform | radial:random | spiral
        #[arg(long)]
        scheme: String,
        #[arg(long, default_value_t = 0.2)]
        budget: f64,
        #[arg(long, default_value_t = 256)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        wavelet: WaveletArgs,
        #[command(flatten)]
        omega: OmegaArgs,
        /// Also write a PGM visualization of the mask
        #[arg(long)]
        pgm: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Reconstruct an image from masked k-space data
    Reconstruct {
        /// CSM1 mask file (sidecar <mask>.json must sit next to it)
        #[arg(long)]
        mask: PathBuf,
        /// Full-grid complex k-space in CSA1 format
        #[arg(long, conflicts_with_all = ["image", "phantom"])]
        kspace: Option<PathBuf>,
        /// Reference image (CSA1 real or PGM); acquisition is simulated
        #[arg(long, conflicts_with = "phantom")]
        image: Option<PathBuf>,
        /// Built-in reference: ellipses or blocks
        #[arg(long)]
        phantom: Option<String>,
        /// Subtract the omega-derived component before the l1 solve
        #[arg(long = "two-stage")]
        two_stage: bool,
        #[command(flatten)]
        wavelet: WaveletArgs,
        #[command(flatten)]
        omega: OmegaArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a Monte-Carlo benchmark described by a JSON config
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print version, formats, and defaults
    Info,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // help/version requests are not usage errors
            use clap::error::ErrorKind;
            if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{err}");
                return ExitCode::SUCCESS;
            }
            eprint!("{err}");
            return ExitCode::from(1);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

fn ensure_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path)?;
    Ok(())
}

fn density_scheme(
    label: &str,
) -> Result<(String, Option<u32>)> {
    if let Some(p) = label.strip_prefix("poly:") {
        let p: u32 = p
            .parse()
            .map_err(|_| CsError::Config(format!("bad polynomial degree in scheme {label}")))?;
        return Ok(("poly".into(), Some(p)));
    }
    Ok((label.to_string(), None))
}

fn pi_density(spec: &WaveletSpec, side: usize) -> Result<Density> {
    Ok(optimal_density(&infnorm_map(spec, side)?))
}

fn build_mask(
    scheme: &str,
    side: usize,
    budget: f64,
    seed: u64,
    spec: &WaveletSpec,
    omega_args: &OmegaArgs,
) -> Result<SamplingMask> {
    let stream = RngStream::new(seed, 0);
    let target = (budget * (side * side) as f64).round() as usize;
    let (kind, degree) = density_scheme(scheme)?;
    match (kind.as_str(), degree) {
        ("pi", None) => draw_distinct(&pi_density(spec, side)?, target, stream),
        ("pistar", None) => {
            let tau = effective_tau(spec, omega_args.tau);
            let omega = omega_region(spec, side, omega_args.low_levels, tau)?;
            two_stage_mask(&omega, &pi_density(spec, side)?, budget, stream)
        }
        ("poly", Some(p)) => draw_distinct(&polynomial_density(side, p)?, target, stream),
        ("radial:uniform", None) => radial_mask(side, budget, AngleMode::Uniform, stream),
        ("radial:random", None) => radial_mask(side, budget, AngleMode::Random, stream),
        ("spiral", None) => spiral_mask(side, budget, 0.05),
        _ => Err(CsError::Config(format!(
            "unknown scheme {scheme} (expected pi, pistar, poly:p, radial:uniform, radial:random, or spiral)"
        ))),
    }
}

/// Shannon atoms have exact supports; the threshold is not used.
fn effective_tau(spec: &WaveletSpec, tau: f64) -> f64 {
    match spec.family {
        WaveletFamily::Shannon => 0.0,
        WaveletFamily::Symmlet(_) => tau,
    }
}

fn load_mask_with_sidecar(path: &Path) -> Result<SamplingMask> {
    let (side, indices) = formats::load_mask(path)?;
    let mut json_path = path.as_os_str().to_owned();
    json_path.push(".json");
    let sidecar: Option<formats::MaskSidecar> = std::fs::read_to_string(&json_path)
        .ok()
        .map(|s| serde_json::from_str(&s))
        .transpose()?;
    let (scheme, seed, budget, draws) = match sidecar {
        Some(s) => (s.scheme, s.seed, s.budget_fraction, s.draws_total),
        None => (
            SchemeDescriptor::Distinct {
                density: "unknown".into(),
            },
            0,
            indices.len() as f64 / (side * side) as f64,
            indices.len(),
        ),
    };
    // file order is sorted; omega membership is re-checked downstream, so a
    // zero prefix is safe here
    SamplingMask::from_parts(side, indices, scheme, seed, budget, draws, 0)
}

fn run(command: Command) -> Result<()> {
    let started = Instant::now();
    match command {
        Command::Density { n, wavelet, omega, out } => {
            let spec = wavelet.to_spec()?;
            spec.validate_for(n)?;
            ensure_dir(&out)?;
            let map = infnorm_map(&spec, n)?;
            let pi = optimal_density(&map);
            let tau = effective_tau(&spec, omega.tau);
            let omega_set = omega_region(&spec, n, omega.low_levels, tau)?;
            let pistar = restricted_density(&map, &omega_set)?;
            let l = pi.normalizer().expect("pi carries its normalizer");
            let lstar = pistar.normalizer().expect("pistar carries its normalizer");
            let k_pi = k_of_density(&map, &pi)?;

            let map_path = out.join("infnorm.csa");
            let pi_path = out.join("pi.csa");
            let pistar_path = out.join("pistar.csa");
            let summary_path = out.join("summary.json");
            formats::save_array_real(&map_path, map.values())?;
            formats::save_array_real(&pi_path, pi.mass())?;
            formats::save_array_real(&pistar_path, pistar.mass())?;
            let summary = serde_json::json!({
                "L": l,
                "Lstar": lstar,
                "K_pi": k_pi,
                "J": spec.levels,
                "n": n,
                "omega_size": omega_set.len(),
            });
            std::fs::write(&summary_path, serde_json::to_string_pretty(&summary)? + "\n")?;

            let params = serde_json::json!({
                "n": n,
                "wavelet": wavelet.wavelet,
                "moments": wavelet.moments,
                "levels": wavelet.levels,
                "low_levels": omega.low_levels,
                "tau": tau,
            });
            let mut manifest = RunManifest::new("density", params, None);
            for p in [&map_path, &pi_path, &pistar_path, &summary_path] {
                manifest.record_output(p)?;
            }
            manifest.duration_seconds = started.elapsed().as_secs_f64();
            manifest.write(&out.join("manifest.json"))?;
            println!("L = {l:.6}, L* = {lstar:.6}, K(pi) = {k_pi:.6}");
        }
        Command::Mask { scheme, budget, n, seed, wavelet, omega, pgm, out } => {
            let spec = wavelet.to_spec()?;
            spec.validate_for(n)?;
            ensure_dir(&out)?;
            let mask = build_mask(&scheme, n, budget, seed, &spec, &omega)?;
            let mask_path = out.join("mask.csm");
            formats::save_mask(&mask_path, &mask)?;
            let mut outputs = vec![mask_path.clone(), {
                let mut p = mask_path.as_os_str().to_owned();
                p.push(".json");
                PathBuf::from(p)
            }];
            if pgm {
                let pgm_path = out.join("mask.pgm");
                let img = formats::mask_to_image(n, mask.indices())?;
                formats::save_pgm(&pgm_path, &img, 8)?;
                outputs.push(pgm_path);
            }
            let params = serde_json::json!({
                "scheme": scheme,
                "budget": budget,
                "n": n,
                "seed": seed,
                "wavelet": wavelet.wavelet,
                "moments": wavelet.moments,
                "levels": wavelet.levels,
                "low_levels": omega.low_levels,
                "tau": omega.tau,
            });
            let mut manifest = RunManifest::new("mask", params, Some(seed));
            for p in &outputs {
                manifest.record_output(p)?;
            }
            manifest.duration_seconds = started.elapsed().as_secs_f64();
            manifest.write(&out.join("manifest.json"))?;
            println!(
                "mask: {} distinct of {} draws ({:.2}% of grid)",
                mask.distinct_count(),
                mask.draws_total(),
                100.0 * mask.distinct_fraction()
            );
        }
        Command::Reconstruct {
            mask,
            kspace,
            image,
            phantom: phantom_variant,
            two_stage,
            wavelet,
            omega,
            solver,
            out,
        } => {
            let spec = wavelet.to_spec()?;
            let loaded = load_mask_with_sidecar(&mask)?;
            let side = loaded.side();
            spec.validate_for(side)?;
            ensure_dir(&out)?;
            let mut inputs = vec![mask.clone()];

            let y: Vec<Complex64> = if let Some(kspace_path) = &kspace {
                inputs.push(kspace_path.clone());
                let grid = formats::load_array_complex(kspace_path)?;
                if grid.dim() != (side, side) {
                    return Err(CsError::SideMismatch(grid.dim().0, side));
                }
                let flat: Vec<Complex64> = grid.iter().cloned().collect();
                loaded.indices().iter().map(|&i| flat[i]).collect()
            } else {
                let reference = match (&image, &phantom_variant) {
                    (Some(path), _) => {
                        inputs.push(path.clone());
                        formats::load_image(path)?
                    }
                    (None, Some(variant)) => {
                        let v = match variant.as_str() {
                            "ellipses" => PhantomVariant::Ellipses,
                            "blocks" => PhantomVariant::Blocks,
                            other => {
                                return Err(CsError::Config(format!(
                                    "unknown phantom variant {other}"
                                )))
                            }
                        };
                        phantom(side, v)?
                    }
                    (None, None) => {
                        return Err(CsError::Config(
                            "provide one of --kspace, --image, or --phantom".into(),
                        ))
                    }
                };
                if reference.side() != side {
                    return Err(CsError::SideMismatch(reference.side(), side));
                }
                let x = dwt2(&reference, &spec)?;
                let full = a0_apply(&x)?;
                loaded.indices().iter().map(|&i| full.at_index(i)).collect()
            };

            let opts = solver.to_options();
            let (recon, report) = if two_stage {
                let tau = effective_tau(&spec, omega.tau);
                let omega_set = omega_region(&spec, side, omega.low_levels, tau)?;
                reconstruct_two_stage(&loaded, &y, &omega_set, &spec, &opts)?
            } else {
                let op = MeasurementOperator::new(loaded.indices().to_vec(), spec, side)?;
                let (w, report) = basis_pursuit(&op, &y, &opts)?;
                (idwt2(&w)?, report)
            };

            let csa_path = out.join("reconstruction.csa");
            let pgm_path = out.join("reconstruction.pgm");
            let report_path = out.join("solve_report.json");
            formats::save_array_real(&csa_path, recon.values())?;
            formats::save_pgm(&pgm_path, &recon, 16)?;
            std::fs::write(&report_path, serde_json::to_string_pretty(&report)? + "\n")?;

            let params = serde_json::json!({
                "mask": mask.display().to_string(),
                "two_stage": two_stage,
                "wavelet": wavelet.wavelet,
                "moments": wavelet.moments,
                "levels": wavelet.levels,
                "low_levels": omega.low_levels,
                "tau": omega.tau,
                "max_iters": solver.max_iters,
                "tol": solver.tol,
                "gamma": solver.gamma,
            });
            let mut manifest = RunManifest::new("reconstruct", params, None);
            for p in &inputs {
                manifest.record_input(p)?;
            }
            for p in [&csa_path, &pgm_path, &report_path] {
                manifest.record_output(p)?;
            }
            manifest.duration_seconds = started.elapsed().as_secs_f64();
            manifest.write(&out.join("manifest.json"))?;
            println!(
                "solved in {} iterations (converged: {}, residual {:.3e})",
                report.iterations, report.converged, report.constraint_residual
            );
        }
        Command::Bench { config, out } => {
            let text = std::fs::read_to_string(&config)?;
            let cfg: ExperimentConfig = serde_json::from_str(&text)?;
            ensure_dir(&out)?;
            let rows = bench::run_monte_carlo(&cfg)?;
            let summary_path = out.join("summary.csv");
            let detail_path = out.join("trials.csv");
            std::fs::write(&summary_path, bench::summary_csv(&rows, &cfg))?;
            std::fs::write(&detail_path, bench::detail_csv(&rows, &cfg))?;
            let params = serde_json::to_value(&cfg)?;
            let mut manifest = RunManifest::new("bench", params, Some(cfg.base_seed));
            manifest.record_input(&config)?;
            manifest.record_output(&summary_path)?;
            manifest.record_output(&detail_path)?;
            manifest.duration_seconds = started.elapsed().as_secs_f64();
            manifest.write(&out.join("manifest.json"))?;
            for row in &rows {
                let std = row
                    .std_db
                    .map(|s| format!(" +/- {s:.2}"))
                    .unwrap_or_default();
                println!("{:>18}: {:.2} dB{}", row.label, row.mean_psnr, std);
                for err in &row.errors {
                    eprintln!("{}: {err}", row.label);
                }
            }
        }
        Command::Info => {
            println!("csmri {}", env!("CARGO_PKG_VERSION"));
            println!();
            println!("subcommands: density, mask, reconstruct, bench, info");
            println!("formats:");
            println!("  CSA1  binary array (f64 real or complex, little-endian)");
            println!("  CSM1  binary mask (sorted u32 indices) + JSON sidecar");
            println!("  PGM   binary P5, 8- or 16-bit (16-bit big-endian)");
            println!("defaults:");
            println!("  wavelet symmlet, 10 vanishing moments, 4 levels");
            println!("  budget 0.20, solver max_iters 2000, tol 1e-7, gamma 1.0");
            println!("  all randomness derives from --seed via named streams");
        }
    }
    Ok(())
}
