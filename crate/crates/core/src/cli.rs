//! Command-line front end.
//!
//! Every run resolves its flags into a [`RunConfig`], executes it, and writes
//! the config as `manifest.json` beside the outputs. `replay` re-executes a
//! manifest.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::analysis::{self, ClassifierConfig};
use crate::bethe::{build_relative_wavefunction, relative_motion_residual, solve_bethe_coefficients, DEFAULT_R_MAX};
use crate::map::{self, BranchPolicy, OrbitConfig, Sign};
use crate::spectral::{self, EigenpairSet};
use crate::{ArrayParams, Error, PairBasis, Result, C64};

/// Tag written into every manifest.
pub const ARTIFACT_VERSION: &str = concat!("polariton/", env!("CARGO_PKG_VERSION"));

/// Environment variable holding the worker-pool size.
pub const THREADS_ENV: &str = "POLARITON_THREADS";

pub const MANIFEST_FILE: &str = "manifest.json";

/// Default sweep range is `[SWEEP_MARGIN, π - SWEEP_MARGIN]`.
const SWEEP_MARGIN: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Selection {
    All,
    /// States with `|Im E|` below the spectral median.
    LowLoss,
}

/// Fully resolved description of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub version: String,
    pub params: ArrayParams,
    /// Recorded for reproducibility; no command draws random numbers.
    pub seed: u64,
    pub command: CommandConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum CommandConfig {
    Eigensolve,
    Analyze {
        archive: Option<PathBuf>,
        selection: Selection,
        fourier_states: Vec<usize>,
        classifier: ClassifierConfig,
    },
    Contour {
        eps2: f64,
        resolution: usize,
    },
    Orbit {
        k1: f64,
        k2: f64,
        orbit: OrbitConfig,
    },
    Sweep {
        k1_min: f64,
        k1_max: f64,
        samples: usize,
        delta: f64,
        orbit: OrbitConfig,
    },
    SweepGrid {
        k1_min: f64,
        k1_max: f64,
        k2_min: f64,
        k2_max: f64,
        step: f64,
        orbit: OrbitConfig,
    },
    BetheCheck {
        center: f64,
        eps2: f64,
        r_max: usize,
        a: [f64; 2],
        b: [f64; 2],
    },
}

#[derive(Debug, Parser)]
#[command(name = "polariton", version, about = "Two-polariton states of a waveguide-coupled qubit array")]
struct Cli {
    /// Directory receiving outputs and the manifest.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Clone, Copy)]
struct ParamArgs {
    /// Number of qubits.
    #[arg(long = "n", default_value_t = 60)]
    n: usize,
    /// Interqubit phase in radians.
    #[arg(long, default_value_t = 0.02)]
    phi: f64,
    /// Single-qubit radiative decay rate.
    #[arg(long, default_value_t = 1.0)]
    gamma0: f64,
    /// Seed recorded in the manifest.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BranchArg {
    All,
    Plus,
    Minus,
}

#[derive(Debug, Args, Clone, Copy)]
struct OrbitArgs {
    #[arg(long, default_value_t = 100)]
    iters: usize,
    /// Evanescent cutoff on |Im q|.
    #[arg(long, default_value_t = 1.0)]
    cutoff: f64,
    /// Dedup tolerance in radians.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = BranchArg::All)]
    branch: BranchArg,
}

impl OrbitArgs {
    fn config(self) -> OrbitConfig {
        OrbitConfig {
            max_iterations: self.iters,
            cutoff: self.cutoff,
            tolerance: self.tol,
            branch: match self.branch {
                BranchArg::All => BranchPolicy::AllBranches,
                BranchArg::Plus => BranchPolicy::SignedChoice(Sign::Plus),
                BranchArg::Minus => BranchPolicy::SignedChoice(Sign::Minus),
            },
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the full two-excitation spectrum and archive it.
    Eigensolve {
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Classify eigenstates and write per-state metrics.
    Analyze {
        #[command(flatten)]
        params: ParamArgs,
        /// Eigenpair archive; solved afresh when absent.
        #[arg(long)]
        archive: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Selection::All)]
        select: Selection,
        /// Eigenstate indices whose Fourier maps are written.
        #[arg(long, value_delimiter = ',')]
        fourier: Vec<usize>,
        #[arg(long, default_value_t = 0.2)]
        band: f64,
        #[arg(long, default_value_t = 4000)]
        resolution: usize,
    },
    /// Trace the non-interacting isoenergy contour.
    Contour {
        #[command(flatten)]
        params: ParamArgs,
        /// Pair energy 2ε.
        #[arg(long, allow_negative_numbers = true)]
        energy: f64,
        #[arg(long, default_value_t = 2000)]
        resolution: usize,
    },
    /// Iterate the reflection map from one seed.
    Orbit {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, allow_negative_numbers = true)]
        k1: f64,
        #[arg(long, allow_negative_numbers = true)]
        k2: f64,
        #[command(flatten)]
        orbit: OrbitArgs,
    },
    /// Orbit sizes along k2 = k1 + delta, or over a grid with --step.
    Sweep {
        #[command(flatten)]
        params: ParamArgs,
        /// Offset of the seed line k2 = k1 + delta.
        #[arg(long, default_value_t = 0.4, allow_negative_numbers = true)]
        delta: f64,
        /// Defaults to 0.4.
        #[arg(long)]
        k1_min: Option<f64>,
        /// Defaults to π - 0.4.
        #[arg(long)]
        k1_max: Option<f64>,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        /// Grid spacing; switches to a two-dimensional sweep.
        #[arg(long)]
        step: Option<f64>,
        #[arg(long)]
        k2_min: Option<f64>,
        #[arg(long)]
        k2_max: Option<f64>,
        #[command(flatten)]
        orbit: OrbitArgs,
    },
    /// Build the infinite-array Bethe solution and report its residuals.
    BetheCheck {
        #[command(flatten)]
        params: ParamArgs,
        /// Center-of-mass momentum K.
        #[arg(long = "K", allow_negative_numbers = true)]
        center: f64,
        /// Pair energy 2ε.
        #[arg(long, allow_negative_numbers = true)]
        energy: f64,
        #[arg(long, default_value_t = DEFAULT_R_MAX)]
        r_max: usize,
    },
    /// Re-run the command recorded in a manifest.
    Replay {
        manifest: PathBuf,
    },
}

fn params_of(p: ParamArgs) -> Result<ArrayParams> {
    ArrayParams::new(p.n, p.phi, p.gamma0)
}

fn resolve(command: Command) -> Result<RunConfig> {
    let (p, command) = match command {
        Command::Eigensolve { params } => (params, CommandConfig::Eigensolve),
        Command::Analyze {
            params,
            archive,
            select,
            fourier,
            band,
            resolution,
        } => (
            params,
            CommandConfig::Analyze {
                archive,
                selection: select,
                fourier_states: fourier,
                classifier: ClassifierConfig {
                    band_halfwidth: band,
                    contour_resolution: resolution,
                    ..ClassifierConfig::default()
                },
            },
        ),
        Command::Contour {
            params,
            energy,
            resolution,
        } => (
            params,
            CommandConfig::Contour {
                eps2: energy,
                resolution,
            },
        ),
        Command::Orbit { params, k1, k2, orbit } => (
            params,
            CommandConfig::Orbit {
                k1,
                k2,
                orbit: orbit.config(),
            },
        ),
        Command::Sweep {
            params,
            delta,
            k1_min,
            k1_max,
            samples,
            step,
            k2_min,
            k2_max,
            orbit,
        } => {
            let k1_min = k1_min.unwrap_or(SWEEP_MARGIN);
            let k1_max = k1_max.unwrap_or(std::f64::consts::PI - SWEEP_MARGIN);
            let command = match step {
                Some(step) => CommandConfig::SweepGrid {
                    k1_min,
                    k1_max,
                    k2_min: k2_min.unwrap_or(k1_min),
                    k2_max: k2_max.unwrap_or(k1_max),
                    step,
                    orbit: orbit.config(),
                },
                None => CommandConfig::Sweep {
                    k1_min,
                    k1_max,
                    samples,
                    delta,
                    orbit: orbit.config(),
                },
            };
            (params, command)
        }
        Command::BetheCheck {
            params,
            center,
            energy,
            r_max,
        } => (
            params,
            CommandConfig::BetheCheck {
                center,
                eps2: energy,
                r_max,
                a: [1.0, 0.0],
                b: [1.0, 0.0],
            },
        ),
        Command::Replay { manifest } => return load_manifest(&manifest),
    };
    Ok(RunConfig {
        version: ARTIFACT_VERSION.into(),
        params: params_of(p)?,
        seed: p.seed,
        command,
    })
}

pub fn load_manifest(path: &Path) -> Result<RunConfig> {
    let config: RunConfig = serde_json::from_str(&fs::read_to_string(path)?)?;
    config.params.validate()?;
    Ok(config)
}

fn write(out: &Path, name: &str, contents: &str) -> Result<()> {
    fs::write(out.join(name), contents)?;
    Ok(())
}

/// Executes a resolved run, writing outputs into `out`. Returns the
/// one-line report printed on success.
pub fn execute(config: &RunConfig, out: &Path) -> Result<String> {
    fs::create_dir_all(out)?;
    write(out, MANIFEST_FILE, &(serde_json::to_string_pretty(config)? + "\n"))?;
    let params = &config.params;
    match &config.command {
        CommandConfig::Eigensolve => {
            let set = solve(params)?;
            set.save(&out.join("eigs.json"))?;
            let worst = set.residuals.iter().copied().fold(0.0, f64::max);
            Ok(format!(
                "states={} max_residual={worst:e} lowest={}",
                set.len(),
                format_complex(set.energies[0])
            ))
        }
        CommandConfig::Analyze {
            archive,
            selection,
            fourier_states,
            classifier,
        } => {
            let set = match archive {
                Some(path) => EigenpairSet::load(path)?,
                None => solve(params)?,
            };
            let indices = select(&set, *selection);
            let classes = analysis::classify_spectrum(&set, &indices, classifier)?;
            write(out, "classification.csv", &analysis::classification_csv(&set, &indices, &classes))?;
            for &i in fourier_states {
                let grid = spectral::eigenvector_to_grid(&set, i)?;
                let fmap = analysis::fourier_map(&grid, classifier.oversampling.max(1) * grid.n_qubits())?;
                write(out, &format!("fourier_{i}.csv"), &fmap.to_csv())?;
            }
            let count = |l| classes.iter().filter(|c| c.label == l).count();
            Ok(format!(
                "states={} regular={} chaotic={} fermionized={}",
                classes.len(),
                count(analysis::StateLabel::Regular),
                count(analysis::StateLabel::Chaotic),
                count(analysis::StateLabel::Fermionized)
            ))
        }
        CommandConfig::Contour { eps2, resolution } => {
            let c = analysis::isoenergy_contour(*eps2, params, *resolution)?;
            write(out, "contour.csv", &c.to_csv())?;
            Ok(format!("points={} skipped={}", c.points.len(), c.skipped))
        }
        CommandConfig::Orbit { k1, k2, orbit } => {
            let o = map::orbit((*k1, *k2), params, orbit)?;
            write(out, "orbit.csv", &o.to_csv())?;
            Ok(format!("count={} closed={}", o.count(), o.closed))
        }
        CommandConfig::Sweep {
            k1_min,
            k1_max,
            samples,
            delta,
            orbit,
        } => {
            let r = map::sweep((*k1_min, *k1_max), *samples, *delta, params, orbit)?;
            write(out, "sweep.csv", &r.to_csv())?;
            Ok(sweep_report(&r))
        }
        CommandConfig::SweepGrid {
            k1_min,
            k1_max,
            k2_min,
            k2_max,
            step,
            orbit,
        } => {
            let r = map::sweep_grid((*k1_min, *k1_max), (*k2_min, *k2_max), *step, params, orbit)?;
            write(out, "sweep.csv", &r.to_csv())?;
            Ok(sweep_report(&r))
        }
        CommandConfig::BetheCheck {
            center,
            eps2,
            r_max,
            a,
            b,
        } => {
            let free = (C64::new(a[0], a[1]), C64::new(b[0], b[1]));
            let sol = solve_bethe_coefficients(*center, *eps2, params, free)?;
            let psi = build_relative_wavefunction(&sol, *r_max);
            let res = relative_motion_residual(&psi)?;
            write(out, "bethe.csv", &psi.to_csv())?;
            Ok(format!(
                "q_a={} q_b={} res_r0={:e} res_r1={:e} res_bulk={:e}",
                format_complex(sol.q_a),
                format_complex(sol.q_b),
                res.r0,
                res.r1,
                res.bulk
            ))
        }
    }
}

fn sweep_report(r: &map::SweepResult) -> String {
    let failed = r.points.iter().filter(|p| p.error.is_some()).count();
    let max = r.counts().into_iter().max().unwrap_or(0);
    format!("seeds={} max_count={max} failed={failed}", r.points.len())
}

fn format_complex(z: C64) -> String {
    format!("{}{:+}i", z.re, z.im)
}

fn solve(params: &ArrayParams) -> Result<EigenpairSet> {
    let basis = PairBasis::new(params.n_qubits)?;
    let op = spectral::assemble_two_excitation_operator(params, &basis)?;
    spectral::solve_eigenpairs(&op)
}

fn select(set: &EigenpairSet, selection: Selection) -> Vec<usize> {
    match selection {
        Selection::All => (0..set.len()).collect(),
        Selection::LowLoss => {
            let losses: Vec<f64> = set.energies.iter().map(|e| e.im.abs()).collect();
            let median = analysis::quantile(&losses, 0.5);
            (0..set.len()).filter(|&i| losses[i] < median).collect()
        }
    }
}

fn configure_threads() -> Result<()> {
    if let Ok(value) = std::env::var(THREADS_ENV) {
        let threads: usize = value
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("{THREADS_ENV} must be a positive integer, got {value:?}")))?;
        // A pool already built by an earlier call in this process is kept.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    Ok(())
}

/// Parses `argv`, runs the command, and returns the process exit status:
/// 0 on success, 2 on usage errors, 1 on any other failure.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let outcome = configure_threads()
        .and_then(|_| resolve(cli.command))
        .and_then(|config| execute(&config, &cli.out));
    match outcome {
        Ok(report) => {
            println!("{report}");
            0
        }
        Err(e @ Error::Config(_)) => {
            eprintln!("error: {e}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
