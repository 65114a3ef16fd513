//! `muskat`: run, certify, verify and plot Muskat interface experiments.

mod config;
mod output;
mod plot;
mod simulate;
mod snapshot;
mod text;
mod turnover;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use muskat_core::diagnostics::DiagnosticReport;
use muskat_core::error::{CurveError, EvolveError, TurnoverError};
use muskat_core::evolve::TerminationReason;
use muskat_core::quadrature::QuadratureSpec;
use muskat_core::turnover::{DEFAULT_BETA1, DEFAULT_BETA2};

use config::{ConfigError, RunConfig};
use output::write_atomic;

pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_ARC_CHORD: u8 = 3;
pub const EXIT_STEP_COLLAPSE: u8 = 4;
pub const EXIT_QUADRATURE: u8 = 5;
pub const EXIT_VERIFICATION: u8 = 6;
pub const EXIT_FAMILY_INVALID: u8 = 7;
pub const EXIT_CONDITION: u8 = 8;
pub const EXIT_SEARCH_FAILED: u8 = 9;
pub const EXIT_INCREASE_MODES: u8 = 10;
pub const EXIT_NON_REMOVABLE: u8 = 11;

/// Environment variable capping the worker threads.
const THREADS_VAR: &str = "MUSKAT_THREADS";

#[derive(Parser)]
#[command(name = "muskat", version, about = "Muskat interface simulator and verification toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a TOML config file or a builtin
    /// (paper-two-phase, flat, cosine(eps,k), gaussian(eps,sigma)).
    Simulate {
        config: String,
        /// output directory (overrides the configured one)
        #[arg(long)]
        out: Option<PathBuf>,
        /// node count (overrides the configured one)
        #[arg(long)]
        n: Option<usize>,
        /// final time (overrides the configured one; snapshot times beyond it are dropped)
        #[arg(long)]
        t_end: Option<f64>,
        /// stop after this many accepted steps (resumable)
        #[arg(long)]
        max_steps: Option<usize>,
        /// overwrite an existing run directory
        #[arg(long)]
        force: bool,
    },
    /// Continue a run from the checkpoint in its output directory.
    Resume {
        dir: PathBuf,
        #[arg(long)]
        max_steps: Option<usize>,
    },
    /// Construct initial data that turn over, with a certificate.
    ConstructTurnover {
        #[arg(long, default_value_t = DEFAULT_BETA1)]
        beta1: f64,
        #[arg(long, default_value_t = DEFAULT_BETA2)]
        beta2: f64,
        #[arg(long, default_value_t = 128)]
        n_modes: usize,
        #[arg(long, default_value = "turnover")]
        out: PathBuf,
        #[arg(long)]
        force: bool,
    },
    /// Run a diagnostic and write a report.
    Verify {
        #[command(subcommand)]
        what: Verify,
        /// report file (default: <what>-report.txt)
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
    /// Render snapshot files or run directories as SVG.
    Plot {
        inputs: Vec<PathBuf>,
        #[arg(long, default_value = "plots")]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum Verify {
    /// The maximum norm never grows along a single-graph run.
    MaxPrinciple { inputs: Vec<PathBuf> },
    /// The pointwise inequality 2 g Lg >= L(g^2) on random trigonometric polynomials.
    AdInequality {
        #[arg(long, default_value_t = 100)]
        random: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        degree: usize,
        #[arg(long, default_value_t = 128)]
        n: usize,
    },
    /// Recompute a turnover certificate at doubled resolution.
    Reducida {
        curve: PathBuf,
        /// certificate file (default: certificate.txt next to the curve)
        #[arg(long)]
        certificate: Option<PathBuf>,
    },
    /// The L² decay identity along a real-line run.
    L2Identity {
        inputs: Vec<PathBuf>,
        #[arg(long)]
        delta_rho: Option<f64>,
    },
    /// Strip width of analyticity does not shrink along a run.
    StripWidth {
        inputs: Vec<PathBuf>,
        #[arg(long, default_value_t = verify::STRIP_TOL)]
        rel_tol: f64,
    },
    /// The grid mean of every interface stays constant.
    MeanConservation {
        inputs: Vec<PathBuf>,
        #[arg(long, default_value_t = verify::MEAN_TOL)]
        tol: f64,
    },
    /// A contour run turns over.
    Turnover { inputs: Vec<PathBuf> },
    /// The property suite.
    All {
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

impl Verify {
    fn name(&self) -> &'static str {
        match self {
            Verify::MaxPrinciple { .. } => "max-principle",
            Verify::AdInequality { .. } => "ad-inequality",
            Verify::Reducida { .. } => "reducida",
            Verify::L2Identity { .. } => "l2-identity",
            Verify::StripWidth { .. } => "strip-width",
            Verify::MeanConservation { .. } => "mean-conservation",
            Verify::Turnover { .. } => "turnover",
            Verify::All { .. } => "all",
        }
    }
}

fn termination_code(reason: TerminationReason) -> u8 {
    match reason {
        TerminationReason::ReachedTEnd | TerminationReason::TurnoverDetected | TerminationReason::StepLimit => EXIT_OK,
        TerminationReason::ArcChordFailure => EXIT_ARC_CHORD,
        TerminationReason::StepCollapse | TerminationReason::NearTouching => EXIT_STEP_COLLAPSE,
        TerminationReason::QuadratureFailure => EXIT_QUADRATURE,
    }
}

/// Exit code for an error, from the most specific cause in its chain.
fn error_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if cause.is::<ConfigError>() || cause.is::<clap::Error>() {
            return EXIT_CONFIG;
        }
        if let Some(t) = cause.downcast_ref::<TurnoverError>() {
            return match t {
                TurnoverError::InvalidParameters(_) => EXIT_CONFIG,
                TurnoverError::FamilyInvalid { .. } => EXIT_FAMILY_INVALID,
                TurnoverError::ConditionViolated(_) => EXIT_CONDITION,
                TurnoverError::SearchFailed { .. } => EXIT_SEARCH_FAILED,
                TurnoverError::IncreaseModes { .. } => EXIT_INCREASE_MODES,
                TurnoverError::NonRemovable(_) => EXIT_NON_REMOVABLE,
                TurnoverError::Quadrature(_) => EXIT_QUADRATURE,
                TurnoverError::Curve(CurveError::ArcChordViolation { .. }) => EXIT_ARC_CHORD,
                TurnoverError::Curve(_) => EXIT_ERROR,
            };
        }
        if let Some(ev) = cause.downcast_ref::<EvolveError>() {
            if matches!(ev, EvolveError::InvalidController(_) | EvolveError::BadSnapshotTimes(_)) {
                return EXIT_CONFIG;
            }
        }
    }
    EXIT_ERROR
}

fn cap_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_VAR) {
        let n: usize = v.trim().parse().map_err(|_| ConfigError(format!("{THREADS_VAR}={v:?} is not a thread count")))?;
        if n == 0 {
            return Err(ConfigError(format!("{THREADS_VAR} must be at least 1")).into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring worker threads")?;
    }
    Ok(())
}

fn simulate_cmd(config: &str, out: Option<PathBuf>, n: Option<usize>, t_end: Option<f64>, max_steps: Option<usize>, force: bool) -> Result<u8> {
    let mut cfg = RunConfig::resolve(config)?;
    if let Some(o) = out {
        cfg.output_dir = o;
    }
    if let Some(n) = n {
        cfg.n = n;
    }
    if let Some(t) = t_end {
        cfg.t_end = t;
        cfg.snapshot_times.retain(|&s| s <= t);
    }
    if max_steps.is_some() {
        cfg.max_steps = max_steps;
    }
    cfg.validate()?;
    let s = simulate::simulate(&cfg, force)?;
    report_run(&s);
    Ok(termination_code(s.termination.reason))
}

fn report_run(s: &simulate::RunSummary) {
    println!(
        "{}: {} at t = {:.6e} ({} snapshots in {})",
        s.termination.reason.name(),
        s.termination.detail,
        s.termination.t,
        s.snapshots,
        s.dir.display()
    );
}

fn verify_cmd(what: Verify, out: Option<PathBuf>) -> Result<u8> {
    let name = what.name();
    let reports: Vec<DiagnosticReport> = match what {
        Verify::MaxPrinciple { inputs } => verify::max_principle(&inputs)?,
        Verify::AdInequality { random, seed, degree, n } => verify::ad_inequality(random, seed, degree, n)?,
        Verify::Reducida { curve, certificate } => verify::reducida(&curve, certificate.as_deref())?,
        Verify::L2Identity { inputs, delta_rho } => verify::l2_identity(&inputs, delta_rho)?,
        Verify::StripWidth { inputs, rel_tol } => verify::strip(&inputs, rel_tol)?,
        Verify::MeanConservation { inputs, tol } => verify::mean_conservation(&inputs, tol)?,
        Verify::Turnover { inputs } => verify::turnover(&inputs)?,
        Verify::All { seed } => verify::suite(seed)?,
    };
    let path = out.unwrap_or_else(|| PathBuf::from(format!("{name}-report.txt")));
    write_atomic(&path, verify::report_doc(&reports).render().as_bytes())?;
    print!("{}", verify::summary(&reports));
    println!("report written to {}", path.display());
    Ok(if reports.iter().all(|r| r.passed) { EXIT_OK } else { EXIT_VERIFICATION })
}

fn run(cli: Cli) -> Result<u8> {
    cap_threads()?;
    match cli.command {
        Command::Simulate { config, out, n, t_end, max_steps, force } => simulate_cmd(&config, out, n, t_end, max_steps, force),
        Command::Resume { dir, max_steps } => {
            let s = simulate::resume_run(&dir, max_steps)?;
            report_run(&s);
            Ok(termination_code(s.termination.reason))
        }
        Command::ConstructTurnover { beta1, beta2, n_modes, out, force } => {
            let c = turnover::construct(beta1, beta2, n_modes, &QuadratureSpec::default(), &out, force)?;
            let cert = &c.certificate;
            println!(
                "certificate {}: b = {}, reduced integral {} +- {:.2e} ({})",
                if cert.passed() { "pass" } else { "fail" },
                cert.b,
                cert.integral_value,
                cert.integral_error,
                c.dir.display()
            );
            Ok(if cert.passed() { EXIT_OK } else { EXIT_VERIFICATION })
        }
        Command::Verify { what, out } => verify_cmd(what, out),
        Command::Plot { inputs, out } => {
            if inputs.is_empty() {
                return Err(ConfigError("plot needs at least one snapshot file or run directory".into()).into());
            }
            let p = plot::plot(&inputs, &out)?;
            for f in &p.files {
                println!("{}", f.display());
            }
            Ok(EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(error_code(&e))
        }
    }
}
