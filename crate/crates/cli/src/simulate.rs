//! `simulate` and `resume`: drive a run and stream its files.

use std::fmt::Write as _;
use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{Context, Result};
use muskat_core::curve::{Curve, GraphInterface, PeriodicField, PeriodicGrid};
use muskat_core::dynamics::{RealLineGraph, TwoPhaseState};
use muskat_core::evolve::{
    integrate, resume, Checkpoint, ContourProblem, EvolutionProblem, GalerkinProblem, IntegrateOptions, Observer, PeriodicGraphProblem,
    RealLineProblem, StepRecord, Termination, TwoPhaseProblem,
};
use serde::de::DeserializeOwned;

use crate::config::{profile, InitialData, ProblemKind, RunConfig, TWO_PHASE_LEVELS};
use crate::output::{prepare_dir, toml_section, write_atomic, write_manifest};
use crate::snapshot::{fmt17, SnapshotFile, SnapshotState};
use crate::text::Doc;

pub const CONFIG_ECHO: &str = "config.toml";
pub const TELEMETRY: &str = "telemetry.tsv";
pub const CHECKPOINT: &str = "checkpoint.json";

const TELEMETRY_HEADER: &str = "# t dt err accepted nodes min_slope min_slope_alpha max_slope min_separation\n";

pub fn snapshot_name(index: usize) -> String {
    format!("snapshot_{index:04}.dat")
}

/// Snapshot files of a run directory in time order.
pub fn snapshot_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("listing {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.file_name().and_then(|s| s.to_str()).is_some_and(|s| s.starts_with("snapshot_") && s.ends_with(".dat")))
        .collect();
    v.sort();
    Ok(v)
}

fn telemetry_row(r: &StepRecord) -> String {
    let opt = |x: Option<f64>| x.map_or("-".to_string(), fmt17);
    let o = r.observation.as_ref();
    let mut s = String::new();
    write!(
        s,
        "{} {} {} {} {} {} {} {} {}",
        fmt17(r.t),
        fmt17(r.dt),
        fmt17(r.err),
        u8::from(r.accepted),
        o.map_or("-".to_string(), |o| o.nodes.to_string()),
        opt(o.and_then(|o| o.min_slope.map(|m| m.0))),
        opt(o.and_then(|o| o.min_slope.map(|m| m.1))),
        opt(o.and_then(|o| o.max_slope)),
        opt(o.and_then(|o| o.min_separation)),
    )
    .unwrap();
    s
}

/// Streams snapshots, telemetry and checkpoints into the run directory.
struct Writer<'a> {
    dir: &'a Path,
    problem: &'static str,
    next_index: usize,
    telemetry: BufWriter<File>,
    error: Option<anyhow::Error>,
}

impl Writer<'_> {
    fn keep(&mut self, r: Result<()>) {
        if let (Err(e), None) = (r, &self.error) {
            self.error = Some(e);
        }
    }
}

impl<S: SnapshotState + serde::Serialize> Observer<S> for Writer<'_> {
    fn snapshot(&mut self, t: f64, state: &S) {
        let path = self.dir.join(snapshot_name(self.next_index));
        self.next_index += 1;
        let r = write_atomic(&path, state.to_snapshot(t, self.problem).render().as_bytes());
        self.keep(r);
    }

    fn step(&mut self, record: &StepRecord) {
        let r = writeln!(self.telemetry, "{}", telemetry_row(record)).context("writing telemetry");
        self.keep(r);
        if let Some(w) = record.observation.as_ref().and_then(|o| o.warning.as_ref()) {
            eprintln!("warning at t = {:.6e}: {w}", record.t);
        }
    }

    fn checkpoint(&mut self, c: &Checkpoint<S>) {
        let r = serde_json::to_vec(c).context("encoding checkpoint").and_then(|b| write_atomic(&self.dir.join(CHECKPOINT), &b));
        let r = r.and_then(|_| self.telemetry.flush().context("flushing telemetry"));
        self.keep(r);
    }
}

pub struct RunSummary {
    pub termination: Termination,
    pub snapshots: usize,
    pub dir: PathBuf,
}

fn options(cfg: &RunConfig, max_steps: Option<usize>) -> IntegrateOptions {
    IntegrateOptions {
        t_end: cfg.t_end,
        snapshot_times: cfg.snapshot_times.clone(),
        direction: cfg.direction,
        stop_on_turnover: cfg.stop_on_turnover,
        keep_every_step: false,
        max_steps,
    }
}

enum Start<S> {
    Fresh(S),
    Resume(Checkpoint<S>),
}

fn drive<P>(problem: &P, start: Start<P::State>, cfg: &RunConfig, dir: &Path, max_steps: Option<usize>, command: &str) -> Result<RunSummary>
where
    P: EvolutionProblem,
    P::State: SnapshotState,
{
    let first_index = match &start {
        Start::Fresh(_) => 0,
        Start::Resume(c) => c.next_snapshot,
    };
    let telemetry = match &start {
        Start::Fresh(_) => {
            let mut f = File::create(dir.join(TELEMETRY)).context("creating telemetry")?;
            f.write_all(TELEMETRY_HEADER.as_bytes())?;
            f
        }
        Start::Resume(_) => OpenOptions::new().append(true).open(dir.join(TELEMETRY)).context("opening telemetry")?,
    };
    let mut w = Writer { dir, problem: problem.kind(), next_index: first_index, telemetry: BufWriter::new(telemetry), error: None };
    let ctrl = &cfg.controller;
    let opts = options(cfg, max_steps);
    let tr = match start {
        Start::Fresh(s) => integrate(problem, s, ctrl, &opts, &mut w)?,
        Start::Resume(c) => resume(problem, c, ctrl, &opts, &mut w)?,
    };
    w.telemetry.flush()?;
    if let Some(e) = w.error {
        return Err(e);
    }
    write_atomic(&dir.join(CHECKPOINT), &serde_json::to_vec(&tr.checkpoint)?)?;

    let mut doc = Doc::versioned("manifest");
    doc.put("command", command)
        .put("tool", format!("muskat {}", env!("CARGO_PKG_VERSION")))
        .put("core", format!("muskat-core {}", muskat_core::VERSION))
        .put("problem", problem.kind());
    let mut term = Doc::new();
    term.put("reason", tr.termination.reason.name()).num("t", tr.termination.t).put("detail", tr.termination.detail.replace('\n', " "));
    doc.section("termination", term);
    let mut stats = Doc::new();
    stats.put("accepted_steps", tr.checkpoint.accepted_steps.to_string()).put("snapshots", (w.next_index).to_string());
    doc.section("run", stats);
    let echo: toml::Value = toml::from_str(&cfg.to_toml())?;
    doc.section("config", toml_section(&echo));
    write_manifest(dir, doc)?;
    Ok(RunSummary { termination: tr.termination, snapshots: w.next_index, dir: dir.to_path_buf() })
}

fn uniform(n: usize) -> Result<Arc<PeriodicGrid>> {
    Ok(Arc::new(PeriodicGrid::uniform(n)?))
}

fn graph_field(cfg: &RunConfig) -> Result<PeriodicField> {
    let init = cfg.initial.clone();
    Ok(PeriodicField::from_fn(uniform(cfg.n)?, move |a| profile(&init, a)))
}

fn read_file<S: SnapshotState>(cfg: &RunConfig, like: Option<&S>) -> Result<Option<S>> {
    match &cfg.initial {
        InitialData::File { path } => Ok(Some(S::from_snapshot(&SnapshotFile::read(path)?, like)?)),
        _ => Ok(None),
    }
}

fn two_phase_initial(cfg: &RunConfig) -> Result<TwoPhaseState> {
    let (r1, r2) = (cfg.density.rho_bar_1, cfg.density.rho_bar_2);
    if let InitialData::PaperTwoPhase = cfg.initial {
        return Ok(cfg.paper_params().initial_state(uniform(cfg.n)?)?);
    }
    let grid = uniform(cfg.n)?;
    let flat = |c: f64| GraphInterface::new(PeriodicField::constant(grid.clone(), c));
    let like = TwoPhaseState::new(flat(TWO_PHASE_LEVELS.0), flat(TWO_PHASE_LEVELS.1), r1, r2)?;
    if let Some(s) = read_file(cfg, Some(&like))? {
        return Ok(s);
    }
    let f = GraphInterface::new(graph_field(cfg)?.map(|v| v + TWO_PHASE_LEVELS.0));
    Ok(TwoPhaseState::new(f, flat(TWO_PHASE_LEVELS.1), r1, r2)?)
}

fn graph_initial(cfg: &RunConfig) -> Result<GraphInterface> {
    Ok(match read_file(cfg, None)? {
        Some(s) => s,
        None => GraphInterface::new(graph_field(cfg)?),
    })
}

fn real_line_initial(cfg: &RunConfig) -> Result<RealLineGraph> {
    let init = cfg.initial.clone();
    Ok(match read_file(cfg, None)? {
        Some(s) => s,
        None => RealLineGraph::from_fn(cfg.half_width, cfg.n, |x| profile(&init, x))?,
    })
}

fn contour_initial(cfg: &RunConfig) -> Result<Curve> {
    let like = Curve::flat(uniform(8)?, cfg.density.delta_rho);
    Ok(match read_file(cfg, Some(&like))? {
        Some(c) => c,
        None => Curve::from_graph(&graph_field(cfg)?, cfg.density.delta_rho),
    })
}

fn load_checkpoint<S: DeserializeOwned>(dir: &Path) -> Result<Checkpoint<S>> {
    let bytes = fs::read(dir.join(CHECKPOINT)).with_context(|| format!("reading {}", dir.join(CHECKPOINT).display()))?;
    serde_json::from_slice(&bytes).context("decoding checkpoint")
}

/// Build the problem of `cfg` and run it fresh (`resume_from = None`) or
/// from the checkpoint stored in the run directory.
fn dispatch(cfg: &RunConfig, dir: &Path, resume_from: bool, max_steps: Option<usize>, command: &str) -> Result<RunSummary> {
    let spec = cfg.quadrature;
    let redis = cfg.redistribution.map(|p| p.for_nodes(cfg.n));
    macro_rules! go {
        ($problem:expr, $initial:expr) => {{
            let problem = $problem;
            let start = if resume_from { Start::Resume(load_checkpoint(dir)?) } else { Start::Fresh($initial) };
            drive(&problem, start, cfg, dir, max_steps, command)
        }};
    }
    match cfg.problem {
        ProblemKind::TwoPhase => go!(TwoPhaseProblem { spec, redistribution: redis }, two_phase_initial(cfg)?),
        ProblemKind::PeriodicGraph => {
            go!(PeriodicGraphProblem { rho_bar: cfg.density.rho_bar, spec, redistribution: redis }, graph_initial(cfg)?)
        }
        ProblemKind::RealLine => go!(RealLineProblem { delta_rho: cfg.density.delta_rho, spec }, real_line_initial(cfg)?),
        ProblemKind::Contour => go!(ContourProblem { spec }, contour_initial(cfg)?),
        ProblemKind::Galerkin => {
            let p = GalerkinProblem { n_modes: cfg.galerkin_modes(), spec };
            let initial = if resume_from { None } else { Some(p.initial(&contour_initial(cfg)?)?) };
            go!(p, initial.expect("fresh runs have an initial state"))
        }
    }
}

pub fn simulate(cfg: &RunConfig, force: bool) -> Result<RunSummary> {
    let dir = cfg.output_dir.clone();
    prepare_dir(&dir, force)?;
    write_atomic(&dir.join(CONFIG_ECHO), cfg.to_toml().as_bytes())?;
    dispatch(cfg, &dir, false, cfg.max_steps, "simulate")
}

/// Continue the run stored in `dir` from its checkpoint; `max_steps`
/// counts accepted steps from the start of the original run.
pub fn resume_run(dir: &Path, max_steps: Option<usize>) -> Result<RunSummary> {
    let cfg = RunConfig::from_file(&dir.join(CONFIG_ECHO))?;
    dispatch(&cfg, dir, true, max_steps, "resume")
}
