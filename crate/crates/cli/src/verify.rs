//! `verify`: run diagnostics on stored runs and curves, or the property
//! suite, and write a report document.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, ensure, Context, Result};
use muskat_core::curve::{Curve, GraphInterface, PeriodicField, PeriodicGrid};
use muskat_core::diagnostics::{
    l2_decay_residual, max_principle_report, strip_width, strip_width_trend, DiagnosticReport,
};
use muskat_core::dynamics::{periodic_graph_rhs, RealLineGraph, TwoPhaseState};
use muskat_core::evolve::{integrate, IntegrateOptions, PeriodicGraphProblem, Snapshot, StepController};
use muskat_core::quadrature::{ad_inequality_margin, random_trig_polynomial, QuadratureSpec};
use muskat_core::turnover::{construct_turning_datum, detect_turnover_in, verify_certificate, TurnoverCertificate};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::RunConfig;
use crate::simulate::{snapshot_files, CONFIG_ECHO};
use crate::snapshot::{SnapshotFile, SnapshotState};
use crate::text::{num, Doc};
use crate::turnover::{read_certificate, CERTIFICATE_FILE};

/// Smallest admissible pointwise margin of the inequality.
pub const AD_TOL: f64 = 1e-10;
/// Tolerance on the drift of the mean height.
pub const MEAN_TOL: f64 = 1e-6;
/// Allowed relative shrinking of the strip width between snapshots.
pub const STRIP_TOL: f64 = 0.05;

fn report(name: &str, passed: bool, observed: f64, expected: &str, tolerance: f64, metrics: BTreeMap<String, f64>) -> DiagnosticReport {
    DiagnosticReport { name: name.into(), passed, observed, expected: expected.into(), tolerance, metrics }
}

pub fn report_doc(reports: &[DiagnosticReport]) -> Doc {
    let mut d = Doc::versioned("verification-report");
    d.flag("passed", reports.iter().all(|r| r.passed));
    let mut all = Doc::new();
    for (i, r) in reports.iter().enumerate() {
        let mut e = Doc::new();
        e.put("name", r.name.as_str())
            .flag("passed", r.passed)
            .num("observed", r.observed)
            .put("expected", r.expected.as_str())
            .num("tolerance", r.tolerance);
        let mut m = Doc::new();
        for (k, v) in &r.metrics {
            m.num(k, *v);
        }
        e.section("metrics", m);
        all.section(&format!("{i}"), e);
    }
    d.section("reports", all);
    d
}

/// The run directory's snapshots as states; `like` supplies what the files
/// do not store.
fn load_states<S: SnapshotState>(files: &[PathBuf], like: Option<&S>) -> Result<Vec<Snapshot<S>>> {
    ensure!(!files.is_empty(), "no snapshot files given");
    files
        .iter()
        .map(|p| {
            let f = SnapshotFile::read(p)?;
            Ok(Snapshot { t: f.t, state: S::from_snapshot(&f, like).with_context(|| format!("{}", p.display()))? })
        })
        .collect()
}

/// Snapshot files named directly or found in run directories, plus the
/// configuration echo of the (first) run directory.
pub fn gather(inputs: &[PathBuf]) -> Result<(Vec<PathBuf>, Option<RunConfig>)> {
    let mut files = Vec::new();
    let mut cfg = None;
    for p in inputs {
        if p.is_dir() {
            files.extend(snapshot_files(p)?);
            if cfg.is_none() && p.join(CONFIG_ECHO).is_file() {
                cfg = Some(RunConfig::from_file(&p.join(CONFIG_ECHO))?);
            }
        } else {
            files.push(p.clone());
        }
    }
    ensure!(!files.is_empty(), "no snapshot files found in {inputs:?}");
    Ok((files, cfg))
}

fn problem_of(files: &[PathBuf]) -> Result<String> {
    Ok(SnapshotFile::read(&files[0])?.problem)
}

pub fn max_principle(inputs: &[PathBuf]) -> Result<Vec<DiagnosticReport>> {
    let (files, _) = gather(inputs)?;
    Ok(vec![match problem_of(&files)?.as_str() {
        "periodic-graph" => max_principle_report(&load_states::<GraphInterface>(&files, None)?)?,
        "real-line" => max_principle_report(&load_states::<RealLineGraph>(&files, None)?)?,
        p => bail!("the maximum principle applies to single graphs, not to {p} snapshots"),
    }])
}

pub fn ad_inequality(count: usize, seed: u64, degree: usize, n: usize) -> Result<Vec<DiagnosticReport>> {
    let grid = Arc::new(PeriodicGrid::uniform(n)?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    let mut failures = 0;
    for _ in 0..count {
        let m = ad_inequality_margin(&random_trig_polynomial(grid.clone(), degree, &mut rng))?;
        worst = worst.min(m);
        failures += usize::from(m < -AD_TOL);
    }
    let metrics = BTreeMap::from([
        ("samples".to_string(), count as f64),
        ("passes".to_string(), (count - failures) as f64),
        ("seed".to_string(), seed as f64),
        ("degree".to_string(), degree as f64),
    ]);
    Ok(vec![report("ad-inequality", failures == 0, worst, "min over samples and nodes of 2 g Lg - L(g^2) >= 0", AD_TOL, metrics)])
}

pub fn reducida(curve_path: &Path, certificate: Option<&Path>) -> Result<Vec<DiagnosticReport>> {
    let cert_path = match certificate {
        Some(p) => p.to_path_buf(),
        None => curve_path.with_file_name(CERTIFICATE_FILE),
    };
    let (cert, spec): (TurnoverCertificate, QuadratureSpec) = read_certificate(&cert_path)?;
    let curve = Curve::from_snapshot(&SnapshotFile::read(curve_path)?, None)?;
    let (again, agree) = verify_certificate(&curve, &cert, &spec)?;
    let negative = again.value + again.error < 0.0;
    let metrics = BTreeMap::from([
        ("certified_value".to_string(), cert.integral_value),
        ("certified_error".to_string(), cert.integral_error),
        ("recomputed_error".to_string(), again.error),
        ("difference".to_string(), (again.value - cert.integral_value).abs()),
    ]);
    Ok(vec![report(
        "reducida",
        agree && negative && cert.conditions.all(),
        again.value,
        "doubled-resolution value agrees within the reported errors and stays negative",
        cert.integral_error + again.error,
        metrics,
    )])
}

pub fn l2_identity(inputs: &[PathBuf], delta_rho: Option<f64>) -> Result<Vec<DiagnosticReport>> {
    let (files, cfg) = gather(inputs)?;
    let dr = delta_rho.or(cfg.map(|c| c.density.delta_rho)).unwrap_or(muskat_core::curve::DEFAULT_DELTA_RHO);
    Ok(vec![l2_decay_residual(&load_states::<RealLineGraph>(&files, None)?, dr)?])
}

fn widths(snaps: &[(f64, PeriodicField)]) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut ts = Vec::new();
    let mut ws = Vec::new();
    for (t, f) in snaps {
        ensure!(f.grid().is_uniform(), "strip widths need uniform grids (snapshot at t = {t})");
        ts.push(*t);
        ws.push(strip_width(f)?);
    }
    Ok((ts, ws))
}

fn graph_fields(files: &[PathBuf], cfg: Option<&RunConfig>) -> Result<Vec<(f64, Vec<PeriodicField>)>> {
    Ok(match problem_of(files)?.as_str() {
        "periodic-graph" => load_states::<GraphInterface>(files, None)?.into_iter().map(|s| (s.t, vec![s.state.field().clone()])).collect(),
        "two-phase" => {
            let like = two_phase_like(cfg)?;
            load_states::<TwoPhaseState>(files, Some(&like))?.into_iter().map(|s| (s.t, vec![s.state.f.field().clone(), s.state.g.field().clone()])).collect()
        }
        p => bail!("expected graph snapshots on the circle, found {p}"),
    })
}

fn two_phase_like(cfg: Option<&RunConfig>) -> Result<TwoPhaseState> {
    let d = cfg.map(|c| c.density).unwrap_or_default();
    let grid = Arc::new(PeriodicGrid::uniform(8)?);
    let g = |c| GraphInterface::new(PeriodicField::constant(grid.clone(), c));
    Ok(TwoPhaseState::new(g(1.0), g(-1.0), d.rho_bar_1, d.rho_bar_2)?)
}

pub fn strip(inputs: &[PathBuf], rel_tol: f64) -> Result<Vec<DiagnosticReport>> {
    let (files, cfg) = gather(inputs)?;
    let fields = graph_fields(&files, cfg.as_ref())?;
    let k = fields[0].1.len();
    (0..k)
        .map(|i| {
            let snaps: Vec<(f64, PeriodicField)> = fields.iter().map(|(t, f)| (*t, f[i].clone())).collect();
            let (ts, ws) = widths(&snaps)?;
            let mut r = strip_width_trend(&ts, &ws, rel_tol);
            if k > 1 {
                r.name = format!("{}-{}", r.name, ["f", "g"][i]);
            }
            Ok(r)
        })
        .collect()
}

pub fn mean_conservation(inputs: &[PathBuf], tol: f64) -> Result<Vec<DiagnosticReport>> {
    let (files, cfg) = gather(inputs)?;
    let fields = graph_fields(&files, cfg.as_ref())?;
    let k = fields[0].1.len();
    Ok((0..k)
        .map(|i| {
            let m0 = fields[0].1[i].mean();
            let drift = fields.iter().map(|(_, f)| (f[i].mean() - m0).abs()).fold(0.0, f64::max);
            let name = if k > 1 { format!("mean-conservation-{}", ["f", "g"][i]) } else { "mean-conservation".to_string() };
            let metrics = BTreeMap::from([("initial_mean".to_string(), m0), ("final_mean".to_string(), fields.last().unwrap().1[i].mean())]);
            report(&name, drift <= tol, drift, "grid mean constant along the run", tol, metrics)
        })
        .collect())
}

pub fn turnover(inputs: &[PathBuf]) -> Result<Vec<DiagnosticReport>> {
    let (files, cfg) = gather(inputs)?;
    let like = cfg.map(|c| Curve::flat(Arc::new(PeriodicGrid::uniform(8).unwrap()), c.density.delta_rho));
    let snaps = load_states::<Curve>(&files, like.as_ref())?;
    let event = detect_turnover_in(&snaps)?;
    Ok(vec![match event {
        Some(e) => report(
            "turnover",
            true,
            e.t,
            "min d(alpha) z1 changes sign along the run",
            0.0,
            BTreeMap::from([("alpha".to_string(), e.alpha), ("min_slope".to_string(), e.min_slope)]),
        ),
        None => report("turnover", false, f64::NAN, "min d(alpha) z1 changes sign along the run", 0.0, BTreeMap::new()),
    }])
}

/// The property suite: flat fixed point, the inequality on random
/// polynomials, a short stable run checked for the maximum principle, mean
/// conservation and strip-width growth, and a turnover certificate.
pub fn suite(seed: u64) -> Result<Vec<DiagnosticReport>> {
    let spec = QuadratureSpec::default();
    let mut out = Vec::new();

    let grid = Arc::new(PeriodicGrid::uniform(64)?);
    let flat = GraphInterface::new(PeriodicField::constant(grid.clone(), 0.3));
    let r = periodic_graph_rhs(&flat, 1.0, &spec)?.max_abs();
    out.push(report("flat-fixed-point", r < 1e-10, r, "max |f_t| on flat data", 1e-10, BTreeMap::new()));

    out.extend(ad_inequality(100, seed, 8, 128)?);

    let f0 = GraphInterface::new(PeriodicField::from_fn(grid, |a| 0.2 * a.cos() + 0.05 * (2.0 * a).sin()));
    let problem = PeriodicGraphProblem::new(1.0, spec, None, &f0);
    let times: Vec<f64> = (0..=10).map(|i| 0.005 * i as f64).collect();
    let opts = IntegrateOptions { t_end: 0.05, snapshot_times: times, ..Default::default() };
    let tr = integrate(&problem, f0, &StepController::default(), &opts, &mut ())?;
    out.push(max_principle_report(&tr.snapshots)?);
    let m0 = tr.snapshots[0].state.mean();
    let drift = tr.snapshots.iter().map(|s| (s.state.mean() - m0).abs()).fold(0.0, f64::max);
    out.push(report("mean-conservation", drift <= MEAN_TOL, drift, "grid mean constant along the run", MEAN_TOL, BTreeMap::new()));
    let snaps: Vec<(f64, PeriodicField)> = tr.snapshots.iter().map(|s| (s.t, s.state.field().clone())).collect();
    let (ts, ws) = widths(&snaps)?;
    out.push(strip_width_trend(&ts, &ws, STRIP_TOL));

    let datum = construct_turning_datum(1.0, 2.0, 64, &spec)?;
    let (again, agree) = verify_certificate(&datum.curve, &datum.certificate, &spec)?;
    out.push(report(
        "turnover-certificate",
        datum.certificate.passed() && agree,
        again.value,
        "reduced integral negative, conditions hold, doubled resolution agrees",
        datum.certificate.integral_error + again.error,
        BTreeMap::from([("b".to_string(), datum.certificate.b)]),
    ));
    Ok(out)
}

/// One summary line per report.
pub fn summary(reports: &[DiagnosticReport]) -> String {
    reports
        .iter()
        .map(|r| format!("{} {}: observed {} (tolerance {})\n", if r.passed { "PASS" } else { "FAIL" }, r.name, num(r.observed), num(r.tolerance)))
        .collect()
}
