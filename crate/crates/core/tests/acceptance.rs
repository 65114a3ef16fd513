//! Acceptance criteria, one line each. Run with
//! `cargo test --release -p muskat-core --test acceptance`; set
//! `ACCEPTANCE_ONLY=5,8` to run a subset.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use muskat_core::curve::{min_slope, Curve, GraphInterface, PeriodicField, PeriodicGrid};
use muskat_core::diagnostics::{l2_decay_residual, max_principle_report};
use muskat_core::dynamics::{contour_rhs_periodic, graph_rhs_realline, periodic_graph_rhs, two_phase_rhs, PaperParams, RealLineGraph, TwoPhaseState};
use muskat_core::evolve::spline::PeriodicSpline;
use muskat_core::evolve::{
    dopri54_step, galerkin_rhs, integrate, ContourProblem, Direction, IntegrateOptions, PeriodicGraphProblem, RealLineProblem, StepController, TerminationReason, Trajectory,
    TwoPhaseProblem,
};
use muskat_core::quadrature::{ad_inequality_margin, random_trig_polynomial, QuadratureSpec};
use muskat_core::turnover::{construct_turning_datum, detect_turnover, verify_certificate};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(bool, String), String>;

fn grid(n: usize) -> Arc<PeriodicGrid> {
    Arc::new(PeriodicGrid::uniform(n).unwrap())
}

fn spec() -> QuadratureSpec {
    QuadratureSpec::default()
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn flat_fixed_points() -> Outcome {
    let n = 256;
    let g = grid(n);
    let real = graph_rhs_realline(&RealLineGraph::from_fn(20.0, n, |_| 0.0).map_err(err)?, 4.0 * PI, &spec()).map_err(err)?;
    let real = real.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let st = TwoPhaseState::new(
        GraphInterface::new(PeriodicField::constant(g.clone(), 0.5)),
        GraphInterface::new(PeriodicField::constant(g.clone(), -0.5)),
        1.0,
        0.5,
    )
    .map_err(err)?;
    let (ft, gt) = two_phase_rhs(&st, &spec()).map_err(err)?;
    let two = ft.max_abs().max(gt.max_abs());
    let flat = Curve::flat(g, 4.0 * PI);
    let (a, b) = contour_rhs_periodic(&flat, &spec()).map_err(err)?;
    let contour = a.max_abs().max(b.max_abs());
    let (p, q) = galerkin_rhs(&flat, n / 4, &spec()).map_err(err)?;
    let galerkin = p.coeffs().iter().chain(q.coeffs()).fold(0.0f64, |m, c| m.max(c.norm()));
    let worst = real.max(two).max(contour).max(galerkin);
    Ok((worst < 1e-10, format!("max |rhs| real-line {real:.1e}, two-phase {two:.1e}, contour {contour:.1e}, galerkin {galerkin:.1e} (< 1e-10)")))
}

fn linearization() -> Outcome {
    let eps = 1e-3;
    let n = 128;
    let mut worst_rhs = 0.0f64;
    let mut worst_amp = 0.0f64;
    for k in 1..=3 {
        let kk = k as f64;
        let f0 = GraphInterface::new(PeriodicField::from_fn(grid(n), |a| eps * (kk * a).cos()));
        let ft = periodic_graph_rhs(&f0, 1.0, &spec()).map_err(err)?;
        let expect: Vec<f64> = f0.values().iter().map(|v| -2.0 * PI * kk * v).collect();
        let scale = expect.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let e = ft.values().iter().zip(&expect).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale;
        worst_rhs = worst_rhs.max(e);

        let p = PeriodicGraphProblem::new(1.0, spec(), None, &f0);
        let times: Vec<f64> = (0..=5).map(|i| 0.01 * i as f64).collect();
        let o = IntegrateOptions { t_end: 0.05, snapshot_times: times, ..Default::default() };
        let tr = integrate(&p, f0, &StepController::default(), &o, &mut ()).map_err(err)?;
        for s in &tr.snapshots {
            let amp = 2.0 * s.state.field().spectrum().map_err(err)?.coeff(k).norm();
            let expect = eps * (-2.0 * PI * kk * s.t).exp();
            worst_amp = worst_amp.max((amp - expect).abs() / expect);
        }
    }
    Ok((
        worst_rhs <= 5.0 * eps && worst_amp < 0.01,
        format!("rhs relative error {worst_rhs:.2e} (<= {:.0e}), amplitude vs exp(-2 pi k t) {worst_amp:.2e} (< 1e-2)", 5.0 * eps),
    ))
}

fn kernel_forms() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let f = random_trig_polynomial(grid(256), 4, &mut rng).scale(0.15);
        let (_, z2t) = contour_rhs_periodic(&Curve::from_graph(&f, 4.0 * PI), &spec()).map_err(err)?;
        let ft = periodic_graph_rhs(&GraphInterface::new(f), 1.0, &spec()).map_err(err)?;
        let d = z2t.values().iter().zip(ft.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst = worst.max(d);
    }
    Ok((worst < 1e-8, format!("max |contour - interaction| over 20 graphs {worst:.2e} (< 1e-8)")))
}

const PAPER_TIMES: [f64; 5] = [0.0, 3.46e-4, 7.66e-4, 1.04e-3, 1.84e-3];

fn paper_run() -> Result<Trajectory<TwoPhaseState>, String> {
    // uniform grid: clustering nodes at the lower bump also clusters them on
    // the upper interface, whose large density jump then limits the step
    let st = PaperParams::default().initial_state(grid(512)).map_err(err)?;
    let p = TwoPhaseProblem::new(spec(), None, &st);
    let o = IntegrateOptions { t_end: 2.5e-3, snapshot_times: PAPER_TIMES.to_vec(), ..Default::default() };
    integrate(&p, st, &StepController::default(), &o, &mut ()).map_err(err)
}

fn max_slope_g(s: &TwoPhaseState) -> Result<f64, String> {
    // sampled inside the cells: node values alone jitter as the peak moves
    const PER_CELL: usize = 16;
    let spl = PeriodicSpline::from_field(s.g.field()).map_err(err)?;
    let x = spl.nodes();
    Ok((0..spl.len())
        .flat_map(|i| (0..PER_CELL).map(move |k| (i, k)))
        .map(|(i, k)| spl.deriv(x[i] + spl.width(i) * k as f64 / PER_CELL as f64).abs())
        .fold(0.0, f64::max))
}

fn paper_experiment(tr: &Trajectory<TwoPhaseState>) -> Outcome {
    let times: Vec<f64> = tr.snapshots.iter().map(|s| s.t).collect();
    let snaps_ok = times == PAPER_TIMES;
    let slopes = tr.snapshots.iter().map(|s| max_slope_g(&s.state)).collect::<Result<Vec<_>, _>>()?;
    let increasing = slopes.windows(2).all(|w| w[1] > w[0]);
    let reason = tr.termination.reason;
    let terminated = matches!(reason, TerminationReason::StepCollapse | TerminationReason::NearTouching) && tr.termination.t < 2.5e-3;
    let slopes: Vec<String> = slopes.iter().map(|s| format!("{s:.2}")).collect();
    Ok((
        snaps_ok && increasing && terminated,
        format!("snapshots {times:?}, max|g'| [{}], termination {} at t = {:.4e}", slopes.join(", "), reason.name(), tr.termination.t),
    ))
}

fn certificate() -> Outcome {
    let d = construct_turning_datum(1.0, 2.0, 128, &spec()).map_err(err)?;
    let c = &d.certificate;
    let (again, ok) = verify_certificate(&d.curve, c, &spec()).map_err(err)?;
    Ok((
        c.integral_value + c.integral_error < 0.0 && c.conditions.all() && ok,
        format!(
            "b = {}, value {:.10} +- {:.1e}, conditions {}, doubled-resolution value {:.10}",
            c.b,
            c.integral_value,
            c.integral_error,
            if c.conditions.all() { "all pass".to_string() } else { c.conditions.failed().join(",") },
            again.value
        ),
    ))
}

fn turnover_event() -> Outcome {
    let d = construct_turning_datum(1.0, 2.0, 128, &spec()).map_err(err)?;
    let h = 2.0 * PI / d.curve.grid().len() as f64;
    let p = ContourProblem { spec: spec() };
    let times: Vec<f64> = (0..=10).map(|i| 1e-5 * i as f64).collect();
    let fwd = IntegrateOptions { t_end: 1e-4, snapshot_times: times, ..Default::default() };
    let tr = integrate(&p, d.curve.clone(), &StepController::default(), &fwd, &mut ()).map_err(err)?;
    let event = detect_turnover(&tr).map_err(err)?;
    let last = &tr.snapshots.last().ok_or("no snapshots")?.state;
    let slope = muskat_core::curve::slope_z1(last).map_err(err)?;
    let negative = slope.values().iter().filter(|v| **v < 0.0).count();
    let near = event.map(|e| e.alpha.abs() <= 2.0 * h).unwrap_or(false);

    let back = IntegrateOptions { t_end: 1e-4, direction: Direction::Backward, max_steps: Some(10), ..Default::default() };
    // short steps so that ten of them fit in the trusted backward horizon
    let short = StepController { dt_max: 1e-5, ..StepController::default() };
    let tb = integrate(&p, d.curve, &short, &back, &mut ()).map_err(err)?;
    let mins: Vec<f64> = tb.accepted().filter_map(|r| r.observation.as_ref()?.min_slope.map(|m| m.0)).take(10).collect();
    let grows = mins.len() == 10 && mins[0] > 0.0 && mins.windows(2).all(|w| w[1] > w[0]);
    let (m_end, _) = min_slope(last).map_err(err)?;
    Ok((
        near && negative >= 2 && grows,
        format!(
            "t* = {:.3e}, alpha* = {:.2e} (cell {h:.2e}), final min slope {m_end:.2e} with {negative} negative nodes; backward min slopes {:.2e} .. {:.2e} increasing: {grows}",
            event.map(|e| e.t).unwrap_or(f64::NAN),
            event.map(|e| e.alpha).unwrap_or(f64::NAN),
            mins.first().copied().unwrap_or(f64::NAN),
            mins.last().copied().unwrap_or(f64::NAN)
        ),
    ))
}

fn conservation(paper: Option<&Trajectory<TwoPhaseState>>) -> Outcome {
    let mut drift = 0.0f64;
    if let Some(tr) = paper {
        let (f0, g0) = (tr.snapshots[0].state.f.field().mean(), tr.snapshots[0].state.g.field().mean());
        for s in &tr.snapshots {
            drift = drift.max((s.state.f.field().mean() - f0).abs()).max((s.state.g.field().mean() - g0).abs());
        }
    }
    // a second, redistributed two-phase run
    let g = grid(128);
    let st = TwoPhaseState::new(
        GraphInterface::new(PeriodicField::from_fn(g.clone(), |a| 0.5 + 0.2 * a.cos() + 0.1 * (2.0 * a).sin())),
        GraphInterface::new(PeriodicField::from_fn(g, |a| -0.5 + 0.15 * (a - 1.0).sin())),
        1.0,
        0.5,
    )
    .map_err(err)?;
    let p = TwoPhaseProblem::new(spec(), Some(Default::default()), &st);
    let times: Vec<f64> = (0..=5).map(|i| 0.01 * i as f64).collect();
    let o = IntegrateOptions { t_end: 0.05, snapshot_times: times, ..Default::default() };
    let tr = integrate(&p, st, &StepController::default(), &o, &mut ()).map_err(err)?;
    let (f0, g0) = (tr.snapshots[0].state.f.field().mean(), tr.snapshots[0].state.g.field().mean());
    for s in &tr.snapshots {
        drift = drift.max((s.state.f.field().mean() - f0).abs()).max((s.state.g.field().mean() - g0).abs());
    }

    let f0 = GraphInterface::new(PeriodicField::from_fn(grid(128), |a| 0.4 * a.cos() + 0.15 * (3.0 * a).sin() + 0.05 * (5.0 * a).cos()));
    let p = PeriodicGraphProblem::new(1.0, spec(), None, &f0);
    let times: Vec<f64> = (0..=10).map(|i| 0.01 * i as f64).collect();
    let o = IntegrateOptions { t_end: 0.1, snapshot_times: times, ..Default::default() };
    let tr = integrate(&p, f0, &StepController::default(), &o, &mut ()).map_err(err)?;
    let mp = max_principle_report(&tr.snapshots).map_err(err)?;

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut margin = f64::INFINITY;
    for _ in 0..100 {
        margin = margin.min(ad_inequality_margin(&random_trig_polynomial(grid(128), 8, &mut rng)).map_err(err)?);
    }
    Ok((
        drift < 1e-6 && mp.passed && margin >= -1e-10,
        format!(
            "mean drift {drift:.1e} (< 1e-6), max-norm growth {:.1e} (decay rate {:.3}), AD margin min {margin:.2e} (>= -1e-10)",
            mp.observed, mp.metrics["decay_rate"]
        ),
    ))
}

fn integrator_order() -> Outcome {
    let ctrl = StepController { rtol: 1.0, atol: 1.0, dt_max: 1.0, ..Default::default() };
    let decay = |_: f64, y: &[f64]| -> Result<Vec<f64>, ()> { Ok(y.iter().map(|v| -v).collect()) };
    let error = |dt: f64| {
        let mut y = vec![1.0];
        let steps = (1.0 / dt).round() as usize;
        for i in 0..steps {
            y = dopri54_step(decay, &y, i as f64 * dt, dt, &ctrl).unwrap().y;
        }
        (y[0] - (-1.0f64).exp()).abs()
    };
    let e: Vec<f64> = [0.1, 0.05, 0.025].iter().map(|&h| error(h)).collect();
    let slopes: Vec<f64> = e.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    Ok((slopes.iter().all(|s| (s - 5.0).abs() <= 0.3), format!("global error slopes {slopes:.3?} (5 +- 0.3)")))
}

fn l2_run(n: usize, dt_snap: f64) -> Result<f64, String> {
    let t_end = 0.1;
    let g = RealLineGraph::from_fn(20.0, n, |x| 0.1 * (-x * x).exp()).map_err(err)?;
    let p = RealLineProblem { delta_rho: 4.0 * PI, spec: spec() };
    let m = (t_end / dt_snap).round() as usize;
    let times: Vec<f64> = (0..=m).map(|i| t_end * i as f64 / m as f64).collect();
    let o = IntegrateOptions { t_end, snapshot_times: times, ..Default::default() };
    let tr = integrate(&p, g, &StepController::default(), &o, &mut ()).map_err(err)?;
    Ok(l2_decay_residual(&tr.snapshots, 4.0 * PI).map_err(err)?.observed)
}

fn l2_identity() -> Outcome {
    let coarse = l2_run(256, 0.01)?;
    let fine = l2_run(512, 0.005)?;
    Ok((fine < 1e-3 && fine <= 0.5 * coarse, format!("relative residual {coarse:.2e} (n = 256, dt 0.01) -> {fine:.2e} (n = 512, dt 0.005); need < 1e-3 and halving")))
}

fn main() {
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY").ok().map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let wanted = |k: usize| only.as_ref().map(|v| v.contains(&k)).unwrap_or(true);
    let names = [
        "flat fixed points",
        "linearization",
        "kernel-form equivalence",
        "paper experiment",
        "turnover certificate",
        "turnover event",
        "conservation and monotonicity",
        "integrator order",
        "L2 decay identity",
    ];
    let paper = if wanted(4) || wanted(7) { Some(paper_run()) } else { None };
    let mut failed = 0;
    for (i, name) in names.iter().enumerate() {
        let k = i + 1;
        if !wanted(k) {
            continue;
        }
        let start = Instant::now();
        let out = match k {
            1 => flat_fixed_points(),
            2 => linearization(),
            3 => kernel_forms(),
            4 => match paper.as_ref().unwrap() {
                Ok(tr) => paper_experiment(tr),
                Err(e) => Err(e.clone()),
            },
            5 => certificate(),
            6 => turnover_event(),
            7 => conservation(paper.as_ref().and_then(|p| p.as_ref().ok())),
            8 => integrator_order(),
            _ => l2_identity(),
        };
        let secs = start.elapsed().as_secs_f64();
        let (ok, detail) = out.unwrap_or_else(|e| (false, format!("error: {e}")));
        if !ok {
            failed += 1;
        }
        println!("criterion {k} [{name}]: {} - {detail} ({secs:.1}s)", if ok { "PASS" } else { "FAIL" });
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
