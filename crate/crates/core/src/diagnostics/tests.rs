use std::sync::Arc;

use super::*;
use crate::curve::PeriodicGrid;
use crate::evolve::{integrate, Direction, IntegrateOptions, PeriodicGraphProblem, StepController};
use crate::quadrature::QuadratureSpec;

fn grid(n: usize) -> Arc<PeriodicGrid> {
    Arc::new(PeriodicGrid::uniform(n).unwrap())
}

fn snaps(values: &[(f64, f64)]) -> Vec<Snapshot<PeriodicField>> {
    values.iter().map(|&(t, c)| Snapshot { t, state: PeriodicField::from_fn(grid(16), |a| c * a.cos()) }).collect()
}

#[test]
fn constant_max_norm_passes_with_zero_rate() {
    let s: Vec<_> = (0..4).map(|i| Snapshot { t: i as f64 * 0.1, state: PeriodicField::constant(grid(16), 0.3) }).collect();
    let r = max_principle_report(&s).unwrap();
    assert!(r.passed);
    assert_eq!(r.observed, 0.0);
    assert_eq!(r.metrics["decay_rate"], 0.0);
}

#[test]
fn growth_fails_the_max_principle() {
    let r = max_principle_report(&snaps(&[(0.0, 1.0), (0.1, 0.9), (0.2, 0.95)])).unwrap();
    assert!(!r.passed);
    assert!(max_principle_report::<PeriodicField>(&[]).is_err());
}

fn cosine_run(direction: Direction, t_end: f64) -> Vec<Snapshot<GraphInterface>> {
    let g = GraphInterface::new(PeriodicField::from_fn(grid(64), |a| 1e-3 * a.cos()));
    let p = PeriodicGraphProblem::new(1.0, QuadratureSpec::default(), None, &g);
    let times: Vec<f64> = (0..=5).map(|i| t_end * i as f64 / 5.0).collect();
    let o = IntegrateOptions { t_end, snapshot_times: times, direction, ..Default::default() };
    integrate(&p, g, &StepController::default(), &o, &mut ()).unwrap().snapshots
}

#[test]
fn small_cosine_decays_at_the_linear_rate() {
    let r = max_principle_report(&cosine_run(Direction::Forward, 0.05)).unwrap();
    assert!(r.passed, "{r:?}");
    let rate = r.metrics["decay_rate"];
    assert!((rate - 2.0 * PI).abs() < 0.05 * 2.0 * PI, "{rate}");
}

#[test]
fn backward_runs_violate_the_max_principle() {
    let r = max_principle_report(&cosine_run(Direction::Backward, 0.01)).unwrap();
    assert!(!r.passed);
}

#[test]
fn zero_graph_has_no_dissipation() {
    let g = RealLineGraph::from_fn(10.0, 64, |_| 0.0).unwrap();
    assert_eq!(dissipation(&g).unwrap(), 0.0);
    let s = vec![Snapshot { t: 0.0, state: g.clone() }, Snapshot { t: 0.1, state: g }];
    let r = l2_decay_residual(&s, 4.0 * PI).unwrap();
    assert!(r.passed && r.observed == 0.0);
}

#[test]
fn dissipation_is_symmetric() {
    let g = RealLineGraph::from_fn(10.0, 256, |x| 0.3 * (-x * x).exp() + 0.1 * (-(x - 1.0).powi(2) * 4.0).exp()).unwrap();
    let a = dissipation(&g).unwrap();
    let b = dissipation_swapped(&g).unwrap();
    assert!(a > 0.0);
    assert!((a - b).abs() < 1e-12 * a, "{a} vs {b}");
}

#[test]
fn exterior_tail_matches_quadrature() {
    let (a, u0) = (0.2, 1.5);
    let spec = QuadratureSpec::default();
    // substitute u = u0 / s to map [u0, ∞) onto (0, 1]
    let v = crate::quadrature::integrate(|s: f64| if s == 0.0 { 0.0 } else { (a * s / u0).powi(2).ln_1p() * u0 / (s * s) }, 0.0, 1.0, &spec).unwrap().value;
    assert!((log_tail(a, u0) - v).abs() < 1e-10, "{} vs {v}", log_tail(a, u0));
    assert_eq!(log_tail(a, 0.0), PI * a);
}

fn synthetic(n: usize, rate: f64) -> PeriodicField {
    PeriodicField::from_fn(grid(n), |x| (1..n as i64 / 2).map(|k| 2.0 * (-rate * k as f64).exp() * (k as f64 * x + 0.3 * k as f64).cos()).sum())
}

#[test]
fn strip_width_of_exponential_decay() {
    let w = strip_width(&synthetic(128, 0.5)).unwrap();
    assert!((w - 0.5).abs() < 0.01, "{w}");
    // away from the roundoff floor, scaling leaves the fit unchanged
    let w = strip_width(&synthetic(64, 0.5)).unwrap();
    let scaled = synthetic(64, 0.5).scale(-7.0);
    assert!((strip_width(&scaled).unwrap() - w).abs() < 1e-9);
}

#[test]
fn strip_width_of_trig_polynomial_is_unbounded() {
    let f = PeriodicField::from_fn(grid(64), |x| x.sin() + 0.2 * (3.0 * x).cos());
    assert_eq!(strip_width(&f).unwrap(), f64::INFINITY);
    assert!(matches!(strip_width(&PeriodicField::from_fn(grid(16), |x| x.sin())), Err(DiagnosticsError::InsufficientResolution { .. })));
}

#[test]
fn strip_trend_report() {
    assert!(strip_width_trend(&[0.0, 0.1, 0.2], &[0.1, 0.2, 0.3], 0.05).passed);
    assert!(!strip_width_trend(&[0.0, 0.1, 0.2], &[0.1, 0.2, 0.15], 0.05).passed);
}
