//! Short evolutions compared across discretizations and symmetries.

use std::f64::consts::PI;
use std::sync::Arc;

use muskat_core::curve::{Curve, PeriodicField, PeriodicGrid};
use muskat_core::evolve::{integrate, ContourProblem, GalerkinProblem, IntegrateOptions, StepController};
use muskat_core::quadrature::QuadratureSpec;

const DELTA_RHO: f64 = 4.0 * PI;

fn grid(n: usize) -> Arc<PeriodicGrid> {
    Arc::new(PeriodicGrid::uniform(n).unwrap())
}

fn graph_curve(n: usize, f: impl Fn(f64) -> f64) -> Curve {
    Curve::from_graph(&PeriodicField::from_fn(grid(n), f), DELTA_RHO)
}

fn run<P: muskat_core::evolve::EvolutionProblem<State = Curve>>(p: &P, c: Curve, t_end: f64) -> Curve {
    let opts = IntegrateOptions { t_end, ..Default::default() };
    integrate(p, c, &StepController::default(), &opts, &mut ()).unwrap().final_state
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn galerkin_tracks_collocation_on_smooth_data() {
    let c = graph_curve(64, |a| 0.1 * a.cos() + 0.05 * (2.0 * a).sin());
    let spec = QuadratureSpec::default();
    let colloc = run(&ContourProblem { spec }, c.clone(), 0.01);
    let g = GalerkinProblem { n_modes: 16, spec };
    let gal = run(&g, g.initial(&c).unwrap(), 0.01);
    let d1 = max_diff(colloc.z1_minus_alpha().values(), gal.z1_minus_alpha().values());
    let d2 = max_diff(colloc.z2().values(), gal.z2().values());
    assert!(d1.max(d2) < 1e-6, "z1 {d1:e}, z2 {d2:e}");
    // the motion itself is resolved, not just the initial data
    let moved = max_diff(c.z2().values(), colloc.z2().values());
    assert!(moved > 1e-3, "moved {moved:e}");
}

#[test]
fn even_graphs_stay_even() {
    let n = 64;
    let c = graph_curve(n, |a| 0.2 * a.cos() + 0.1 * (3.0 * a).cos());
    let out = run(&ContourProblem { spec: QuadratureSpec::default() }, c, 0.02);
    // nodes sit at -π + 2πi/n, so α ↦ -α maps node i to node n - i
    let z2 = out.z2().values();
    let z1 = out.z1_minus_alpha().values();
    for i in 1..n / 2 {
        assert!((z2[i] - z2[n - i]).abs() < 1e-10, "z2 node {i}");
        assert!((z1[i] + z1[n - i]).abs() < 1e-10, "z1 node {i}");
    }
}

#[test]
fn flipping_the_graph_flips_the_motion() {
    let f = |a: f64| 0.15 * a.sin() + 0.05 * (2.0 * a).cos();
    let spec = QuadratureSpec::default();
    let up = run(&ContourProblem { spec }, graph_curve(64, f), 0.01);
    let down = run(&ContourProblem { spec }, graph_curve(64, |a| -f(a)), 0.01);
    let neg: Vec<f64> = down.z2().values().iter().map(|v| -v).collect();
    assert!(max_diff(up.z2().values(), &neg) < 1e-10);
}
