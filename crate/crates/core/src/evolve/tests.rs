use std::f64::consts::PI;
use std::sync::Arc;

use super::*;
use crate::curve::{GraphInterface, PeriodicField, PeriodicGrid};
use crate::error::EvolveError;
use crate::quadrature::QuadratureSpec;

/// `y' = λ y`, optionally blowing up like `y' = y²`.
struct Scalar {
    lambda: f64,
    blowup: bool,
}

impl EvolutionProblem for Scalar {
    type State = Vec<f64>;

    fn kind(&self) -> &'static str {
        "scalar"
    }

    fn values(&self, s: &Vec<f64>) -> Vec<f64> {
        s.clone()
    }

    fn with_values(&self, _: &Vec<f64>, y: &[f64]) -> Result<Vec<f64>, EvolveError> {
        Ok(y.to_vec())
    }

    fn rhs(&self, s: &Vec<f64>) -> Result<Vec<f64>, EvolveError> {
        Ok(s.iter().map(|v| if self.blowup { v * v } else { self.lambda * v }).collect())
    }

    fn observe(&self, s: &Vec<f64>) -> Result<Observation, EvolveError> {
        Ok(Observation { nodes: s.len(), ..Default::default() })
    }
}

fn opts(t_end: f64, snaps: &[f64]) -> IntegrateOptions {
    IntegrateOptions { t_end, snapshot_times: snaps.to_vec(), ..Default::default() }
}

#[test]
fn snapshots_land_on_requested_times() {
    let p = Scalar { lambda: -1.0, blowup: false };
    let times = [0.0, 0.1, 0.25, 0.7];
    let tr = integrate(&p, vec![1.0], &StepController::default(), &opts(1.0, &times), &mut ()).unwrap();
    assert_eq!(tr.termination.reason, TerminationReason::ReachedTEnd);
    let got: Vec<f64> = tr.snapshots.iter().map(|s| s.t).collect();
    assert_eq!(got, times);
    for s in &tr.snapshots {
        assert!((s.state[0] - (-s.t).exp()).abs() < 1e-8);
    }
    assert!((tr.final_state[0] - (-1.0f64).exp()).abs() < 1e-8);
}

#[test]
fn backward_runs_negate_the_right_hand_side() {
    let p = Scalar { lambda: -1.0, blowup: false };
    let o = IntegrateOptions { direction: Direction::Backward, ..opts(0.5, &[0.5]) };
    let tr = integrate(&p, vec![1.0], &StepController::default(), &o, &mut ()).unwrap();
    assert!((tr.snapshots[0].state[0] - 0.5f64.exp()).abs() < 1e-8);
}

#[test]
fn blowup_collapses_the_step() {
    let p = Scalar { lambda: 0.0, blowup: true };
    let tr = integrate(&p, vec![1.0], &StepController::default(), &opts(2.0, &[]), &mut ()).unwrap();
    assert_eq!(tr.termination.reason, TerminationReason::StepCollapse);
    assert!((tr.termination.t - 1.0).abs() < 1e-6, "{:?}", tr.termination);
}

#[test]
fn resume_reproduces_an_unbroken_run() {
    struct Keep(Vec<Checkpoint<Vec<f64>>>);
    impl Observer<Vec<f64>> for Keep {
        fn checkpoint(&mut self, c: &Checkpoint<Vec<f64>>) {
            self.0.push(c.clone());
        }
    }
    let p = Scalar { lambda: -3.0, blowup: false };
    let o = opts(1.0, &[0.2, 0.5, 0.9]);
    let ctrl = StepController::default();
    let mut keep = Keep(Vec::new());
    let full = integrate(&p, vec![2.0], &ctrl, &o, &mut keep).unwrap();
    let mid = keep.0[keep.0.len() / 2].clone();
    let rest = resume(&p, mid, &ctrl, &o, &mut ()).unwrap();
    let tail = &full.snapshots[full.snapshots.len() - rest.snapshots.len()..];
    assert_eq!(tail, &rest.snapshots[..]);
    assert_eq!(full.final_state, rest.final_state);
}

#[test]
fn bad_snapshot_times_are_rejected() {
    let p = Scalar { lambda: -1.0, blowup: false };
    let c = StepController::default();
    assert!(integrate(&p, vec![1.0], &c, &opts(1.0, &[0.5, 0.2]), &mut ()).is_err());
    assert!(integrate(&p, vec![1.0], &c, &opts(1.0, &[2.0]), &mut ()).is_err());
}

fn cosine(n: usize, eps: f64, k: f64) -> GraphInterface {
    GraphInterface::new(PeriodicField::from_fn(Arc::new(PeriodicGrid::uniform(n).unwrap()), |a| eps * (k * a).cos()))
}

#[test]
fn flat_graph_stays_put() {
    let g = cosine(64, 0.0, 1.0);
    let p = PeriodicGraphProblem::new(1.0, QuadratureSpec::default(), Some(RedistributionPolicy::default()), &g);
    let tr = integrate(&p, g.clone(), &StepController::default(), &opts(0.01, &[0.0, 0.01]), &mut ()).unwrap();
    assert_eq!(tr.termination.reason, TerminationReason::ReachedTEnd);
    assert_eq!(tr.final_state.values(), g.values());
}

#[test]
fn small_cosine_decays_exponentially() {
    let eps = 1e-3;
    let g = cosine(64, eps, 2.0);
    let p = PeriodicGraphProblem::new(1.0, QuadratureSpec::default(), None, &g);
    let tr = integrate(&p, g, &StepController::default(), &opts(0.05, &[0.05]), &mut ()).unwrap();
    let amp = tr.snapshots[0].state.field().spectrum().unwrap().coeff(2).norm() * 2.0;
    let expect = eps * (-2.0 * PI * 2.0 * 0.05f64).exp();
    assert!((amp - expect).abs() < 1e-2 * expect, "{amp} vs {expect}");
}
