//! Dormand–Prince 5(4) steps with embedded error control.

use serde::{Deserialize, Serialize};

use crate::error::EvolveError;

/// Step-size control settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StepController {
    pub rtol: f64,
    pub atol: f64,
    pub dt_init: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub safety: f64,
    pub max_rejects_per_step: usize,
}

impl Default for StepController {
    fn default() -> Self {
        Self { rtol: 1e-8, atol: 1e-10, dt_init: 1e-6, dt_min: 1e-12, dt_max: 1e-2, safety: 0.9, max_rejects_per_step: 20 }
    }
}

impl StepController {
    pub fn validate(&self) -> Result<(), EvolveError> {
        let bad = |m: &str| Err(EvolveError::InvalidController(m.to_string()));
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return bad("rtol and atol must be positive");
        }
        if !(self.dt_min > 0.0 && self.dt_min < self.dt_init && self.dt_init <= self.dt_max) {
            return bad("need 0 < dt_min < dt_init <= dt_max");
        }
        if !(self.safety > 0.0 && self.safety < 1.0) {
            return bad("safety must lie in (0, 1)");
        }
        if self.max_rejects_per_step == 0 {
            return bad("max_rejects_per_step must be at least 1");
        }
        Ok(())
    }
}

/// Result of one attempted step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    /// new state when accepted, the old one otherwise
    pub y: Vec<f64>,
    pub t: f64,
    pub dt_next: f64,
    pub accepted: bool,
    /// scaled error; the step is accepted when it is at most 1
    pub err: f64,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// fifth-order weights (equal to the last row of `A`)
const B: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
/// fifth minus fourth order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

/// One Dormand–Prince 5(4) step of `y' = rhs(t, y)` from `(t, y)` with step `dt`.
///
/// The error is measured as `max_i |e_i| / (atol + rtol max(|y_i|, |y_new_i|))`.
/// Errors from `rhs` are passed through untouched.
pub fn dopri54_step<E, F>(mut rhs: F, y: &[f64], t: f64, dt: f64, ctrl: &StepController) -> Result<StepOutcome, E>
where
    F: FnMut(f64, &[f64]) -> Result<Vec<f64>, E>,
{
    debug_assert!(dt > 0.0);
    let n = y.len();
    let mut k: Vec<Vec<f64>> = Vec::with_capacity(7);
    let mut stage = vec![0.0; n];
    for s in 0..7 {
        stage.copy_from_slice(y);
        for (j, kj) in k.iter().enumerate() {
            let a = A[s][j];
            if a != 0.0 {
                for (x, d) in stage.iter_mut().zip(kj) {
                    *x += dt * a * d;
                }
            }
        }
        k.push(rhs(t + C[s] * dt, &stage)?);
    }
    // the last stage was evaluated at the fifth-order solution
    let y_new = stage;
    let mut err = 0.0f64;
    for i in 0..n {
        let e: f64 = dt * (0..7).map(|s| E[s] * k[s][i]).sum::<f64>();
        let scale = ctrl.atol + ctrl.rtol * y[i].abs().max(y_new[i].abs());
        err = err.max(e.abs() / scale);
    }
    debug_assert!(B.iter().zip(&A[6]).all(|(b, a)| b == a) && B[6] == 0.0);
    if !err.is_finite() {
        return Ok(StepOutcome { y: y.to_vec(), t, dt_next: dt * MIN_FACTOR, accepted: false, err });
    }
    let accepted = err <= 1.0;
    let mut factor = if err == 0.0 { MAX_FACTOR } else { (ctrl.safety * err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR) };
    if !accepted {
        factor = factor.min(1.0);
    }
    let dt_next = (dt * factor).min(ctrl.dt_max);
    if accepted {
        Ok(StepOutcome { y: y_new, t: t + dt, dt_next, accepted, err })
    } else {
        Ok(StepOutcome { y: y.to_vec(), t, dt_next, accepted, err })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::convert::Infallible;

    fn decay(_: f64, y: &[f64]) -> Result<Vec<f64>, Infallible> {
        Ok(y.iter().map(|v| -v).collect())
    }

    #[test]
    fn one_step_of_exponential_decay() {
        let r = dopri54_step(decay, &[1.0], 0.0, 0.1, &StepController::default()).unwrap();
        assert!(r.accepted);
        assert!((r.y[0] - (-0.1f64).exp()).abs() < 1e-8);
        assert_eq!(r.t, 0.1);
    }

    #[test]
    fn zero_rhs_is_accepted_unchanged() {
        let r = dopri54_step(|_, y: &[f64]| Ok::<_, Infallible>(vec![0.0; y.len()]), &[0.5, -2.0], 1.0, 0.01, &StepController::default()).unwrap();
        assert!(r.accepted);
        assert_eq!(r.err, 0.0);
        assert_eq!(r.y, vec![0.5, -2.0]);
    }

    #[test]
    fn stiff_step_is_rejected_and_shrinks() {
        let ctrl = StepController::default();
        let r = dopri54_step(|_, y: &[f64]| Ok::<_, Infallible>(vec![-1e4 * y[0]]), &[1.0], 0.0, 0.01, &ctrl).unwrap();
        assert!(!r.accepted);
        assert!(r.dt_next < 0.01);
        assert_eq!(r.y, vec![1.0]);
    }

    #[test]
    fn fifth_order_convergence() {
        let ctrl = StepController { rtol: 1.0, atol: 1.0, dt_max: 1.0, ..Default::default() };
        let err = |dt: f64| {
            let mut y = vec![1.0];
            let steps = (1.0 / dt).round() as usize;
            for i in 0..steps {
                y = dopri54_step(decay, &y, i as f64 * dt, dt, &ctrl).unwrap().y;
            }
            (y[0] - (-1.0f64).exp()).abs()
        };
        let e: Vec<f64> = [0.1, 0.05, 0.025].iter().map(|&h| err(h)).collect();
        for w in e.windows(2) {
            let slope = (w[0] / w[1]).log2();
            assert!((slope - 5.0).abs() < 0.3, "slope {slope}");
        }
    }

    #[test]
    fn controller_validation() {
        assert!(StepController::default().validate().is_ok());
        assert!(StepController { safety: 1.0, ..Default::default() }.validate().is_err());
        assert!(StepController { dt_min: 1.0, ..Default::default() }.validate().is_err());
        assert!(StepController { atol: 0.0, ..Default::default() }.validate().is_err());
    }
}
