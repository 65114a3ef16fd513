//! Checks of qualitative behaviour along computed trajectories: maximum
//! principle, the L² decay identity on the real line, and the width of the
//! analyticity strip from Fourier decay.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::curve::{GraphInterface, PeriodicField};
use crate::dynamics::RealLineGraph;
use crate::error::DiagnosticsError;
use crate::evolve::Snapshot;

/// Relative amplitude below which Fourier modes count as roundoff.
pub const AMPLITUDE_FLOOR: f64 = 1e-13;
/// Fewest modes above the floor needed for a decay fit.
pub const MIN_RESOLVED_MODES: usize = 8;
/// Tolerance on the growth of the maximum norm between snapshots, relative
/// to its initial value.
pub const MAX_PRINCIPLE_TOL: f64 = 1e-8;
/// Bound on the relative residual of the L² identity.
pub const L2_RESIDUAL_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticReport {
    pub name: String,
    pub passed: bool,
    pub observed: f64,
    /// the expected value or bound, in words
    pub expected: String,
    pub tolerance: f64,
    /// further reported quantities that are not asserted
    #[serde(default)]
    pub metrics: BTreeMap<String, f64>,
}

/// Node values of a graph.
pub trait GraphSamples {
    fn samples(&self) -> &[f64];
}

impl GraphSamples for GraphInterface {
    fn samples(&self) -> &[f64] {
        self.values()
    }
}

impl GraphSamples for RealLineGraph {
    fn samples(&self) -> &[f64] {
        self.values()
    }
}

impl GraphSamples for PeriodicField {
    fn samples(&self) -> &[f64] {
        self.values()
    }
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Least-squares slope of `y` against `x`.
fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// `‖f‖_∞` must not grow between snapshots; the decay rate `C` of
/// `‖f‖_∞ ~ e^{-Ct}` is fitted and reported.
pub fn max_principle_report<S: GraphSamples>(snapshots: &[Snapshot<S>]) -> Result<DiagnosticReport, DiagnosticsError> {
    if snapshots.is_empty() {
        return Err(DiagnosticsError::EmptyTrajectory);
    }
    let norms: Vec<f64> = snapshots.iter().map(|s| max_norm(s.state.samples())).collect();
    let scale = norms[0].max(f64::MIN_POSITIVE);
    let growth = norms.windows(2).map(|w| (w[1] - w[0]) / scale).fold(f64::NEG_INFINITY, f64::max);
    let growth = if growth.is_finite() { growth } else { 0.0 };
    let (ts, logs): (Vec<f64>, Vec<f64>) = snapshots.iter().zip(&norms).filter(|(_, &m)| m > 0.0).map(|(s, m)| (s.t, m.ln())).unzip();
    let rate = if ts.len() >= 2 { -slope(&ts, &logs) } else { 0.0 };
    Ok(DiagnosticReport {
        name: "max-principle".into(),
        passed: growth <= MAX_PRINCIPLE_TOL,
        observed: growth,
        expected: "relative growth of the max norm between snapshots <= 0".into(),
        tolerance: MAX_PRINCIPLE_TOL,
        metrics: BTreeMap::from([("decay_rate".to_string(), rate), ("initial_max_norm".to_string(), norms[0]), ("final_max_norm".to_string(), *norms.last().unwrap())]),
    })
}

/// `∫ ln(1 + a²/u²) du` from `u0 > 0` to infinity.
fn log_tail(a: f64, u0: f64) -> f64 {
    let a = a.abs();
    if a == 0.0 {
        return 0.0;
    }
    if u0 <= 0.0 {
        return PI * a;
    }
    // antiderivative u ln(1 + a²/u²) + 2a atan(u/a), which tends to πa
    PI * a - (u0 * (a / u0).powi(2).ln_1p() + 2.0 * a * (u0 / a).atan())
}

fn dissipation_impl(g: &RealLineGraph, swap: bool) -> Result<f64, DiagnosticsError> {
    let x = g.nodes();
    let f = g.values();
    let d = g.spline()?.node_derivatives();
    let h = g.spacing();
    let l = g.half_width();
    let n = x.len();
    let term = |i: usize, j: usize| {
        if i == j {
            d[i].powi(2).ln_1p()
        } else {
            ((f[i] - f[j]) / (x[i] - x[j])).powi(2).ln_1p()
        }
    };
    let mut inner = 0.0;
    for i in 0..n {
        for j in 0..n {
            inner += if swap { term(j, i) } else { term(i, j) };
        }
    }
    // one variable outside [-L, L] where f = 0; both outside contributes nothing
    let tails: f64 = (0..n).map(|i| log_tail(f[i], l - x[i]) + log_tail(f[i], l + x[i])).sum();
    Ok(h * h * inner + 2.0 * h * tails)
}

/// `∫∫ ln(1 + ((f(x) − f(α))/(x − α))²) dx dα` over the whole plane, with
/// `f = 0` outside the truncated domain.
pub fn dissipation(g: &RealLineGraph) -> Result<f64, DiagnosticsError> {
    dissipation_impl(g, false)
}

/// [`dissipation`] with the roles of `x` and `α` exchanged.
pub fn dissipation_swapped(g: &RealLineGraph) -> Result<f64, DiagnosticsError> {
    dissipation_impl(g, true)
}

/// Relative residual of
/// `‖f‖²(t) + (Δρ/2π) ∫₀^t D(s) ds = ‖f₀‖²`, `D` the [`dissipation`],
/// maximised over the snapshots (time integral by trapezoid).
pub fn l2_decay_residual(snapshots: &[Snapshot<RealLineGraph>], delta_rho: f64) -> Result<DiagnosticReport, DiagnosticsError> {
    if snapshots.is_empty() {
        return Err(DiagnosticsError::EmptyTrajectory);
    }
    let pre = delta_rho / (2.0 * PI);
    let norms: Vec<f64> = snapshots.iter().map(|s| s.state.l2_norm_sq()).collect();
    let diss = snapshots.iter().map(|s| dissipation(&s.state)).collect::<Result<Vec<_>, _>>()?;
    let n0 = norms[0];
    let mut acc = 0.0;
    let mut worst = 0.0f64;
    for i in 0..snapshots.len() {
        if i > 0 {
            acc += 0.5 * (diss[i] + diss[i - 1]) * (snapshots[i].t - snapshots[i - 1].t);
        }
        let r = norms[i] + pre * acc - n0;
        worst = worst.max(r.abs());
    }
    let residual = if n0 > 0.0 { worst / n0 } else { worst };
    Ok(DiagnosticReport {
        name: "l2-decay-identity".into(),
        passed: residual < L2_RESIDUAL_TOL,
        observed: residual,
        expected: "||f||^2(t) + (delta_rho/2pi) int D = ||f0||^2".into(),
        tolerance: L2_RESIDUAL_TOL,
        metrics: BTreeMap::from([
            ("initial_norm_sq".to_string(), n0),
            ("final_norm_sq".to_string(), *norms.last().unwrap()),
            ("dissipated".to_string(), pre * acc),
        ]),
    })
}

/// Exponential decay rate of the Fourier amplitudes, the half-width of the
/// strip of analyticity. Fields whose spectrum drops below the floor within
/// a handful of modes (trigonometric polynomials, constants) report
/// `f64::INFINITY`.
pub fn strip_width(field: &PeriodicField) -> Result<f64, DiagnosticsError> {
    let n = field.len();
    let k_max = (n - 1) / 2;
    if k_max < MIN_RESOLVED_MODES {
        return Err(DiagnosticsError::InsufficientResolution { resolved: k_max, required: MIN_RESOLVED_MODES });
    }
    let spec = field.spectrum()?;
    let amps: Vec<f64> = (1..=k_max as i64).map(|k| spec.coeff(k).norm()).collect();
    let top = amps.iter().cloned().fold(0.0, f64::max);
    if top == 0.0 {
        return Ok(f64::INFINITY);
    }
    let (ks, logs): (Vec<f64>, Vec<f64>) = amps
        .iter()
        .enumerate()
        .filter(|(_, &a)| a > AMPLITUDE_FLOOR * top)
        .map(|(j, a)| ((j + 1) as f64, a.ln()))
        .unzip();
    if ks.len() < MIN_RESOLVED_MODES {
        return Ok(f64::INFINITY);
    }
    Ok((-slope(&ks, &logs)).max(0.0))
}

/// Strip widths must not shrink by more than `rel_tol` from one snapshot
/// to the next.
pub fn strip_width_trend(times: &[f64], widths: &[f64], rel_tol: f64) -> DiagnosticReport {
    let worst = widths
        .windows(2)
        .filter(|w| w[0].is_finite())
        .map(|w| (w[0] - w[1]) / w[0].abs().max(f64::MIN_POSITIVE))
        .fold(0.0f64, f64::max);
    let mut metrics = BTreeMap::new();
    if let (Some(a), Some(b)) = (widths.first(), widths.last()) {
        metrics.insert("first_width".to_string(), *a);
        metrics.insert("last_width".to_string(), *b);
    }
    if let Some(t) = times.last() {
        metrics.insert("last_time".to_string(), *t);
    }
    DiagnosticReport {
        name: "strip-width-trend".into(),
        passed: worst <= rel_tol,
        observed: worst,
        expected: "strip width nondecreasing between snapshots".into(),
        tolerance: rel_tol,
        metrics,
    }
}

#[cfg(test)]
mod tests;
