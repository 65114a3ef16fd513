//! Graphs on the real line, truncated to `[-L, L]`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::kernel::{integrate_nodes, Angle, Sources};
use super::kernels::RealLine;
use crate::error::{CurveError, DynamicsError};
use crate::evolve::spline::PeriodicSpline;
use crate::quadrature::QuadratureSpec;

/// Samples of a flat-at-infinity graph on the uniform nodes
/// `x_i = -L + 2L i / n`, `i = 0..n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealLineGraph {
    half_width: f64,
    values: Vec<f64>,
}

impl RealLineGraph {
    pub fn new(half_width: f64, values: Vec<f64>) -> Result<Self, CurveError> {
        if values.len() < 8 {
            return Err(CurveError::TooFewNodes { min: 8, got: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(CurveError::NonFinite(i));
        }
        assert!(half_width > 0.0, "half width must be positive");
        Ok(Self { half_width, values })
    }

    pub fn from_fn(half_width: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self, CurveError> {
        let values = (0..n).map(|i| f(Self::node_at(half_width, n, i))).collect();
        Self::new(half_width, values)
    }

    fn node_at(l: f64, n: usize, i: usize) -> f64 {
        -l + 2.0 * l * i as f64 / n as f64
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.values.len() as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len()).map(|i| Self::node_at(self.half_width, self.len(), i)).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn with_values(&self, values: Vec<f64>) -> Result<Self, CurveError> {
        Self::new(self.half_width, values)
    }

    /// Spline of the samples; the data vanish at both ends, so the periodic
    /// closure over `[-L, L]` is harmless.
    pub fn spline(&self) -> Result<PeriodicSpline, CurveError> {
        PeriodicSpline::new(self.nodes(), self.values.clone(), 2.0 * self.half_width)
    }

    /// `‖f‖²_{L²}` (trapezoid; the samples vanish at the ends).
    pub fn l2_norm_sq(&self) -> f64 {
        self.spacing() * self.values.iter().map(|v| v * v).sum::<f64>()
    }
}

/// Largest `|f|` or `|f'|` on `|x| > L/2`; flat-tail data need this below `1e-8`.
pub fn truncation_residual(graph: &RealLineGraph) -> Result<f64, CurveError> {
    let s = graph.spline()?;
    let l = graph.half_width();
    let d = s.node_derivatives();
    Ok(graph
        .nodes()
        .iter()
        .zip(graph.values())
        .zip(&d)
        .filter(|((x, _), _)| x.abs() > 0.5 * l)
        .map(|((_, v), dv)| v.abs().max(dv.abs()))
        .fold(0.0, f64::max))
}

/// `f_t` of the real-line graph equation on the truncated domain, with the
/// contribution of the flat exterior added in closed form:
/// `∫_{|x|>L} (α - x) f'(α) / ((α - x)² + f(α)²) dx = ½ f'(α) ln(((α-L)² + f²) / ((α+L)² + f²))`.
pub fn graph_rhs_realline(graph: &RealLineGraph, delta_rho: f64, spec: &QuadratureSpec) -> Result<Vec<f64>, DynamicsError> {
    spec.validate()?;
    let pre = delta_rho / (2.0 * PI);
    if pre == 0.0 || graph.values().iter().all(|&v| v == 0.0) {
        return Ok(vec![0.0; graph.len()]);
    }
    let spl = graph.spline()?;
    let d = spl.node_derivatives();
    let src = Sources::new(vec![spl], Angle::None);
    let inner = integrate_nodes(&RealLine, &src, false, spec)?;
    let l = graph.half_width();
    let out = graph
        .nodes()
        .iter()
        .zip(graph.values())
        .zip(&d)
        .zip(inner)
        .map(|(((&x, &f), &df), [v])| {
            // hypot keeps the log finite when f² underflows at the ends
            let tail = if df == 0.0 { 0.0 } else { df * ((x - l).hypot(f).ln() - (x + l).hypot(f).ln()) };
            pre * (v + tail)
        })
        .collect();
    Ok(out)
}
