//! Node redistribution for graph interfaces.
//!
//! Nodes equidistribute the monitor
//! `m(α) = sqrt(1 + f'²)(1 + c_κ |κ|)` (summed over the interfaces of a
//! state), blended with its mean so that at least half the nodes stay spread
//! out. The node count grows when the monitor peaks sharply.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::spline::PeriodicSpline;
use crate::curve::{GraphInterface, PeriodicField, PeriodicGrid};
use crate::dynamics::TwoPhaseState;
use crate::error::EvolveError;

/// Sub-cells per current cell when integrating the monitor.
const SUBDIV: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RedistributionPolicy {
    /// redistribute after every accepted step (otherwise only when cells are unbalanced)
    pub every_step: bool,
    pub curvature_weight: f64,
    pub growth_factor: f64,
    /// grow when peak/median of the monitor exceeds this times `n / base_nodes`
    pub peak_ratio: f64,
    /// node count the growth threshold is measured against (0: the initial count)
    pub base_nodes: usize,
    /// upper bound on the node count (0: twice the base)
    pub max_nodes: usize,
}

impl Default for RedistributionPolicy {
    fn default() -> Self {
        Self { every_step: true, curvature_weight: 1.0, growth_factor: 1.5, peak_ratio: 10.0, base_nodes: 0, max_nodes: 0 }
    }
}

impl RedistributionPolicy {
    /// Fill in the defaults that depend on the initial node count.
    pub fn for_nodes(mut self, n: usize) -> Self {
        if self.base_nodes == 0 {
            self.base_nodes = n;
        }
        if self.max_nodes == 0 {
            self.max_nodes = 2 * self.base_nodes;
        }
        self
    }
}

fn monitor_at(s: &PeriodicSpline, x: f64, c_kappa: f64) -> f64 {
    let d = s.deriv(x);
    let dd = s.second(x);
    let q = 1.0 + d * d;
    let kappa = dd / (q * q.sqrt());
    q.sqrt() * (1.0 + c_kappa * kappa.abs())
}

/// Fine sample points covering one period (current nodes subdivided) and the
/// monitor summed over `splines` at each.
fn sample_monitor(grid: &PeriodicGrid, splines: &[PeriodicSpline], c_kappa: f64) -> Result<(Vec<f64>, Vec<f64>), EvolveError> {
    let a = grid.alphas();
    let n = a.len();
    let mut xs = Vec::with_capacity(n * SUBDIV + 1);
    for i in 0..n {
        let b = if i + 1 < n { a[i + 1] } else { a[0] + 2.0 * PI };
        for k in 0..SUBDIV {
            xs.push(a[i] + (b - a[i]) * k as f64 / SUBDIV as f64);
        }
    }
    xs.push(a[0] + 2.0 * PI);
    let mut ms = Vec::with_capacity(xs.len());
    for &x in &xs {
        let m: f64 = splines.iter().map(|s| monitor_at(s, x, c_kappa)).sum();
        if !m.is_finite() {
            return Err(EvolveError::MonitorNonFinite { alpha: x });
        }
        ms.push(m);
    }
    Ok((xs, ms))
}

fn median(v: &[f64]) -> f64 {
    let mut w = v.to_vec();
    w.sort_by(|a, b| a.total_cmp(b));
    w[w.len() / 2]
}

/// New node positions for the fields, or `None` when the current grid is kept.
fn new_nodes(grid: &PeriodicGrid, splines: &[PeriodicSpline], policy: &RedistributionPolicy) -> Result<Option<Vec<f64>>, EvolveError> {
    let policy = policy.for_nodes(grid.len());
    let (xs, ms) = sample_monitor(grid, splines, policy.curvature_weight)?;
    let n = grid.len();

    let peak = ms.iter().cloned().fold(0.0, f64::max);
    let ratio = peak / median(&ms);
    let threshold = policy.peak_ratio * n as f64 / policy.base_nodes as f64;
    let grown = ((n as f64 * policy.growth_factor).round() as usize).min(policy.max_nodes);
    let n_new = if ratio > threshold && grown > n { grown } else { n };

    // cumulative integral of the blended monitor m + mean(m)
    let mut cum = vec![0.0; xs.len()];
    for i in 1..xs.len() {
        cum[i] = cum[i - 1] + 0.5 * (ms[i] + ms[i - 1]) * (xs[i] - xs[i - 1]);
    }
    let total_m = cum[xs.len() - 1];
    let mean = total_m / (2.0 * PI);
    for (c, x) in cum.iter_mut().zip(&xs) {
        *c += mean * (x - xs[0]);
    }
    let total = cum[xs.len() - 1];

    if n_new == n && !policy.every_step {
        // keep the grid while its cells carry comparable monitor mass
        let masses: Vec<f64> = (0..n).map(|i| cum[(i + 1) * SUBDIV] - cum[i * SUBDIV]).collect();
        let (lo, hi) = masses.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &m| (l.min(m), h.max(m)));
        if hi < 2.0 * lo {
            return Ok(None);
        }
    }

    let mut nodes = Vec::with_capacity(n_new);
    let mut j = 0;
    for i in 0..n_new {
        let target = total * i as f64 / n_new as f64;
        while j + 1 < cum.len() - 1 && cum[j + 1] <= target {
            j += 1;
        }
        let w = (target - cum[j]) / (cum[j + 1] - cum[j]);
        let x = xs[j] + w * (xs[j + 1] - xs[j]);
        nodes.push(PeriodicGrid::wrap(x));
    }
    // wrap can reorder around the seam; the first node sits at the grid's first node
    nodes.sort_by(|a, b| a.total_cmp(b));
    nodes.dedup();

    if n_new == n {
        let h = grid.min_spacing();
        let moved = nodes.iter().zip(grid.alphas()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if nodes.len() == n && moved < 1e-3 * h {
            return Ok(None);
        }
    }
    Ok(Some(nodes))
}

/// Resample through the spline and restore the mean lost to interpolation.
fn resample(s: &PeriodicSpline, grid: &Arc<PeriodicGrid>) -> Result<PeriodicField, EvolveError> {
    let mean = s.integral() / (2.0 * PI);
    let f = PeriodicField::new(grid.clone(), s.resample(grid.alphas()))?;
    let shift = mean - f.mean();
    Ok(f.map(|v| v + shift))
}

/// Redistribute a single graph.
pub fn redistribute_graph(g: &GraphInterface, policy: &RedistributionPolicy) -> Result<GraphInterface, EvolveError> {
    let s = PeriodicSpline::from_field(g.field())?;
    match new_nodes(g.grid(), std::slice::from_ref(&s), policy)? {
        None => Ok(g.clone()),
        Some(nodes) => {
            let grid = Arc::new(PeriodicGrid::from_nodes(nodes)?);
            Ok(GraphInterface::new(resample(&s, &grid)?))
        }
    }
}

/// Redistribute both interfaces of a two-phase state onto one new grid.
pub fn redistribute_two_phase(state: &TwoPhaseState, policy: &RedistributionPolicy) -> Result<TwoPhaseState, EvolveError> {
    let sf = PeriodicSpline::from_field(state.f.field())?;
    let sg = PeriodicSpline::from_field(state.g.field())?;
    match new_nodes(state.grid(), &[sf.clone(), sg.clone()], policy)? {
        None => Ok(state.clone()),
        Some(nodes) => {
            let grid = Arc::new(PeriodicGrid::from_nodes(nodes)?);
            Ok(TwoPhaseState {
                f: GraphInterface::new(resample(&sf, &grid)?),
                g: GraphInterface::new(resample(&sg, &grid)?),
                ..*state
            })
        }
    }
}
