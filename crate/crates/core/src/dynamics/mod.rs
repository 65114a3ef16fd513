//! Velocity (right-hand side) assembly for the evolution problems.
//!
//! All periodic integrals are evaluated on the periodic cubic spline of the
//! current samples, one adaptive integral per node, in parallel over nodes.

mod kernel;
mod kernels;
mod realline;

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use realline::{graph_rhs_realline, truncation_residual, RealLineGraph};

use crate::curve::{Curve, GraphInterface, PeriodicField, PeriodicGrid};
use crate::error::{CurveError, DynamicsError, QuadratureError};
use crate::evolve::spline::PeriodicSpline;
use crate::quadrature::QuadratureSpec;
use kernel::{integrate_nodes, integrate_regular, integrate_target, Angle, Point, Sources};
use kernels::{Contour, CrossPotential, Interaction, SlopeOfV1};

/// Separation below which two interfaces are considered to touch.
pub const TOUCH_DISTANCE: f64 = 2e-7;

/// Relative size of `∂_α z₁` below which a tangent counts as vertical.
pub const VERTICAL_TANGENT: f64 = 1e-6;

/// Separation below which an approach warning is raised.
pub const APPROACH_WARNING: f64 = 1e-3;

/// Two graphs `f` above `g` on a shared grid, with the coefficients
/// `ρ̄_j = (ρ_{j+1} - ρ_j) / 4π`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoPhaseState {
    pub f: GraphInterface,
    pub g: GraphInterface,
    pub rho_bar_1: f64,
    pub rho_bar_2: f64,
}

impl TwoPhaseState {
    pub fn new(f: GraphInterface, g: GraphInterface, rho_bar_1: f64, rho_bar_2: f64) -> Result<Self, DynamicsError> {
        if f.grid() != g.grid() {
            return Err(DynamicsError::GridMismatch);
        }
        let me = Self { f, g, rho_bar_1, rho_bar_2 };
        let (sep, alpha) = me.min_separation();
        if sep <= 0.0 {
            return Err(DynamicsError::InvalidState(format!("f must lie above g (f - g = {sep:e} at alpha = {alpha})")));
        }
        Ok(me)
    }

    pub fn grid(&self) -> &PeriodicGrid {
        self.f.grid()
    }

    /// `min (f - g)` over the nodes and where it is attained.
    pub fn min_separation(&self) -> (f64, f64) {
        let alphas = self.f.grid().alphas();
        self.f
            .values()
            .iter()
            .zip(self.g.values())
            .zip(alphas)
            .map(|((a, b), x)| (a - b, *x))
            .fold((f64::INFINITY, 0.0), |best, cur| if cur.0 < best.0 { cur } else { best })
    }
}

fn spline(field: &PeriodicField) -> Result<PeriodicSpline, CurveError> {
    PeriodicSpline::from_field(field)
}

fn graph_sources(field: &PeriodicField) -> Result<Sources, CurveError> {
    Ok(Sources::new(vec![spline(field)?], Angle::Abscissa))
}

fn node_points(src: &Sources) -> Vec<Point> {
    (0..src.len()).map(|i| src.node_target(i).0).collect()
}

fn to_field(grid: &Arc<PeriodicGrid>, values: Vec<f64>) -> Result<PeriodicField, DynamicsError> {
    PeriodicField::new(grid.clone(), values).map_err(|e| match e {
        CurveError::NonFinite(i) => DynamicsError::Quadrature(QuadratureError::NonFinite { at: grid.alphas()[i] }),
        other => other.into(),
    })
}

fn near_touching(u: &PeriodicField, v: &PeriodicField) -> DynamicsError {
    let (sep, alpha) = u
        .values()
        .iter()
        .zip(v.values())
        .zip(u.grid().alphas())
        .map(|((a, b), x)| ((a - b).abs(), *x))
        .fold((f64::INFINITY, 0.0), |best, cur| if cur.0 < best.0 { cur } else { best });
    DynamicsError::NearTouching { min_separation: sep, alpha }
}

fn self_interaction(src: &Sources, spec: &QuadratureSpec) -> Result<Vec<f64>, QuadratureError> {
    Ok(integrate_nodes(&Interaction, src, true, spec)?.into_iter().map(|[v]| v).collect())
}

fn cross_interaction(targets: &[Point], src: &Sources, spec: &QuadratureSpec) -> Result<Vec<f64>, QuadratureError> {
    Ok(integrate_regular(&Interaction, src, targets, spec)?.into_iter().map(|[v]| v).collect())
}

/// `I[u, v]` at the nodes of the shared grid for separated graphs, as the
/// spline derivative of the interaction potential. The derivative of a
/// periodic spline has zero mean on a uniform grid, so the cross terms
/// conserve the grid means of both interfaces exactly.
/// `sign` is the sign of `u - v`.
fn cross_flux(u: &Sources, v: &Sources, sign: f64, spec: &QuadratureSpec) -> Result<Vec<f64>, QuadratureError> {
    let phi: Vec<f64> = integrate_regular(&CrossPotential { sign }, v, &node_points(u), spec)?.into_iter().map(|[p]| p).collect();
    if let Some(i) = phi.iter().position(|p| !p.is_finite()) {
        return Err(QuadratureError::NonFinite { at: u.spline(0).nodes()[i] });
    }
    let nodes = u.spline(0).nodes().to_vec();
    let spl = PeriodicSpline::new(nodes, phi, 2.0 * PI).map_err(|_| QuadratureError::NonFinite { at: 0.0 })?;
    Ok(spl.node_derivatives())
}

/// `I[u, v](α)` at every node of the (shared) grid.
pub fn interaction_rhs(u: &GraphInterface, v: &GraphInterface, spec: &QuadratureSpec) -> Result<PeriodicField, DynamicsError> {
    spec.validate()?;
    if u.grid() != v.grid() {
        return Err(DynamicsError::GridMismatch);
    }
    let grid = u.field().grid_arc();
    let values = if u.values() == v.values() {
        self_interaction(&graph_sources(u.field())?, spec)?
    } else {
        let targets = node_points(&graph_sources(u.field())?);
        let src = graph_sources(v.field())?;
        match cross_interaction(&targets, &src, spec) {
            Err(QuadratureError::NonFinite { .. }) => return Err(near_touching(u.field(), v.field())),
            r => r?,
        }
    };
    to_field(grid, values)
}

/// `(f_t, g_t)` of the two-interface system.
pub fn two_phase_rhs(state: &TwoPhaseState, spec: &QuadratureSpec) -> Result<(PeriodicField, PeriodicField), DynamicsError> {
    spec.validate()?;
    if state.f.grid() != state.g.grid() {
        return Err(DynamicsError::GridMismatch);
    }
    let (sep, alpha) = state.min_separation();
    if sep < TOUCH_DISTANCE {
        return Err(DynamicsError::NearTouching { min_separation: sep, alpha });
    }
    let grid = state.f.field().grid_arc();
    let n = grid.len();
    let (r1, r2) = (state.rho_bar_1, state.rho_bar_2);
    let sf = graph_sources(state.f.field())?;
    let sg = graph_sources(state.g.field())?;
    let touching = |e: QuadratureError| match e {
        QuadratureError::NonFinite { .. } => near_touching(state.f.field(), state.g.field()),
        other => other.into(),
    };

    let mut ft = vec![0.0; n];
    let mut gt = vec![0.0; n];
    if r1 != 0.0 {
        let ff = self_interaction(&sf, spec)?;
        let gf = cross_flux(&sg, &sf, -1.0, spec).map_err(touching)?;
        for i in 0..n {
            ft[i] += r1 * ff[i];
            gt[i] += r1 * gf[i];
        }
    }
    if r2 != 0.0 {
        let gg = self_interaction(&sg, spec)?;
        let fg = cross_flux(&sf, &sg, 1.0, spec).map_err(touching)?;
        for i in 0..n {
            ft[i] += r2 * fg[i];
            gt[i] += r2 * gg[i];
        }
    }
    Ok((to_field(grid, ft)?, to_field(grid, gt)?))
}

/// Single periodic graph: `f_t = ρ̄ I[f, f]`.
pub fn periodic_graph_rhs(f: &GraphInterface, rho_bar: f64, spec: &QuadratureSpec) -> Result<PeriodicField, DynamicsError> {
    spec.validate()?;
    let grid = f.field().grid_arc();
    if rho_bar == 0.0 {
        return Ok(PeriodicField::constant(grid.clone(), 0.0));
    }
    let v = self_interaction(&graph_sources(f.field())?, spec)?;
    to_field(grid, v.into_iter().map(|x| rho_bar * x).collect())
}

fn contour_sources(curve: &Curve) -> Result<Sources, CurveError> {
    Ok(Sources::new(vec![spline(curve.z1_minus_alpha())?, spline(curve.z2())?], Angle::Shifted))
}

/// Replace an overflowing integrand by the arc-chord diagnosis it stands for.
fn arc_chord_or(curve: &Curve, e: QuadratureError) -> DynamicsError {
    if let QuadratureError::NonFinite { .. } = e {
        if let Err(ac) = crate::curve::arc_chord_constant(curve) {
            return ac.into();
        }
    }
    e.into()
}

/// `z_t` of the periodic contour equation at every node.
pub fn contour_rhs_periodic(curve: &Curve, spec: &QuadratureSpec) -> Result<(PeriodicField, PeriodicField), DynamicsError> {
    spec.validate()?;
    let grid = curve.grid_arc();
    let pre = curve.delta_rho() / (4.0 * PI);
    if pre == 0.0 {
        return Ok((PeriodicField::constant(grid.clone(), 0.0), PeriodicField::constant(grid.clone(), 0.0)));
    }
    let src = contour_sources(curve)?;
    let vals = integrate_nodes(&Contour, &src, true, spec).map_err(|e| arc_chord_or(curve, e))?;
    let (a, b): (Vec<f64>, Vec<f64>) = vals.into_iter().map(|[x, y]| (pre * x, pre * y)).unzip();
    Ok((to_field(grid, a)?, to_field(grid, b)?))
}

/// Contour velocity `(v₁, v₂)` at an arbitrary parameter value.
pub fn contour_velocity_at(curve: &Curve, alpha: f64, spec: &QuadratureSpec) -> Result<[f64; 2], DynamicsError> {
    spec.validate()?;
    let pre = curve.delta_rho() / (4.0 * PI);
    let src = contour_sources(curve)?;
    let (t, site) = src.target(alpha);
    let out = integrate_target(&Contour, &src, &t, Some(site), true, spec).map_err(|e| arc_chord_or(curve, e))?;
    Ok([pre * out.value[0], pre * out.value[1]])
}

/// `(∂_α v₁)(α₀)` from the differentiated velocity integral.
///
/// Where the tangent is vertical (`∂_α z₁(α₀) = 0`) the integrals of the
/// general formula are not separately convergent and the reduced integral of
/// [`crate::turnover::reducida_integral`] must be used instead.
pub fn dalpha_velocity1(curve: &Curve, alpha0: f64, spec: &QuadratureSpec) -> Result<f64, DynamicsError> {
    spec.validate()?;
    let src = contour_sources(curve)?;
    let (t, site) = src.target(alpha0);
    let dz1 = 1.0 + t.dv[0];
    let speed = (dz1 * dz1 + t.dv[1] * t.dv[1]).sqrt();
    if dz1.abs() <= VERTICAL_TANGENT * speed.max(1.0) {
        return Err(DynamicsError::UseReducida { alpha0 });
    }
    let pre = curve.delta_rho() / (4.0 * PI);
    let out = integrate_target(&SlopeOfV1, &src, &t, Some(site), true, spec).map_err(|e| arc_chord_or(curve, e))?;
    Ok(pre * out.value[0])
}

/// Which power is applied to the lower bump of the two-interface datum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum LowerBumpPower {
    /// `sin³` as for the upper interface
    #[default]
    Cube,
    /// `(sin³)³`, the literal reading of the printed formula
    Ninth,
}

/// Parameters of the two-bump experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PaperParams {
    pub m1: f64,
    pub r1: f64,
    pub m2: f64,
    pub r2: f64,
    pub rho_bar_1: f64,
    pub rho_bar_2: f64,
    pub upper_level: f64,
    pub lower_level: f64,
    pub lower_power: LowerBumpPower,
}

impl Default for PaperParams {
    fn default() -> Self {
        Self {
            m1: PI + 0.1,
            r1: 0.7,
            m2: PI / 1.2,
            r2: 0.3,
            rho_bar_1: 20.0 * PI,
            rho_bar_2: PI / 20.0,
            upper_level: 0.1,
            lower_level: -0.92,
            lower_power: LowerBumpPower::Cube,
        }
    }
}

/// `sin³(π(α - M + r)/(2r))` on the periodic window `|α - M| ≤ r`, else 0.
pub fn sine_cubed_bump(alpha: f64, m: f64, r: f64) -> f64 {
    let y = PeriodicGrid::wrap(alpha - m);
    if y.abs() > r {
        return 0.0;
    }
    (PI * (y + r) / (2.0 * r)).sin().powi(3)
}

impl PaperParams {
    pub fn f0(&self, alpha: f64) -> f64 {
        self.upper_level - sine_cubed_bump(alpha, self.m1, self.r1)
    }

    pub fn g0(&self, alpha: f64) -> f64 {
        let b = sine_cubed_bump(alpha, self.m2, self.r2);
        let b = match self.lower_power {
            LowerBumpPower::Cube => b,
            LowerBumpPower::Ninth => b.powi(3),
        };
        b + self.lower_level
    }

    pub fn initial_state(&self, grid: Arc<PeriodicGrid>) -> Result<TwoPhaseState, DynamicsError> {
        let f = GraphInterface::new(PeriodicField::from_fn(grid.clone(), |a| self.f0(a)));
        let g = GraphInterface::new(PeriodicField::from_fn(grid, |a| self.g0(a)));
        TwoPhaseState::new(f, g, self.rho_bar_1, self.rho_bar_2)
    }
}

#[cfg(test)]
mod tests;
