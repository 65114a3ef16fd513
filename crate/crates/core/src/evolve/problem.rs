//! The evolution problems understood by [`integrate`](super::integrate).

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::galerkin::{galerkin_rhs, project};
use super::redistribute::{redistribute_graph, redistribute_two_phase, RedistributionPolicy};
use crate::curve::{self, Curve, GraphInterface, PeriodicField};
use crate::dynamics::{
    contour_rhs_periodic, graph_rhs_realline, periodic_graph_rhs, truncation_residual, two_phase_rhs, RealLineGraph,
    TwoPhaseState, APPROACH_WARNING,
};
use crate::error::{CurveError, DynamicsError, EvolveError};
use crate::evolve::spline::PeriodicSpline;
use crate::quadrature::QuadratureSpec;

/// Per-step monitors of an accepted state.
#[derive(Debug, Clone, Default, PartialEq, Serialize, serde::Deserialize)]
pub struct Observation {
    pub nodes: usize,
    /// `min ∂_α z₁` and where (contour problems)
    pub min_slope: Option<(f64, f64)>,
    /// largest `|∂_α f|` over the interfaces (graph problems)
    pub max_slope: Option<f64>,
    /// `min (f - g)` (two-phase problems)
    pub min_separation: Option<f64>,
    pub warning: Option<String>,
}

/// A system `y' = F(y)` over a structured state.
pub trait EvolutionProblem: Sync {
    type State: Clone + Serialize + DeserializeOwned;

    /// Short name used in snapshot headers.
    fn kind(&self) -> &'static str;

    /// Flatten the unknowns.
    fn values(&self, state: &Self::State) -> Vec<f64>;

    /// A state shaped like `like` holding the unknowns `y`.
    fn with_values(&self, like: &Self::State, y: &[f64]) -> Result<Self::State, EvolveError>;

    fn rhs(&self, state: &Self::State) -> Result<Vec<f64>, EvolveError>;

    /// Applied after every accepted step (redistribution).
    fn post_step(&self, state: Self::State) -> Result<Self::State, EvolveError> {
        Ok(state)
    }

    /// Monitors of an accepted state; an error ends the run.
    fn observe(&self, state: &Self::State) -> Result<Observation, EvolveError>;
}

fn max_abs_slope(f: &PeriodicField) -> Result<f64, CurveError> {
    Ok(PeriodicSpline::from_field(f)?.node_derivatives().iter().fold(0.0, |m, d| m.max(d.abs())))
}

fn field_like(like: &PeriodicField, y: &[f64]) -> Result<PeriodicField, EvolveError> {
    Ok(like.with_values(y.to_vec())?)
}

/// `f_t = ρ̄ I[f, f]` on the circle.
#[derive(Debug, Clone)]
pub struct PeriodicGraphProblem {
    pub rho_bar: f64,
    pub spec: QuadratureSpec,
    pub redistribution: Option<RedistributionPolicy>,
}

impl PeriodicGraphProblem {
    pub fn new(rho_bar: f64, spec: QuadratureSpec, redistribution: Option<RedistributionPolicy>, initial: &GraphInterface) -> Self {
        let n = initial.grid().len();
        Self { rho_bar, spec, redistribution: redistribution.map(|p| p.for_nodes(n)) }
    }
}

impl EvolutionProblem for PeriodicGraphProblem {
    type State = GraphInterface;

    fn kind(&self) -> &'static str {
        "periodic-graph"
    }

    fn values(&self, s: &GraphInterface) -> Vec<f64> {
        s.values().to_vec()
    }

    fn with_values(&self, like: &GraphInterface, y: &[f64]) -> Result<GraphInterface, EvolveError> {
        Ok(GraphInterface::new(field_like(like.field(), y)?))
    }

    fn rhs(&self, s: &GraphInterface) -> Result<Vec<f64>, EvolveError> {
        Ok(periodic_graph_rhs(s, self.rho_bar, &self.spec)?.into_values())
    }

    fn post_step(&self, s: GraphInterface) -> Result<GraphInterface, EvolveError> {
        match &self.redistribution {
            Some(p) => redistribute_graph(&s, p),
            None => Ok(s),
        }
    }

    fn observe(&self, s: &GraphInterface) -> Result<Observation, EvolveError> {
        Ok(Observation { nodes: s.grid().len(), max_slope: Some(max_abs_slope(s.field())?), ..Default::default() })
    }
}

/// The coupled two-interface system.
#[derive(Debug, Clone)]
pub struct TwoPhaseProblem {
    pub spec: QuadratureSpec,
    pub redistribution: Option<RedistributionPolicy>,
}

impl TwoPhaseProblem {
    pub fn new(spec: QuadratureSpec, redistribution: Option<RedistributionPolicy>, initial: &TwoPhaseState) -> Self {
        let n = initial.grid().len();
        Self { spec, redistribution: redistribution.map(|p| p.for_nodes(n)) }
    }
}

impl EvolutionProblem for TwoPhaseProblem {
    type State = TwoPhaseState;

    fn kind(&self) -> &'static str {
        "two-phase"
    }

    fn values(&self, s: &TwoPhaseState) -> Vec<f64> {
        s.f.values().iter().chain(s.g.values()).copied().collect()
    }

    fn with_values(&self, like: &TwoPhaseState, y: &[f64]) -> Result<TwoPhaseState, EvolveError> {
        let n = like.grid().len();
        Ok(TwoPhaseState {
            f: GraphInterface::new(field_like(like.f.field(), &y[..n])?),
            g: GraphInterface::new(field_like(like.g.field(), &y[n..])?),
            ..*like
        })
    }

    fn rhs(&self, s: &TwoPhaseState) -> Result<Vec<f64>, EvolveError> {
        let (ft, gt) = two_phase_rhs(s, &self.spec)?;
        Ok(ft.into_values().into_iter().chain(gt.into_values()).collect())
    }

    fn post_step(&self, s: TwoPhaseState) -> Result<TwoPhaseState, EvolveError> {
        match &self.redistribution {
            Some(p) => redistribute_two_phase(&s, p),
            None => Ok(s),
        }
    }

    fn observe(&self, s: &TwoPhaseState) -> Result<Observation, EvolveError> {
        let (sep, alpha) = s.min_separation();
        if sep <= 0.0 {
            return Err(DynamicsError::NearTouching { min_separation: sep, alpha }.into());
        }
        let warning = (sep < APPROACH_WARNING).then(|| format!("interfaces within {sep:.3e} near alpha = {alpha:.6}"));
        Ok(Observation {
            nodes: s.grid().len(),
            max_slope: Some(max_abs_slope(s.f.field())?.max(max_abs_slope(s.g.field())?)),
            min_separation: Some(sep),
            warning,
            ..Default::default()
        })
    }
}

/// A flat-at-infinity graph on the real line (never redistributed).
#[derive(Debug, Clone)]
pub struct RealLineProblem {
    pub delta_rho: f64,
    pub spec: QuadratureSpec,
}

impl EvolutionProblem for RealLineProblem {
    type State = RealLineGraph;

    fn kind(&self) -> &'static str {
        "real-line"
    }

    fn values(&self, s: &RealLineGraph) -> Vec<f64> {
        s.values().to_vec()
    }

    fn with_values(&self, like: &RealLineGraph, y: &[f64]) -> Result<RealLineGraph, EvolveError> {
        Ok(like.with_values(y.to_vec())?)
    }

    fn rhs(&self, s: &RealLineGraph) -> Result<Vec<f64>, EvolveError> {
        Ok(graph_rhs_realline(s, self.delta_rho, &self.spec)?)
    }

    fn observe(&self, s: &RealLineGraph) -> Result<Observation, EvolveError> {
        let spl = s.spline()?;
        let residual = truncation_residual(s)?;
        Ok(Observation {
            nodes: s.len(),
            max_slope: Some(spl.node_derivatives().iter().fold(0.0, |m, d| m.max(d.abs()))),
            warning: (residual > 1e-8).then(|| format!("truncation residual {residual:.3e}")),
            ..Default::default()
        })
    }
}

fn contour_observation(c: &Curve) -> Result<Observation, EvolveError> {
    curve::arc_chord_constant(c)?;
    Ok(Observation { nodes: c.grid().len(), min_slope: Some(curve::min_slope(c)?), ..Default::default() })
}

fn curve_like(like: &Curve, y: &[f64]) -> Result<Curve, EvolveError> {
    let n = like.grid().len();
    let p = field_like(like.z1_minus_alpha(), &y[..n])?;
    let q = field_like(like.z2(), &y[n..])?;
    Ok(Curve::new(p, q, like.delta_rho())?)
}

fn curve_values(c: &Curve) -> Vec<f64> {
    c.z1_minus_alpha().values().iter().chain(c.z2().values()).copied().collect()
}

/// The periodic contour equation by collocation at the nodes.
#[derive(Debug, Clone)]
pub struct ContourProblem {
    pub spec: QuadratureSpec,
}

impl EvolutionProblem for ContourProblem {
    type State = Curve;

    fn kind(&self) -> &'static str {
        "contour"
    }

    fn values(&self, s: &Curve) -> Vec<f64> {
        curve_values(s)
    }

    fn with_values(&self, like: &Curve, y: &[f64]) -> Result<Curve, EvolveError> {
        curve_like(like, y)
    }

    fn rhs(&self, s: &Curve) -> Result<Vec<f64>, EvolveError> {
        let (a, b) = contour_rhs_periodic(s, &self.spec)?;
        Ok(a.into_values().into_iter().chain(b.into_values()).collect())
    }

    fn observe(&self, s: &Curve) -> Result<Observation, EvolveError> {
        contour_observation(s)
    }
}

/// The contour equation projected onto the modes `|k| ≤ n_modes`.
#[derive(Debug, Clone)]
pub struct GalerkinProblem {
    pub n_modes: usize,
    pub spec: QuadratureSpec,
}

impl GalerkinProblem {
    /// Project the initial curve so the state starts in the Galerkin space.
    pub fn initial(&self, curve: &Curve) -> Result<Curve, EvolveError> {
        project(curve, self.n_modes)
    }
}

impl EvolutionProblem for GalerkinProblem {
    type State = Curve;

    fn kind(&self) -> &'static str {
        "galerkin"
    }

    fn values(&self, s: &Curve) -> Vec<f64> {
        curve_values(s)
    }

    fn with_values(&self, like: &Curve, y: &[f64]) -> Result<Curve, EvolveError> {
        curve_like(like, y)
    }

    fn rhs(&self, s: &Curve) -> Result<Vec<f64>, EvolveError> {
        let (a, b) = galerkin_rhs(s, self.n_modes, &self.spec)?;
        let grid = s.grid_arc();
        let a = PeriodicField::from_spectrum(grid.clone(), &a)?;
        let b = PeriodicField::from_spectrum(grid.clone(), &b)?;
        Ok(a.into_values().into_iter().chain(b.into_values()).collect())
    }

    fn observe(&self, s: &Curve) -> Result<Observation, EvolveError> {
        contour_observation(s)
    }
}
