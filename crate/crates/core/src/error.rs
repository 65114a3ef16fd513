//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurveError {
    #[error("grid needs at least {min} nodes, got {got}")]
    TooFewNodes { min: usize, got: usize },
    #[error("grid nodes must be finite, strictly increasing and lie in [-pi, pi) (offending index {index})")]
    BadNodes { index: usize },
    #[error("field has {got} values but the grid has {expected} nodes")]
    LengthMismatch { expected: usize, got: usize },
    #[error("operation requires a uniform grid")]
    UnsupportedGrid,
    #[error("grid too coarse for a derivative of order {order}")]
    GridTooCoarse { order: u32 },
    #[error("unsupported derivative order {0}")]
    BadOrder(u32),
    #[error("arc-chord violation at alpha = {alpha}, beta = {beta}")]
    ArcChordViolation { alpha: f64, beta: f64 },
    #[error("non-finite value at node {0}")]
    NonFinite(usize),
    #[error("spline nodes {0} and {1} coincide")]
    DuplicateNodes(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error("invalid quadrature settings: {0}")]
    InvalidSpec(String),
    #[error("adaptive quadrature did not converge: worst panel [{a}, {b}] with error {error:e} (target {target:e})")]
    NonConvergence { a: f64, b: f64, error: f64, target: f64 },
    #[error("trigonometric degree {degree} is too high for {n} nodes")]
    Aliasing { degree: usize, n: usize },
    #[error("integrand is not finite at {at}")]
    NonFinite { at: f64 },
    #[error(transparent)]
    Curve(#[from] CurveError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("interfaces are touching: minimum separation {min_separation:e} near alpha = {alpha}")]
    NearTouching { min_separation: f64, alpha: f64 },
    #[error("interfaces do not share a grid")]
    GridMismatch,
    #[error("degenerate tangent at alpha = {alpha0}: use the reduced integral")]
    UseReducida { alpha0: f64 },
    #[error("invalid state: {0}")]
    InvalidState(String),
}

impl DynamicsError {
    /// Arc-chord failures surface either directly or through the curve layer.
    pub fn is_arc_chord(&self) -> bool {
        matches!(
            self,
            DynamicsError::Curve(CurveError::ArcChordViolation { .. })
                | DynamicsError::Quadrature(QuadratureError::Curve(
                    CurveError::ArcChordViolation { .. }
                ))
        )
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvolveError {
    #[error("invalid step controller: {0}")]
    InvalidController(String),
    #[error("step size collapsed at t = {t} (dt = {dt:e})")]
    StepCollapse { t: f64, dt: f64 },
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error("redistribution monitor is not finite at alpha = {alpha}")]
    MonitorNonFinite { alpha: f64 },
    #[error("Galerkin truncation needs n >= 4N (n = {n}, N = {n_modes})")]
    AliasingBudget { n: usize, n_modes: usize },
    #[error("invalid snapshot times: {0}")]
    BadSnapshotTimes(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TurnoverError {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("constructed profile violates condition {0}")]
    ConditionViolated(String),
    #[error("the (beta1, pi) contribution {outer:e} is not negative; the family cannot be certified")]
    FamilyInvalid { outer: f64 },
    #[error("no certifying scale found up to b = {b:e}")]
    SearchFailed { b: f64 },
    #[error("singularity at the origin is not removable: {0}")]
    NonRemovable(String),
    #[error("certificate lost after smoothing with {n_modes} modes; increase the mode count")]
    IncreaseModes { n_modes: usize },
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Curve(#[from] CurveError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiagnosticsError {
    #[error("only {resolved} resolved Fourier modes; at least {required} are needed")]
    InsufficientResolution { resolved: usize, required: usize },
    #[error("trajectory has no snapshots")]
    EmptyTrajectory,
    #[error(transparent)]
    Curve(#[from] CurveError),
}
