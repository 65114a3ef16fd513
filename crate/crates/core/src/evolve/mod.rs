//! Adaptive time integration, splines, node redistribution and the spectral
//! Galerkin backend.

mod controller;
mod galerkin;
mod integrate;
mod problem;
mod redistribute;
pub mod spline;

pub use controller::{dopri54_step, StepController, StepOutcome};
pub use galerkin::{galerkin_rhs, project, project_field};
pub use integrate::{
    integrate, resume, Checkpoint, Direction, IntegrateOptions, Observer, Snapshot, StepRecord, Termination, TerminationReason,
    Trajectory, TURNOVER_TOL,
};
pub use problem::{
    ContourProblem, EvolutionProblem, GalerkinProblem, Observation, PeriodicGraphProblem, RealLineProblem, TwoPhaseProblem,
};
pub use redistribute::{redistribute_graph, redistribute_two_phase, RedistributionPolicy};

#[cfg(test)]
mod tests;
