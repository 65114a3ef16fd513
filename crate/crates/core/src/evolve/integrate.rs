//! The adaptive time loop: snapshots, telemetry, termination, checkpoints.

use serde::{Deserialize, Serialize};

use super::controller::{dopri54_step, StepController};
use super::problem::{EvolutionProblem, Observation};
use crate::error::{CurveError, DynamicsError, EvolveError, QuadratureError};

/// `min ∂_α z₁` below `-TURNOVER_TOL` counts as a turned-over tangent.
pub const TURNOVER_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    #[default]
    Forward,
    /// integrate `y' = -F(y)`; recorded times are the elapsed `|t|`
    Backward,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationReason {
    ReachedTEnd,
    TurnoverDetected,
    StepCollapse,
    ArcChordFailure,
    QuadratureFailure,
    NearTouching,
    StepLimit,
}

impl TerminationReason {
    pub fn name(self) -> &'static str {
        match self {
            Self::ReachedTEnd => "reached_t_end",
            Self::TurnoverDetected => "turnover_detected",
            Self::StepCollapse => "step_collapse",
            Self::ArcChordFailure => "arc_chord_failure",
            Self::QuadratureFailure => "quadrature_failure",
            Self::NearTouching => "near_touching",
            Self::StepLimit => "step_limit",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Termination {
    pub reason: TerminationReason,
    pub t: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot<S> {
    pub t: f64,
    pub state: S,
}

/// One attempted step. Observations are present on accepted steps only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// time at the start of the attempt
    pub t: f64,
    pub dt: f64,
    pub err: f64,
    pub accepted: bool,
    pub observation: Option<Observation>,
}

/// Everything needed to continue a run with the same step sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint<S> {
    pub t: f64,
    /// step size of the next attempt
    pub dt: f64,
    pub state: S,
    pub next_snapshot: usize,
    pub accepted_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegrateOptions {
    pub t_end: f64,
    pub snapshot_times: Vec<f64>,
    pub direction: Direction,
    /// end the run as soon as `min ∂_α z₁ < 0` (contour problems)
    pub stop_on_turnover: bool,
    /// store every accepted state as a snapshot
    pub keep_every_step: bool,
    pub max_steps: Option<usize>,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self { t_end: 1.0, snapshot_times: Vec::new(), direction: Direction::Forward, stop_on_turnover: false, keep_every_step: false, max_steps: None }
    }
}

impl IntegrateOptions {
    fn validate(&self, t0: f64) -> Result<(), EvolveError> {
        let bad = |m: String| Err(EvolveError::BadSnapshotTimes(m));
        if !(self.t_end.is_finite() && self.t_end >= t0) {
            return bad(format!("t_end = {} must be finite and not before the start", self.t_end));
        }
        for w in self.snapshot_times.windows(2) {
            if w[1] <= w[0] {
                return bad(format!("{} does not follow {}", w[1], w[0]));
            }
        }
        if let (Some(&a), Some(&b)) = (self.snapshot_times.first(), self.snapshot_times.last()) {
            if a < 0.0 || b > self.t_end {
                return bad(format!("snapshot times must lie in [0, {}]", self.t_end));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory<S> {
    pub direction: Direction,
    pub snapshots: Vec<Snapshot<S>>,
    pub telemetry: Vec<StepRecord>,
    pub termination: Termination,
    pub final_state: S,
    /// the state the run can be resumed from
    pub checkpoint: Checkpoint<S>,
}

impl<S> Trajectory<S> {
    /// Accepted steps only.
    pub fn accepted(&self) -> impl Iterator<Item = &StepRecord> {
        self.telemetry.iter().filter(|r| r.accepted)
    }
}

/// Callbacks during a run. All methods default to doing nothing.
pub trait Observer<S> {
    fn snapshot(&mut self, _t: f64, _state: &S) {}
    fn step(&mut self, _record: &StepRecord) {}
    fn checkpoint(&mut self, _checkpoint: &Checkpoint<S>) {}
}

impl<S> Observer<S> for () {}

/// Termination reason for an error, and whether a smaller step may avoid it.
fn classify(e: &EvolveError) -> (TerminationReason, bool) {
    use TerminationReason::*;
    match e {
        EvolveError::Dynamics(d) => match d {
            DynamicsError::NearTouching { .. } => (NearTouching, true),
            DynamicsError::InvalidState(_) => (NearTouching, true),
            d if d.is_arc_chord() => (ArcChordFailure, true),
            DynamicsError::Quadrature(QuadratureError::NonFinite { .. } | QuadratureError::NonConvergence { .. }) => {
                (QuadratureFailure, true)
            }
            DynamicsError::Curve(CurveError::NonFinite(_)) => (QuadratureFailure, true),
            _ => (QuadratureFailure, false),
        },
        EvolveError::Curve(CurveError::ArcChordViolation { .. }) => (ArcChordFailure, true),
        EvolveError::Curve(CurveError::NonFinite(_)) => (QuadratureFailure, true),
        EvolveError::StepCollapse { .. } => (StepCollapse, false),
        _ => (QuadratureFailure, false),
    }
}

/// Integrate from `t = 0`.
pub fn integrate<P: EvolutionProblem>(
    problem: &P,
    initial: P::State,
    ctrl: &StepController,
    opts: &IntegrateOptions,
    observer: &mut dyn Observer<P::State>,
) -> Result<Trajectory<P::State>, EvolveError> {
    let start = Checkpoint { t: 0.0, dt: ctrl.dt_init, state: initial, next_snapshot: 0, accepted_steps: 0 };
    run(problem, start, ctrl, opts, observer)
}

/// Continue from a checkpoint of an earlier run with the same options.
pub fn resume<P: EvolutionProblem>(
    problem: &P,
    checkpoint: Checkpoint<P::State>,
    ctrl: &StepController,
    opts: &IntegrateOptions,
    observer: &mut dyn Observer<P::State>,
) -> Result<Trajectory<P::State>, EvolveError> {
    run(problem, checkpoint, ctrl, opts, observer)
}

fn run<P: EvolutionProblem>(
    problem: &P,
    start: Checkpoint<P::State>,
    ctrl: &StepController,
    opts: &IntegrateOptions,
    observer: &mut dyn Observer<P::State>,
) -> Result<Trajectory<P::State>, EvolveError> {
    ctrl.validate()?;
    opts.validate(start.t)?;
    let sign = opts.direction.sign();
    let Checkpoint { mut t, mut dt, mut state, mut next_snapshot, mut accepted_steps } = start;
    let times = &opts.snapshot_times;
    let mut snapshots = Vec::new();
    let mut telemetry = Vec::new();
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-14 * a.abs().max(b.abs()).max(1.0);

    let take_snapshots = |t: f64, state: &P::State, next: &mut usize, snaps: &mut Vec<Snapshot<P::State>>, obs: &mut dyn Observer<P::State>| {
        while *next < times.len() && (times[*next] < t || close(times[*next], t)) {
            if close(times[*next], t) {
                obs.snapshot(t, state);
                snaps.push(Snapshot { t: times[*next], state: state.clone() });
            }
            *next += 1;
        }
    };

    let finish = |reason: TerminationReason, t: f64, detail: String| Termination { reason, t, detail };

    if let Err(e) = problem.observe(&state) {
        let (reason, _) = classify(&e);
        let cp = Checkpoint { t, dt, state: state.clone(), next_snapshot, accepted_steps };
        return Ok(Trajectory { direction: opts.direction, snapshots, telemetry, termination: finish(reason, t, e.to_string()), final_state: state, checkpoint: cp });
    }
    take_snapshots(t, &state, &mut next_snapshot, &mut snapshots, observer);

    let termination = 'outer: loop {
        if t >= opts.t_end || close(t, opts.t_end) {
            break finish(TerminationReason::ReachedTEnd, t, String::new());
        }
        if opts.max_steps.is_some_and(|m| accepted_steps >= m) {
            break finish(TerminationReason::StepLimit, t, format!("{accepted_steps} accepted steps"));
        }
        let target = times.get(next_snapshot).copied().unwrap_or(opts.t_end).min(opts.t_end);
        let gap = target - t;
        let y = problem.values(&state);
        let unconstrained = dt;
        let mut h = dt.min(ctrl.dt_max);
        let mut rejects = 0;
        let mut last_error: Option<EvolveError> = None;

        let outcome = loop {
            let aligned = h >= gap - ctrl.dt_min;
            if aligned {
                h = gap;
            }
            let rhs = |_: f64, ys: &[f64]| -> Result<Vec<f64>, EvolveError> {
                let s = problem.with_values(&state, ys)?;
                let mut r = problem.rhs(&s)?;
                if sign < 0.0 {
                    r.iter_mut().for_each(|v| *v = -*v);
                }
                Ok(r)
            };
            let failed = match dopri54_step(rhs, &y, t, h, ctrl) {
                Ok(out) if out.accepted => break (out, aligned),
                Ok(out) => {
                    let rec = StepRecord { t, dt: h, err: out.err, accepted: false, observation: None };
                    observer.step(&rec);
                    telemetry.push(rec);
                    h = out.dt_next;
                    None
                }
                Err(e) => {
                    let (reason, recoverable) = classify(&e);
                    if !recoverable {
                        break 'outer finish(reason, t, e.to_string());
                    }
                    let rec = StepRecord { t, dt: h, err: f64::INFINITY, accepted: false, observation: None };
                    observer.step(&rec);
                    telemetry.push(rec);
                    h *= 0.25;
                    Some(e)
                }
            };
            if failed.is_some() {
                last_error = failed;
            }
            rejects += 1;
            if rejects > ctrl.max_rejects_per_step || h < ctrl.dt_min {
                break 'outer match last_error {
                    Some(e) => {
                        // geometric failures keep their reason; a quadrature failure that
                        // drove the step below its floor is a collapse of the step
                        let reason = match classify(&e).0 {
                            TerminationReason::QuadratureFailure if h < ctrl.dt_min => TerminationReason::StepCollapse,
                            r => r,
                        };
                        finish(reason, t, format!("{e} (step size {h:e} after {rejects} rejections)"))
                    }
                    None => finish(TerminationReason::StepCollapse, t, EvolveError::StepCollapse { t, dt: h }.to_string()),
                };
            }
        };

        let (out, aligned) = outcome;
        let t_new = if aligned { target } else { out.t };
        let stepped = match problem.with_values(&state, &out.y).and_then(|s| problem.post_step(s)) {
            Ok(s) => s,
            Err(e) => break finish(classify(&e).0, t_new, e.to_string()),
        };
        let observation = match problem.observe(&stepped) {
            Ok(o) => o,
            Err(e) => {
                state = stepped;
                t = t_new;
                break finish(classify(&e).0, t, e.to_string());
            }
        };
        let rec = StepRecord { t, dt: h, err: out.err, accepted: true, observation: Some(observation.clone()) };
        observer.step(&rec);
        telemetry.push(rec);
        state = stepped;
        t = t_new;
        accepted_steps += 1;
        dt = if aligned { out.dt_next.max(unconstrained.min(ctrl.dt_max)) } else { out.dt_next };

        if opts.keep_every_step && !times.iter().any(|&s| close(s, t)) {
            observer.snapshot(t, &state);
            snapshots.push(Snapshot { t, state: state.clone() });
        }
        take_snapshots(t, &state, &mut next_snapshot, &mut snapshots, observer);
        observer.checkpoint(&Checkpoint { t, dt, state: state.clone(), next_snapshot, accepted_steps });

        if opts.stop_on_turnover {
            if let Some((m, alpha)) = observation.min_slope {
                if m < -TURNOVER_TOL {
                    if snapshots.last().is_none_or(|s| s.t != t) {
                        observer.snapshot(t, &state);
                        snapshots.push(Snapshot { t, state: state.clone() });
                    }
                    break finish(TerminationReason::TurnoverDetected, t, format!("min slope {m:e} at alpha = {alpha}"));
                }
            }
        }
        if dt < ctrl.dt_min {
            break finish(TerminationReason::StepCollapse, t, EvolveError::StepCollapse { t, dt }.to_string());
        }
    };

    let checkpoint = Checkpoint { t, dt, state: state.clone(), next_snapshot, accepted_steps };
    Ok(Trajectory { direction: opts.direction, snapshots, telemetry, termination, final_state: state, checkpoint })
}
