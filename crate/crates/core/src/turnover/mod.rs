//! Turning initial data: a curve with a vertical tangent at the origin whose
//! horizontal velocity gradient there is certified negative, so the
//! interface stops being a graph immediately. Also detection of that event
//! along computed trajectories.

mod profile;
mod reducida;

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use profile::{build_z1, profile_curve, OddCurve, Profile, ProfileCurve, SpectralCurve};
pub use reducida::{reduced_part, reducida, Part};

use crate::curve::{arc_chord_constant, differentiate, min_slope, slope_z1, Curve, PeriodicField, PeriodicGrid, DEFAULT_DELTA_RHO};
use crate::error::{CurveError, TurnoverError};
use crate::evolve::{Snapshot, Trajectory, TURNOVER_TOL};
use crate::quadrature::QuadratureSpec;

/// Default half-width of the region where the height is rescaled.
pub const DEFAULT_BETA1: f64 = 1.0;
/// Default end of the region where the base profile must be negative.
pub const DEFAULT_BETA2: f64 = 2.0;
/// Largest scale tried by [`find_b`].
pub const MAX_B: f64 = 1e12;
/// Slope at the origin below which it counts as zero.
const SLOPE_ZERO: f64 = 1e-12;
/// Relative cosine energy below which a curve counts as odd.
const ODD_TOL: f64 = 1e-12;

/// Pass/fail of the structural conditions on a turning datum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct Conditions {
    pub odd: bool,
    pub slope_positive_away_from_0: bool,
    pub slope_zero_at_0: bool,
    pub dz2_positive_at_0: bool,
    pub arc_chord_finite: bool,
}

impl Conditions {
    pub fn all(&self) -> bool {
        self.odd && self.slope_positive_away_from_0 && self.slope_zero_at_0 && self.dz2_positive_at_0 && self.arc_chord_finite
    }

    /// Names of the failed conditions.
    pub fn failed(&self) -> Vec<&'static str> {
        [
            (self.odd, "odd"),
            (self.slope_positive_away_from_0, "slope-positive-away-from-0"),
            (self.slope_zero_at_0, "slope-zero-at-0"),
            (self.dz2_positive_at_0, "dz2-positive-at-0"),
            (self.arc_chord_finite, "arc-chord-finite"),
        ]
        .into_iter()
        .filter(|(ok, _)| !ok)
        .map(|(_, name)| name)
        .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnoverCertificate {
    pub beta1: f64,
    pub beta2: f64,
    pub b: f64,
    pub n_modes: usize,
    /// `(∂_α v₁)(0)`
    pub integral_value: f64,
    pub integral_error: f64,
    pub dz2_at_0: f64,
    pub conditions: Conditions,
}

impl TurnoverCertificate {
    pub fn passed(&self) -> bool {
        self.integral_value + self.integral_error < 0.0 && self.conditions.all() && 0.0 < self.beta1 && self.beta1 < self.beta2 && self.beta2 < PI
    }
}

fn check_betas(beta1: f64, beta2: f64) -> Result<(), TurnoverError> {
    if !(0.0 < beta1 && beta1 < beta2 && beta2 < PI) {
        return Err(TurnoverError::InvalidParameters(format!("need 0 < beta1 < beta2 < pi, got {beta1}, {beta2}")));
    }
    Ok(())
}

/// Check the sign conditions on a sampled base profile:
/// odd, positive slope at 0, positive on `(0, β₁)`, negative on `(β₁, β₂]`,
/// nonpositive on `[β₂, π]`.
pub fn check_zstar(z: &PeriodicField, beta1: f64, beta2: f64) -> Result<(), TurnoverError> {
    check_betas(beta1, beta2)?;
    let grid = z.grid();
    let a = grid.alphas();
    let v = z.values();
    let scale = z.max_abs().max(f64::MIN_POSITIVE);
    let violated = |name: &str| Err(TurnoverError::ConditionViolated(name.to_string()));
    for (i, &x) in a.iter().enumerate() {
        let j = grid.nearest(-x);
        if (PeriodicGrid::wrap(a[j] + x)).abs() < 1e-12 && (v[i] + v[j]).abs() > 1e-12 * scale {
            return violated("odd");
        }
    }
    let d = differentiate(z, 1)?;
    if d.values()[grid.nearest(0.0)] <= 0.0 {
        return violated("positive-slope-at-0");
    }
    for (&x, &val) in a.iter().zip(v) {
        let ok = if x > 0.0 && x < beta1 {
            val > 0.0
        } else if x > beta1 && x <= beta2 {
            val < 0.0
        } else if x >= beta2 {
            val <= 1e-14 * scale
        } else {
            true
        };
        if !ok {
            return violated(if x < beta1 { "positive-on-(0,beta1)" } else if x <= beta2 { "negative-on-(beta1,beta2]" } else { "nonpositive-on-[beta2,pi]" });
        }
    }
    Ok(())
}

/// Samples of `z*(β) = sin β (cos β − cos β₁)`, checked against the sign conditions.
pub fn build_zstar(grid: Arc<PeriodicGrid>, beta1: f64, beta2: f64) -> Result<PeriodicField, TurnoverError> {
    check_betas(beta1, beta2)?;
    let z = Profile::Star { beta1 }.sample(grid);
    check_zstar(&z, beta1, beta2)?;
    Ok(z)
}

/// `b z*` on `|β| ≤ β₁` and `z*` elsewhere.
pub fn assemble_tilde_z(zstar: &PeriodicField, b: f64, beta1: f64) -> PeriodicField {
    let a = zstar.grid().alphas();
    let v = zstar.values().iter().zip(a).map(|(&v, &x)| if x.abs() <= beta1 { b * v } else { v }).collect();
    PeriodicField::new(zstar.grid_arc().clone(), v).expect("same grid")
}

/// The reduced integral for sampled data on a uniform grid: `z1` holds
/// `z₁ − β`, and `dz2_at_0` sets the prefactor.
pub fn reducida_integral(z1: &PeriodicField, z2: &PeriodicField, dz2_at_0: f64, spec: &QuadratureSpec) -> Result<Part, TurnoverError> {
    if dz2_at_0 == 0.0 {
        return Ok(Part { value: 0.0, error: 0.0 });
    }
    let curve = Curve::new(z1.clone(), z2.clone(), DEFAULT_DELTA_RHO)?;
    let p = reduced_part(&SpectralCurve::new(&curve)?, 0.0, PI, spec)?;
    Ok(Part { value: 2.0 * dz2_at_0 * p.value, error: 2.0 * dz2_at_0.abs() * p.error })
}

/// Result of the scale search.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleSearch {
    pub b: f64,
    /// contribution of `(0, β₁)`, without prefactor
    pub inner: Part,
    /// contribution of `(β₁, π)`, without prefactor
    pub outer: Part,
    /// `(∂_α v₁)(0)` of the rescaled profile
    pub integral: Part,
}

/// Contribution of `(0, β₁)` for the profile rescaled by `b` there.
pub fn inner_part(zstar: &Profile, beta1: f64, b: f64, spec: &QuadratureSpec) -> Result<Part, TurnoverError> {
    let tilde = Profile::Tilde { base: Box::new(zstar.clone()), beta1, b };
    reduced_part(&ProfileCurve(&tilde), 0.0, beta1, spec)
}

/// Smallest `b = 2^k` for which the rescaled profile has a certified
/// negative reduced integral.
pub fn find_b(zstar: &Profile, beta1: f64, spec: &QuadratureSpec) -> Result<ScaleSearch, TurnoverError> {
    if !(0.0 < beta1 && beta1 < PI) {
        return Err(TurnoverError::InvalidParameters(format!("beta1 = {beta1} outside (0, pi)")));
    }
    let outer = reduced_part(&ProfileCurve(zstar), beta1, PI, spec)?;
    if outer.value + outer.error >= 0.0 {
        return Err(TurnoverError::FamilyInvalid { outer: outer.value });
    }
    let c = zstar.slope_at_zero();
    if c <= 0.0 {
        return Err(TurnoverError::ConditionViolated("dz2-positive-at-0".into()));
    }
    let mut b = 1.0;
    while b <= MAX_B {
        let inner = inner_part(zstar, beta1, b, spec)?;
        let total = inner.value + outer.value;
        let err = inner.error + outer.error;
        if total + err < 0.0 {
            let pre = 2.0 * b * c;
            return Ok(ScaleSearch { b, inner, outer, integral: Part { value: pre * total, error: pre * err } });
        }
        b *= 2.0;
    }
    Err(TurnoverError::SearchFailed { b })
}

/// Weights applied to the sine coefficients before truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Smoothing {
    /// plain truncation
    None,
    /// `exp(-36 (k/N)^16)`: leaves low modes untouched, kills the top ones
    #[default]
    Exponential,
}

impl Smoothing {
    pub fn weight(&self, k: usize, n_modes: usize) -> f64 {
        match self {
            Smoothing::None => 1.0,
            Smoothing::Exponential => (-36.0 * (k as f64 / n_modes as f64).powi(16)).exp(),
        }
    }
}

/// An odd analytic approximation `Σ_{k ≤ n_modes} w_k c_k sin(kβ)` of `tilde`,
/// returned only when its reduced integral is still certified negative.
pub fn analytic_smooth(tilde: &Profile, n_modes: usize, smoothing: Smoothing, spec: &QuadratureSpec) -> Result<(Profile, Part), TurnoverError> {
    if n_modes == 0 {
        return Err(TurnoverError::InvalidParameters("n_modes must be positive".into()));
    }
    let coeffs = profile::sine_coefficients(tilde, n_modes, spec)?;
    let coeffs = coeffs.into_iter().enumerate().map(|(j, c)| c * smoothing.weight(j + 1, n_modes)).collect();
    let smooth = Profile::Sine { coeffs };
    if smooth.slope_at_zero() <= 0.0 {
        return Err(TurnoverError::IncreaseModes { n_modes });
    }
    let part = reducida(&ProfileCurve(&smooth), spec)?;
    if part.value + part.error >= 0.0 {
        return Err(TurnoverError::IncreaseModes { n_modes });
    }
    Ok((smooth, part))
}

/// Structural conditions of a sampled turning datum.
pub fn check_conditions(curve: &Curve) -> Result<Conditions, TurnoverError> {
    let spectral = SpectralCurve::new(curve)?;
    let slope = slope_z1(curve)?;
    let i0 = curve.grid().nearest(0.0);
    let at_origin = curve.grid().alphas()[i0].abs() < 1e-14;
    let away = slope.values().iter().enumerate().all(|(i, &s)| i == i0 || s > 0.0);
    Ok(Conditions {
        odd: spectral.even_part() < ODD_TOL,
        slope_positive_away_from_0: at_origin && away,
        slope_zero_at_0: at_origin && slope.values()[i0].abs() < SLOPE_ZERO,
        dz2_positive_at_0: spectral.dz2_at_zero() > 0.0,
        arc_chord_finite: arc_chord_constant(curve).map(f64::is_finite).unwrap_or(false),
    })
}

/// A constructed turning datum.
#[derive(Debug, Clone)]
pub struct TurningDatum {
    pub curve: Curve,
    pub profile: Profile,
    pub certificate: TurnoverCertificate,
}

/// Build `(β − sin β, z₂(β))` with `∂_α v₁(0) < 0` certified, sampled on
/// `4 n_modes` nodes with `Δρ = 4π`.
pub fn construct_turning_datum(beta1: f64, beta2: f64, n_modes: usize, spec: &QuadratureSpec) -> Result<TurningDatum, TurnoverError> {
    check_betas(beta1, beta2)?;
    spec.validate()?;
    if n_modes < 8 {
        return Err(TurnoverError::InvalidParameters("n_modes must be at least 8".into()));
    }
    let n = 4 * n_modes;
    let grid = Arc::new(PeriodicGrid::uniform(n)?);
    build_zstar(grid, beta1, beta2)?;
    let star = Profile::Star { beta1 };
    let search = find_b(&star, beta1, spec)?;
    let tilde = Profile::Tilde { base: Box::new(star), beta1, b: search.b };
    let (smooth, _) = analytic_smooth(&tilde, n_modes, Smoothing::default(), spec)?;
    let curve = profile_curve(&smooth, n, DEFAULT_DELTA_RHO)?;
    let certificate = certify(&curve, beta1, beta2, search.b, n_modes, spec)?;
    if !certificate.passed() {
        if !certificate.conditions.all() {
            return Err(TurnoverError::ConditionViolated(certificate.conditions.failed().join(", ")));
        }
        return Err(TurnoverError::IncreaseModes { n_modes });
    }
    Ok(TurningDatum { curve, profile: smooth, certificate })
}

/// Evaluate the certificate of a sampled curve on a uniform grid.
pub fn certify(curve: &Curve, beta1: f64, beta2: f64, b: f64, n_modes: usize, spec: &QuadratureSpec) -> Result<TurnoverCertificate, TurnoverError> {
    let spectral = SpectralCurve::new(curve)?;
    let part = reducida(&spectral, spec)?;
    Ok(TurnoverCertificate {
        beta1,
        beta2,
        b,
        n_modes,
        integral_value: part.value,
        integral_error: part.error,
        dz2_at_0: spectral.dz2_at_zero(),
        conditions: check_conditions(curve)?,
    })
}

/// Recompute the reduced integral of `curve` with halved tolerances and
/// window; returns the new value and whether it lies within the
/// certificate's error of the certified one.
pub fn verify_certificate(curve: &Curve, cert: &TurnoverCertificate, spec: &QuadratureSpec) -> Result<(Part, bool), TurnoverError> {
    let fine = QuadratureSpec { local_window: 0.5 * spec.local_window, max_panels: 2 * spec.max_panels, ..spec.tightened(2.0) };
    let part = reducida(&SpectralCurve::new(curve)?, &fine)?;
    let ok = (part.value - cert.integral_value).abs() <= cert.integral_error;
    Ok((part, ok))
}

/// A detected loss of the graph property.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurnoverEvent {
    pub t: f64,
    pub alpha: f64,
    /// `min ∂_α z₁` at the refined time
    pub min_slope: f64,
}

fn lerp(a: &Curve, b: &Curve, w: f64) -> Result<Curve, CurveError> {
    Curve::new(a.z1_minus_alpha().axpby(1.0 - w, b.z1_minus_alpha(), w)?, a.z2().axpby(1.0 - w, b.z2(), w)?, a.delta_rho())
}

/// First time the minimum of `∂_α z₁` drops below zero, bracketed by the
/// snapshots and refined by bisection on linearly interpolated curves.
pub fn detect_turnover(trajectory: &Trajectory<Curve>) -> Result<Option<TurnoverEvent>, CurveError> {
    detect_turnover_in(&trajectory.snapshots)
}

/// [`detect_turnover`] over a list of snapshots in time order.
pub fn detect_turnover_in(snaps: &[Snapshot<Curve>]) -> Result<Option<TurnoverEvent>, CurveError> {
    let below = |m: f64| m < -TURNOVER_TOL;
    let mut prev: Option<usize> = None;
    for (i, s) in snaps.iter().enumerate() {
        let (m, alpha) = min_slope(&s.state)?;
        if !below(m) {
            prev = Some(i);
            continue;
        }
        let Some(p) = prev else {
            return Ok(Some(TurnoverEvent { t: s.t, alpha, min_slope: m }));
        };
        let (a, b) = (&snaps[p], s);
        if a.state.grid() != b.state.grid() {
            return Ok(Some(TurnoverEvent { t: s.t, alpha, min_slope: m }));
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        let mut best = (m, alpha);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            let (mm, aa) = min_slope(&lerp(&a.state, &b.state, mid)?)?;
            if below(mm) {
                hi = mid;
                best = (mm, aa);
            } else {
                lo = mid;
            }
        }
        let t = a.t + hi * (b.t - a.t);
        return Ok(Some(TurnoverEvent { t, alpha: best.1, min_slope: best.0 }));
    }
    Ok(None)
}
