//! Principal-value and near-singular quadrature, plus the spectral operators
//! `H` and `Λ^s`.

pub mod lobatto;
pub mod series;
mod spectral;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

pub use lobatto::{Outcome, Tolerance};
pub use series::Series;
pub use spectral::{ad_inequality_margin, hilbert_transform, lambda_op, random_trig_polynomial};

use crate::error::QuadratureError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Half-width of the window around the singular point that is handled by
    /// a local Taylor model instead of sampling.
    pub local_window: f64,
    pub taylor_order: usize,
    /// Panel budget per integral before giving up.
    pub max_panels: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { rel_tol: 1e-10, abs_tol: 1e-12, local_window: PI / 64.0, taylor_order: 4, max_panels: 200_000 }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<(), QuadratureError> {
        let bad = |m: &str| Err(QuadratureError::InvalidSpec(m.to_string()));
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return bad("rel_tol must be positive");
        }
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return bad("abs_tol must be positive");
        }
        if !(self.local_window > 0.0 && self.local_window <= PI / 8.0) {
            return bad("local_window must lie in (0, pi/8]");
        }
        if !(2..=4).contains(&self.taylor_order) {
            return bad("taylor_order must be 2, 3 or 4");
        }
        if self.max_panels < 16 {
            return bad("max_panels must be at least 16");
        }
        Ok(())
    }

    pub fn tolerance(&self) -> Tolerance {
        Tolerance { abs: self.abs_tol, rel: self.rel_tol, max_panels: self.max_panels }
    }

    /// Same settings with both tolerances divided by `factor`.
    pub fn tightened(&self, factor: f64) -> Self {
        Self { rel_tol: self.rel_tol / factor, abs_tol: self.abs_tol / factor, ..*self }
    }
}

/// What the caller knows about an integrand on `(-h, h)`: it equals
/// `cot_coeff * cot(β/2) + Σ_k regular[k] β^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalModel {
    pub cot_coeff: f64,
    pub regular: Vec<f64>,
}

impl LocalModel {
    /// Exact principal value of the model over `(-h, h)`; the cotangent term
    /// is odd and drops out.
    pub fn window_integral(&self, h: f64) -> f64 {
        Series::from_coeffs(if self.regular.is_empty() { vec![0.0] } else { self.regular.clone() }).integrate(-h, h)
    }
}

/// Result of a principal-value integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PvValue {
    pub value: f64,
    pub error: f64,
}

/// `PV ∫_{-π}^{π} f(β) dβ` for an integrand with at most a cot-type singularity
/// at the origin. The window `(-h, h)`, `h = spec.local_window`, is replaced by
/// the local model; the rest is integrated adaptively.
pub fn pv_integral<F>(f: F, local: &LocalModel, spec: &QuadratureSpec) -> Result<PvValue, QuadratureError>
where
    F: Fn(f64) -> f64,
{
    spec.validate()?;
    let h = spec.local_window;
    let inner = local.window_integral(h);
    let g = |x: f64| [f(x)];
    let tol = spec.tolerance();
    let panels = vec![
        lobatto::Panel::sample(&g, -PI, -h),
        lobatto::Panel::sample(&g, h, PI),
    ];
    let out = lobatto::refine(&g, panels, [inner], tol)?;
    // error of the truncated Taylor model: size of the next term that was dropped
    let n = local.regular.len();
    let tail = local.regular.last().map(|c| c.abs() * 2.0 * h.powi(n as i32 + 1) / (n as f64 + 1.0)).unwrap_or(0.0);
    Ok(PvValue { value: out.value[0] + inner, error: out.error + tail })
}

/// Plain adaptive integral of a smooth function over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<PvValue, QuadratureError> {
    spec.validate()?;
    let (value, error) = lobatto::integrate_scalar(f, a, b, &[], spec.tolerance())?;
    Ok(PvValue { value, error })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cot_half(b: f64) -> f64 {
        (0.5 * b).cos() / (0.5 * b).sin()
    }

    #[test]
    fn pv_of_cot_vanishes() {
        let spec = QuadratureSpec::default();
        let local = LocalModel { cot_coeff: 1.0, regular: vec![] };
        let r = pv_integral(cot_half, &local, &spec).unwrap();
        assert!(r.value.abs() < 1e-12, "{}", r.value);
    }

    #[test]
    fn pv_of_cot_times_sine() {
        // cot(β/2) sin β = 1 + cos β = 2 - β²/2 + β⁴/24 - ...
        let spec = QuadratureSpec::default();
        let local = LocalModel { cot_coeff: 0.0, regular: vec![2.0, 0.0, -0.5, 0.0, 1.0 / 24.0, 0.0, -1.0 / 720.0] };
        let r = pv_integral(|b| cot_half(b) * b.sin(), &local, &spec).unwrap();
        // antiderivative β + sin β over [-π, π]
        let exact = (PI + PI.sin()) - (-PI + (-PI).sin());
        assert!((r.value - exact).abs() < 1e-10, "{} vs {exact}", r.value);
    }

    #[test]
    fn full_period_cosine() {
        let spec = QuadratureSpec::default();
        let r = integrate(|b| b.cos(), -PI, PI, &spec).unwrap();
        assert!(r.value.abs() < 1e-13);
    }

    #[test]
    fn spec_validation() {
        assert!(QuadratureSpec::default().validate().is_ok());
        let bad = QuadratureSpec { local_window: 1.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = QuadratureSpec { taylor_order: 5, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = QuadratureSpec { rel_tol: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
