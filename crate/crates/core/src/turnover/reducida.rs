//! The reduced integral
//! `(∂_α v₁)(0) = 2 ∂z₂(0) ∫₀^π sin z₁ sinh z₂ ∂z₁ / (cosh z₂ − cos z₁)² dβ`
//! for odd curves with a vertical tangent at the origin.

use std::f64::consts::PI;

use super::profile::OddCurve;
use crate::error::{QuadratureError, TurnoverError};
use crate::quadrature::lobatto::integrate_scalar;
use crate::quadrature::{QuadratureSpec, Series};

/// Integral over `[lo, hi] ⊂ [0, π]` with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Part {
    pub value: f64,
    pub error: f64,
}

/// The integrand (without the `2 ∂z₂(0)` prefactor); the denominator is
/// written as `4 (sinh²(z₂/2) + sin²(z₁/2))²` to avoid cancellation.
fn integrand<C: OddCurve + ?Sized>(curve: &C, beta: f64) -> f64 {
    let [z1, dz1, z2] = curve.eval(beta);
    if z2.abs() > 200.0 {
        // decays like e^{-|z₂|}; sinh alone would overflow
        return 0.0;
    }
    let s = (0.5 * z1).sin();
    let sh = (0.5 * z2).sinh();
    let d = s * s + sh * sh;
    z1.sin() * z2.sinh() * dz1 / (4.0 * d * d)
}

/// Series order used in the window at the origin.
const WINDOW_ORDER: usize = 12;

/// Integral of the series model over `[0, h]`, with the size of the last
/// retained term as error.
fn window<C: OddCurve + ?Sized>(curve: &C, h: f64, taylor_order: usize) -> Result<Part, TurnoverError> {
    let o = WINDOW_ORDER;
    let (z1, z2) = curve.taylor(o);
    let c = z1.coeffs();
    let scale = c.iter().skip(1).map(|x| x.abs()).fold(1.0, f64::max);
    if c[0].abs() > 1e-10 * scale || c[1].abs() > 1e-8 * scale {
        return Err(TurnoverError::NonRemovable(format!("z₁ must vanish to second order at 0 (z₁(0) = {:e}, ∂z₁(0) = {:e})", c[0], c[1])));
    }
    if z2.coeffs()[0].abs() > 1e-10 || z2.coeffs()[1] <= 0.0 {
        return Err(TurnoverError::NonRemovable(format!("need z₂(0) = 0 < ∂z₂(0), got {:e}, {:e}", z2.coeffs()[0], z2.coeffs()[1])));
    }
    // drop roundoff in the vanishing coefficients so the shifts are exact
    let z1 = Series::from_coeffs(std::iter::repeat_n(0.0, 2).chain(c[2..].iter().copied()).collect());
    let z2 = Series::from_coeffs(std::iter::once(0.0).chain(z2.coeffs()[1..].iter().copied()).collect());
    let dz1 = derivative(&z1);
    let s = z1.scale(0.5).sin();
    let sh = z2.scale(0.5).sinh();
    let d = &(&s * &s) + &(&sh * &sh);
    let num = &(&z1.sin() * &z2.sinh()) * &dz1;
    let den = (&d * &d).scale(4.0);
    // num = O(β⁶), den = O(β⁴)
    let q = num
        .shift_down(4)
        .div(&den.shift_down(4))
        .ok_or_else(|| TurnoverError::NonRemovable("degenerate denominator at the origin".into()))?
        .truncate(taylor_order + 2);
    let k = q.order();
    let last = q.coeffs()[k].abs() * h.powi(k as i32 + 1) / (k + 1) as f64;
    Ok(Part { value: q.integrate(0.0, h), error: last })
}

fn derivative(s: &Series) -> Series {
    let c = s.coeffs();
    let mut d: Vec<f64> = (1..c.len()).map(|k| k as f64 * c[k]).collect();
    d.push(0.0);
    Series::from_coeffs(d)
}

fn adaptive<C: OddCurve + ?Sized>(curve: &C, lo: f64, hi: f64, spec: &QuadratureSpec) -> Result<Part, TurnoverError> {
    if hi <= lo {
        return Ok(Part { value: 0.0, error: 0.0 });
    }
    let breaks: Vec<f64> = curve.breaks().into_iter().filter(|&b| b > lo && b < hi).collect();
    match integrate_scalar(|b| integrand(curve, b), lo, hi, &breaks, spec.tolerance()) {
        Ok((value, error)) => Ok(Part { value, error }),
        Err(QuadratureError::NonFinite { at }) => Err(TurnoverError::NonRemovable(format!("integrand blows up at beta = {at}"))),
        Err(e) => Err(e.into()),
    }
}

/// `∫_lo^hi` of the integrand (no prefactor); a window at the origin is
/// handled by series when `lo = 0`.
pub fn reduced_part<C: OddCurve + ?Sized>(curve: &C, lo: f64, hi: f64, spec: &QuadratureSpec) -> Result<Part, TurnoverError> {
    spec.validate()?;
    if lo > 0.0 {
        return adaptive(curve, lo, hi, spec);
    }
    // the series converges on a disc of radius ~ 1/∂z₂(0)
    let h = (0.1 * spec.local_window).min(0.1 / curve.dz2_at_zero().abs()).min(0.5 * hi);
    let w = window(curve, h, spec.taylor_order)?;
    let rest = adaptive(curve, h, hi, spec)?;
    Ok(Part { value: w.value + rest.value, error: w.error + rest.error })
}

/// `(∂_α v₁)(0)` and an error bound.
pub fn reducida<C: OddCurve + ?Sized>(curve: &C, spec: &QuadratureSpec) -> Result<Part, TurnoverError> {
    let c = curve.dz2_at_zero();
    if c == 0.0 {
        return Ok(Part { value: 0.0, error: 0.0 });
    }
    let p = reduced_part(curve, 0.0, PI, spec)?;
    Ok(Part { value: 2.0 * c * p.value, error: 2.0 * c.abs() * p.error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::turnover::profile::{Profile, ProfileCurve};

    #[test]
    fn window_agrees_with_direct_evaluation() {
        let p = Profile::Star { beta1: 1.0 };
        let c = ProfileCurve(&p);
        let h = 1e-2;
        let w = window(&c, h, 4).unwrap();
        let direct = integrate_scalar(|b| if b == 0.0 { 0.0 } else { integrand(&c, b) }, 0.0, h, &[], QuadratureSpec::default().tolerance()).unwrap();
        assert!((w.value - direct.0).abs() < 1e-10 * direct.0.abs(), "{} vs {}", w.value, direct.0);
    }

    #[test]
    fn zero_slope_gives_zero() {
        struct Flat;
        impl OddCurve for Flat {
            fn eval(&self, b: f64) -> [f64; 3] {
                [b - b.sin(), 1.0 - b.cos(), 0.0]
            }
            fn taylor(&self, o: usize) -> (Series, Series) {
                (crate::turnover::profile::z1_taylor(o), Series::constant(0.0, o))
            }
            fn dz2_at_zero(&self) -> f64 {
                0.0
            }
        }
        assert_eq!(reducida(&Flat, &QuadratureSpec::default()).unwrap().value, 0.0);
    }

    #[test]
    fn non_vertical_tangent_is_rejected() {
        struct Tilted;
        impl OddCurve for Tilted {
            fn eval(&self, b: f64) -> [f64; 3] {
                [b, 1.0, b.sin()]
            }
            fn taylor(&self, o: usize) -> (Series, Series) {
                (Series::variable(o), Series::variable(o).sin())
            }
            fn dz2_at_zero(&self) -> f64 {
                1.0
            }
        }
        assert!(matches!(reducida(&Tilted, &QuadratureSpec::default()), Err(TurnoverError::NonRemovable(_))));
    }
}
