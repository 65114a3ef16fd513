//! The concrete integrands.

use super::kernel::{curv_drop, series_quotient_integral, slope_drop, value_drop, Kernel, Local, Point};
use crate::quadrature::Series;

/// Below this (relative to the squared half arc) the chord denominators
/// count as a collision.
const FLOOR: f64 = 0.25 * crate::curve::ARC_CHORD_FLOOR;

/// Collision threshold for the pair `(t, s)`: scaled by the parameter
/// distance so that legitimate near-diagonal evaluations pass.
#[inline]
fn floor(t: &Point, s: &Point) -> f64 {
    let r = (t.s - s.s).abs();
    let r = 0.5 * r.min(std::f64::consts::TAU - r);
    FLOOR * (r * r).min(1.0)
}

/// The interaction integrand in tangent form,
/// `(u'(α) - v'(s)) tan(β/2)(1 - T²) / (tan²(β/2) + T²)` with `β = α - s` and
/// `T = tanh((u(α) - v(s))/2)`, multiplied through by `cos²(β/2)`.
pub(crate) struct Interaction;

impl Kernel<1> for Interaction {
    #[inline]
    fn eval(&self, t: &Point, s: &Point) -> [f64; 1] {
        let sb = t.hs * s.hc - t.hc * s.hs;
        let cb = t.hc * s.hc + t.hs * s.hs;
        // with T = tanh((u - v)/2) = (e^u - e^v)/(e^u + e^v), cleared of (e^u + e^v)²
        let sum = t.ex[0] + s.ex[0];
        let dif = t.ex[0] - s.ex[0];
        let den = sb * sb * sum * sum + dif * dif * cb * cb;
        if den <= floor(t, s) * sum * sum {
            return [f64::INFINITY];
        }
        [(t.dv[0] - s.dv[0]) * sb * cb * 4.0 * t.ex[0] * s.ex[0] / den]
    }

    fn window(&self, _t: &Point, local: &[Local], lo: f64, hi: f64, order: usize) -> ([f64; 1], f64) {
        let o = order + 2;
        let c = &local[0];
        let (sb, cb) = Series::variable(o).scale(-0.5).sin_cos();
        let tt = value_drop(c, o).scale(0.5).tanh();
        let tt2 = &tt * &tt;
        let one_minus = &Series::constant(1.0, o) - &tt2;
        let num = &(&(&slope_drop(c, o) * &sb) * &cb) * &one_minus;
        let den = &(&sb * &sb) + &(&tt2 * &(&cb * &cb));
        let (v, e) = series_quotient_integral(&num, &den, 2, lo, hi);
        ([v], e)
    }
}

/// Potential of the interaction between two separated graphs:
/// `σβ + 2σ atan2(-sin(β/2), σ T cos(β/2))` with `β = α - s` wrapped to
/// `(-π, π]`, `T = tanh((u(α) - v(s))/2)` and `σ` the sign of `u - v`.
/// The atan2 term is twice a continuous argument of
/// `sin(β/2) + i T cos(β/2)` (its cut lies where that curve never goes, even
/// where `u(α) = v(s)` away from `s = α`), and `σβ` removes its `2π` seam at
/// `β = ±π`. Its `α`-derivative integrates to the interaction integral.
pub(crate) struct CrossPotential {
    pub sign: f64,
}

impl Kernel<1> for CrossPotential {
    #[inline]
    fn eval(&self, t: &Point, s: &Point) -> [f64; 1] {
        let x = t.s - s.s;
        let beta = x - std::f64::consts::TAU * (x / std::f64::consts::TAU).round();
        let (sb, cb) = (0.5 * beta).sin_cos();
        let tt = (0.5 * (t.v[0] - s.v[0])).tanh();
        let sg = self.sign;
        [sg * beta + 2.0 * sg * (-sb).atan2(sg * tt * cb)]
    }
}

/// The periodic contour integrand
/// `sin(Δz₁)(∂z(α) - ∂z(s)) / (cosh Δz₂ - cos Δz₁)` in half-angle form
/// (without the `Δρ/4π` prefactor).
pub(crate) struct Contour;

impl Kernel<2> for Contour {
    #[inline]
    fn eval(&self, t: &Point, s: &Point) -> [f64; 2] {
        let s1 = t.hs * s.hc - t.hc * s.hs;
        let c1 = t.hc * s.hc + t.hs * s.hs;
        let sh = 0.5 * (t.ex[0] * s.ex[1] - t.ex[1] * s.ex[0]);
        let den = s1 * s1 + sh * sh;
        if den <= floor(t, s) {
            return [f64::INFINITY; 2];
        }
        let k = s1 * c1 / den;
        [k * (t.dv[0] - s.dv[0]), k * (t.dv[1] - s.dv[1])]
    }

    fn window(&self, _t: &Point, local: &[Local], lo: f64, hi: f64, order: usize) -> ([f64; 2], f64) {
        let o = order + 2;
        let (p, q) = (&local[0], &local[1]);
        let dz1 = &value_drop(p, o) - &Series::variable(o);
        let (s1, c1) = dz1.scale(0.5).sin_cos();
        let sh = value_drop(q, o).scale(0.5).sinh();
        let kn = &s1 * &c1;
        let den = &(&s1 * &s1) + &(&sh * &sh);
        let (a, ea) = series_quotient_integral(&(&kn * &slope_drop(p, o)), &den, 2, lo, hi);
        let (b, eb) = series_quotient_integral(&(&kn * &slope_drop(q, o)), &den, 2, lo, hi);
        ([a, b], ea.max(eb))
    }
}

/// The real-line graph integrand
/// `(α - x)(f'(α) - f'(x)) / ((α - x)² + (f(α) - f(x))²)`.
pub(crate) struct RealLine;

impl Kernel<1> for RealLine {
    #[inline]
    fn eval(&self, t: &Point, s: &Point) -> [f64; 1] {
        let dx = t.s - s.s;
        let d = t.v[0] - s.v[0];
        [dx * (t.dv[0] - s.dv[0]) / (dx * dx + d * d)]
    }

    fn window(&self, _t: &Point, local: &[Local], lo: f64, hi: f64, order: usize) -> ([f64; 1], f64) {
        let o = order + 2;
        let c = &local[0];
        let dx = Series::variable(o).scale(-1.0);
        let d = value_drop(c, o);
        let num = &dx * &slope_drop(c, o);
        let den = &(&dx * &dx) + &(&d * &d);
        let (v, e) = series_quotient_integral(&num, &den, 2, lo, hi);
        ([v], e)
    }
}

/// `α`-derivative of the horizontal contour velocity integrand:
/// `[cos Δ₁ (ΔA)² + sin Δ₁ ΔC] / D - sin Δ₁ ΔA (sinh Δ₂ ΔB + sin Δ₁ ΔA) / D²`
/// with `D = cosh Δ₂ - cos Δ₁`, `A = ∂z₁`, `B = ∂z₂`, `C = ∂²z₁`.
pub(crate) struct SlopeOfV1;

impl Kernel<1> for SlopeOfV1 {
    #[inline]
    fn eval(&self, t: &Point, s: &Point) -> [f64; 1] {
        let s1 = t.hs * s.hc - t.hc * s.hs;
        let c1 = t.hc * s.hc + t.hs * s.hs;
        let sh = 0.5 * (t.ex[0] * s.ex[1] - t.ex[1] * s.ex[0]);
        let ch = 0.5 * (t.ex[0] * s.ex[1] + t.ex[1] * s.ex[0]);
        let sin1 = 2.0 * s1 * c1;
        let cos1 = 1.0 - 2.0 * s1 * s1;
        let d = 2.0 * (s1 * s1 + sh * sh);
        if d <= 2.0 * floor(t, s) {
            return [f64::INFINITY];
        }
        let a = t.dv[0] - s.dv[0];
        let b = t.dv[1] - s.dv[1];
        let c = t.ddv[0] - s.ddv[0];
        let sinh2 = 2.0 * sh * ch;
        [(cos1 * a * a + sin1 * c) / d - sin1 * a * (sinh2 * b + sin1 * a) / (d * d)]
    }

    fn window(&self, _t: &Point, local: &[Local], lo: f64, hi: f64, order: usize) -> ([f64; 1], f64) {
        let o = order + 4;
        let (p, q) = (&local[0], &local[1]);
        let dz1 = &value_drop(p, o) - &Series::variable(o);
        let (s1, c1) = dz1.scale(0.5).sin_cos();
        let (sh, ch) = value_drop(q, o).scale(0.5).sinh_cosh();
        let sin1 = (&s1 * &c1).scale(2.0);
        let cos1 = &Series::constant(1.0, o) - &(&s1 * &s1).scale(2.0);
        let d = (&(&s1 * &s1) + &(&sh * &sh)).scale(2.0);
        let sinh2 = (&sh * &ch).scale(2.0);
        let a = slope_drop(p, o);
        let b = slope_drop(q, o);
        let c = curv_drop(p, o);
        let first = &(&(&cos1 * &(&a * &a)) + &(&sin1 * &c)) * &d;
        let second = &(&sin1 * &a) * &(&(&sinh2 * &b) + &(&sin1 * &a));
        let num = &first - &second;
        let den = &d * &d;
        let (v, e) = series_quotient_integral(&num, &den, 4, lo, hi);
        ([v], e)
    }
}
