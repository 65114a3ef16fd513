//! Odd height profiles `z₂(β)` in closed form, and curves built from them.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::curve::{Curve, PeriodicField, PeriodicGrid, Spectrum};
use crate::error::CurveError;
use crate::quadrature::Series;

/// Taylor series at 0 of `Σ c_k sin(kβ)` up to `order`.
fn sine_taylor(modes: impl Iterator<Item = (f64, f64)>, order: usize) -> Series {
    let mut c = vec![0.0; order + 1];
    for (k, ck) in modes {
        // sin(kβ) = Σ_j (-1)^j (kβ)^{2j+1} / (2j+1)!
        let mut term = ck * k;
        let mut p = 1;
        while p <= order {
            c[p] += term;
            term *= -k * k / ((p + 1) * (p + 2)) as f64;
            p += 2;
        }
    }
    Series::from_coeffs(c)
}

/// An odd 2π-periodic profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Profile {
    /// `z*(β) = sin β (cos β − cos β₁)`
    Star { beta1: f64 },
    /// `b·base` on `|β| ≤ β₁`, `base` elsewhere
    Tilde { base: Box<Profile>, beta1: f64, b: f64 },
    /// `Σ_{k ≥ 1} c_k sin(kβ)` with `coeffs[k - 1] = c_k`
    Sine { coeffs: Vec<f64> },
}

fn star(beta1: f64, x: f64) -> (f64, f64) {
    let (s, c) = x.sin_cos();
    let c1 = beta1.cos();
    (s * (c - c1), c * (c - c1) - s * s)
}

impl Profile {
    /// Value and derivative at `β`.
    pub fn eval(&self, beta: f64) -> (f64, f64) {
        match self {
            Profile::Star { beta1 } => star(*beta1, beta),
            Profile::Tilde { base, beta1, b } => {
                let (v, d) = base.eval(beta);
                let x = crate::curve::PeriodicGrid::wrap(beta).abs();
                if x <= *beta1 {
                    (b * v, b * d)
                } else {
                    (v, d)
                }
            }
            Profile::Sine { coeffs } => coeffs.iter().enumerate().fold((0.0, 0.0), |(v, d), (j, c)| {
                let k = (j + 1) as f64;
                let (s, co) = (k * beta).sin_cos();
                (v + c * s, d + c * k * co)
            }),
        }
    }

    pub fn value(&self, beta: f64) -> f64 {
        self.eval(beta).0
    }

    /// `∂_β z₂(0)`.
    pub fn slope_at_zero(&self) -> f64 {
        self.eval(0.0).1
    }

    /// Taylor series at 0 up to `order`.
    pub fn taylor(&self, order: usize) -> Series {
        match self {
            Profile::Star { beta1 } => sine_taylor([(1.0, -beta1.cos()), (2.0, 0.5)].into_iter(), order),
            Profile::Tilde { base, b, .. } => base.taylor(order).scale(*b),
            Profile::Sine { coeffs } => sine_taylor(coeffs.iter().enumerate().map(|(j, &c)| ((j + 1) as f64, c)), order),
        }
    }

    /// Points in `(0, π)` where the profile is not analytic.
    pub fn breaks(&self) -> Vec<f64> {
        match self {
            Profile::Tilde { base, beta1, .. } => {
                let mut v = base.breaks();
                v.push(*beta1);
                v.sort_by(|a, b| a.total_cmp(b));
                v
            }
            _ => Vec::new(),
        }
    }

    pub fn sample(&self, grid: Arc<PeriodicGrid>) -> PeriodicField {
        PeriodicField::from_fn(grid, |a| self.value(a))
    }
}

/// Samples of `z₁ − α = −sin α`.
pub fn build_z1(grid: Arc<PeriodicGrid>) -> PeriodicField {
    PeriodicField::from_fn(grid, |a| -a.sin())
}

/// The curve `(β − sin β, z₂(β))` on a uniform grid of `n` nodes.
pub fn profile_curve(profile: &Profile, n: usize, delta_rho: f64) -> Result<Curve, CurveError> {
    let grid = Arc::new(PeriodicGrid::uniform(n)?);
    Curve::new(build_z1(grid.clone()), profile.sample(grid), delta_rho)
}

/// An odd curve known well enough to evaluate the reduced integral:
/// `z₁`, `∂z₁`, `z₂` at any `β`, and Taylor series at the origin.
pub trait OddCurve: Sync {
    fn eval(&self, beta: f64) -> [f64; 3];
    /// Taylor series of `(z₁, z₂)` at 0 up to `order`.
    fn taylor(&self, order: usize) -> (Series, Series);
    fn dz2_at_zero(&self) -> f64;
    fn breaks(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// `z₁ = β − sin β` with a closed-form `z₂`.
#[derive(Debug, Clone)]
pub struct ProfileCurve<'a>(pub &'a Profile);

pub(crate) fn z1_taylor(order: usize) -> Series {
    // β − sin β
    &Series::variable(order) - &sine_taylor(std::iter::once((1.0, 1.0)), order)
}

impl OddCurve for ProfileCurve<'_> {
    fn eval(&self, beta: f64) -> [f64; 3] {
        let (s, c) = beta.sin_cos();
        [beta - s, 1.0 - c, self.0.value(beta)]
    }

    fn taylor(&self, order: usize) -> (Series, Series) {
        (z1_taylor(order), self.0.taylor(order))
    }

    fn dz2_at_zero(&self) -> f64 {
        self.0.slope_at_zero()
    }

    fn breaks(&self) -> Vec<f64> {
        self.0.breaks()
    }
}

/// The trigonometric interpolant of a sampled curve on a uniform grid.
#[derive(Debug, Clone)]
pub struct SpectralCurve {
    p: Spectrum,
    q: Spectrum,
}

impl SpectralCurve {
    pub fn new(curve: &Curve) -> Result<Self, CurveError> {
        Ok(Self { p: curve.z1_minus_alpha().spectrum()?, q: curve.z2().spectrum()? })
    }

    /// Relative size of the even (cosine) part of both components.
    pub fn even_part(&self) -> f64 {
        let (mut even, mut all) = (0.0, 0.0);
        for s in [&self.p, &self.q] {
            for c in s.coeffs() {
                even += c.re * c.re;
                all += c.norm_sqr();
            }
        }
        if all == 0.0 {
            0.0
        } else {
            (even / all).sqrt()
        }
    }

    /// `m`-th derivative at 0: `Σ A_k (ik)^m` over the paired modes.
    fn derivative_at_zero(s: &Spectrum, m: u32) -> f64 {
        let mut acc = 0.0;
        for idx in 0..s.len() {
            if s.is_nyquist(idx) {
                continue;
            }
            let k = s.wavenumber(idx) as f64;
            let ik = num_complex::Complex64::new(0.0, k).powu(m);
            acc += (s.coeffs()[idx] * ik).re;
        }
        acc
    }

    fn series(s: &Spectrum, order: usize) -> Series {
        let mut fact = 1.0;
        let c = (0..=order)
            .map(|m| {
                if m > 0 {
                    fact *= m as f64;
                }
                Self::derivative_at_zero(s, m as u32) / fact
            })
            .collect();
        Series::from_coeffs(c)
    }
}

impl OddCurve for SpectralCurve {
    fn eval(&self, beta: f64) -> [f64; 3] {
        let mut p = 0.0;
        let mut dp = 0.0;
        let mut q = 0.0;
        let n = self.p.len();
        for idx in 0..n {
            let k = self.p.wavenumber(idx) as f64;
            let half = if self.p.is_nyquist(idx) { 0.0 } else { 1.0 };
            let (s, c) = (k * beta).sin_cos();
            let (a, b) = (self.p.coeffs()[idx], self.q.coeffs()[idx]);
            // Re(A e^{ikβ}) and its derivative
            p += half * (a.re * c - a.im * s);
            dp += half * k * (-a.re * s - a.im * c);
            q += half * (b.re * c - b.im * s);
        }
        [beta + p, 1.0 + dp, q]
    }

    fn taylor(&self, order: usize) -> (Series, Series) {
        (&Series::variable(order) + &Self::series(&self.p, order), Self::series(&self.q, order))
    }

    fn dz2_at_zero(&self) -> f64 {
        Self::derivative_at_zero(&self.q, 1)
    }
}

/// `(2/π) ∫₀^π z(β) sin(kβ) dβ` for an odd profile, `k = 1..=n_modes`.
pub(crate) fn sine_coefficients(profile: &Profile, n_modes: usize, spec: &crate::quadrature::QuadratureSpec) -> Result<Vec<f64>, crate::error::QuadratureError> {
    let mut breaks = profile.breaks();
    breaks.insert(0, 0.0);
    breaks.push(PI);
    (1..=n_modes)
        .map(|k| {
            let kk = k as f64;
            let mut total = 0.0;
            for w in breaks.windows(2) {
                // resolve the oscillation: about one panel per half period
                let pieces = ((w[1] - w[0]) * kk / PI).ceil().max(1.0) as usize;
                for j in 0..pieces {
                    let a = w[0] + (w[1] - w[0]) * j as f64 / pieces as f64;
                    let b = w[0] + (w[1] - w[0]) * (j + 1) as f64 / pieces as f64;
                    total += crate::quadrature::integrate(|x| profile.value(x) * (kk * x).sin(), a, b, spec)?.value;
                }
            }
            Ok(2.0 / PI * total)
        })
        .collect()
}
