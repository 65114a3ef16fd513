//! Globally adaptive Gauss-Lobatto quadrature with a Kronrod extension.
//!
//! Each panel carries the 4-point Lobatto rule and its 7-point Kronrod
//! extension (the pair used by adaptive Lobatto codes such as `quadl`); the
//! difference of the two is the panel error estimate, and refinement splits
//! a panel at its own Kronrod nodes so that every function value is reused.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::QuadratureError;

const ALPHA: f64 = 0.816_496_580_927_726_1; // sqrt(2/3)
const BETA: f64 = 0.447_213_595_499_957_9; // 1/sqrt(5)

/// Kronrod abscissae on `[-1, 1]`; entries 0 and 6 are the panel ends.
pub const ABSCISSAE: [f64; 7] = [-1.0, -ALPHA, -BETA, 0.0, BETA, ALPHA, 1.0];

#[inline]
pub fn node(a: f64, b: f64, k: usize) -> f64 {
    match k {
        0 => a,
        6 => b,
        _ => 0.5 * (a + b) + 0.5 * (b - a) * ABSCISSAE[k],
    }
}

/// A panel with the integrand sampled at its seven Kronrod nodes.
#[derive(Debug, Clone)]
pub struct Panel<const M: usize> {
    pub a: f64,
    pub b: f64,
    pub f: [[f64; M]; 7],
}

impl<const M: usize> Panel<M> {
    pub fn sample<F: Fn(f64) -> [f64; M]>(f: &F, a: f64, b: f64) -> Self {
        let fa = f(a);
        let fb = f(b);
        Self::with_ends(f, a, b, fa, fb)
    }

    pub fn with_ends<F: Fn(f64) -> [f64; M]>(f: &F, a: f64, b: f64, fa: [f64; M], fb: [f64; M]) -> Self {
        let mut vals = [[0.0; M]; 7];
        vals[0] = fa;
        vals[6] = fb;
        for (k, v) in vals.iter_mut().enumerate().take(6).skip(1) {
            *v = f(node(a, b, k));
        }
        Self { a, b, f: vals }
    }

    /// Kronrod value and `|Kronrod - Lobatto|` (max over components).
    pub fn estimate(&self) -> ([f64; M], f64) {
        let h = 0.5 * (self.b - self.a);
        let y = &self.f;
        let mut kr = [0.0; M];
        let mut err = 0.0f64;
        for m in 0..M {
            let lob = h / 6.0 * (y[0][m] + y[6][m] + 5.0 * (y[2][m] + y[4][m]));
            let k7 = h / 1470.0
                * (77.0 * (y[0][m] + y[6][m])
                    + 432.0 * (y[1][m] + y[5][m])
                    + 625.0 * (y[2][m] + y[4][m])
                    + 672.0 * y[3][m]);
            kr[m] = k7;
            err = err.max((k7 - lob).abs());
        }
        (kr, err)
    }

    fn finite(&self) -> Option<f64> {
        for (k, row) in self.f.iter().enumerate() {
            if row.iter().any(|v| !v.is_finite()) {
                return Some(node(self.a, self.b, k));
            }
        }
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_panels: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome<const M: usize> {
    pub value: [f64; M],
    pub error: f64,
    pub panels: usize,
}

struct Ranked<const M: usize> {
    err: f64,
    value: [f64; M],
    panel: Panel<M>,
}

impl<const M: usize> PartialEq for Ranked<M> {
    fn eq(&self, other: &Self) -> bool {
        self.err.total_cmp(&other.err) == Ordering::Equal
    }
}
impl<const M: usize> Eq for Ranked<M> {}
impl<const M: usize> PartialOrd for Ranked<M> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<const M: usize> Ord for Ranked<M> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err).then_with(|| other.panel.a.total_cmp(&self.panel.a))
    }
}

/// Refine `initial` panels until `Σ err <= max(tol.abs, tol.rel |Σ value|)`.
///
/// `offset` is added to the running value when forming the relative target
/// (callers with an analytically integrated piece pass it here); it is not
/// part of the returned value. Panels in the returned sum are in order of
/// their left end, so the result does not depend on the refinement history.
pub fn refine<const M: usize, F>(
    f: &F,
    initial: Vec<Panel<M>>,
    offset: [f64; M],
    tol: Tolerance,
) -> Result<Outcome<M>, QuadratureError>
where
    F: Fn(f64) -> [f64; M],
{
    let mut total_err = 0.0;
    let mut total = offset;
    let mut ranked = Vec::with_capacity(initial.len());
    for p in initial {
        if let Some(at) = p.finite() {
            return Err(QuadratureError::NonFinite { at });
        }
        let (v, e) = p.estimate();
        total_err += e;
        for m in 0..M {
            total[m] += v[m];
        }
        ranked.push(Ranked { err: e, value: v, panel: p });
    }
    // common case: the initial partition is already good enough
    let scale = total.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    if total_err <= tol.abs.max(tol.rel * scale) {
        let mut value = [0.0; M];
        for r in &ranked {
            for m in 0..M {
                value[m] += r.value[m];
            }
        }
        return Ok(Outcome { value, error: total_err, panels: ranked.len() });
    }
    let mut heap = BinaryHeap::from(ranked);
    let mut frozen: Vec<Ranked<M>> = Vec::new();

    loop {
        let scale = total.iter().fold(0.0f64, |s, v| s.max(v.abs()));
        let target = tol.abs.max(tol.rel * scale);
        if total_err <= target {
            break;
        }
        if heap.len() + frozen.len() >= tol.max_panels {
            let worst = heap.peek().map(|r| (r.panel.a, r.panel.b, r.err)).unwrap_or((0.0, 0.0, total_err));
            return Err(QuadratureError::NonConvergence { a: worst.0, b: worst.1, error: total_err, target });
        }
        let Some(worst) = heap.pop() else { break };
        let p = &worst.panel;
        let width = p.b - p.a;
        if width <= 64.0 * f64::EPSILON * (1.0 + p.a.abs().max(p.b.abs())) {
            // cannot split further; keep its contribution as is
            total_err -= worst.err;
            frozen.push(worst);
            if heap.is_empty() {
                break;
            }
            continue;
        }
        total_err -= worst.err;
        for m in 0..M {
            total[m] -= worst.value[m];
        }
        for k in 0..6 {
            let a = node(p.a, p.b, k);
            let b = node(p.a, p.b, k + 1);
            let child = Panel::with_ends(f, a, b, p.f[k], p.f[k + 1]);
            if let Some(at) = child.finite() {
                return Err(QuadratureError::NonFinite { at });
            }
            let (v, e) = child.estimate();
            total_err += e;
            for m in 0..M {
                total[m] += v[m];
            }
            heap.push(Ranked { err: e, value: v, panel: child });
        }
    }

    // deterministic re-summation in panel order
    let mut all: Vec<Ranked<M>> = heap.into_vec();
    all.extend(frozen);
    all.sort_by(|x, y| x.panel.a.total_cmp(&y.panel.a));
    let mut value = [0.0; M];
    let mut error = 0.0;
    for r in &all {
        for m in 0..M {
            value[m] += r.value[m];
        }
        error += r.err;
    }
    Ok(Outcome { value, error, panels: all.len() })
}

/// Adaptive integral of `f` over `[a, b]` split at `breaks` (which may be unsorted
/// and may fall outside the interval).
pub fn integrate<const M: usize, F>(f: &F, a: f64, b: f64, breaks: &[f64], tol: Tolerance) -> Result<Outcome<M>, QuadratureError>
where
    F: Fn(f64) -> [f64; M],
{
    let mut pts: Vec<f64> = vec![a, b];
    pts.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let panels = pts.windows(2).map(|w| Panel::sample(f, w[0], w[1])).collect();
    refine(f, panels, [0.0; M], tol)
}

pub fn integrate_scalar<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breaks: &[f64], tol: Tolerance) -> Result<(f64, f64), QuadratureError> {
    let g = |x: f64| [f(x)];
    let out = integrate(&g, a, b, breaks, tol)?;
    Ok((out.value[0], out.error))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const TOL: Tolerance = Tolerance { abs: 1e-13, rel: 1e-12, max_panels: 10_000 };

    #[test]
    fn polynomials_up_to_degree_nine_are_exact_on_one_panel() {
        let f = |x: f64| [x.powi(9) + 3.0 * x.powi(8) - x];
        let p = Panel::sample(&f, -1.0, 2.0);
        let (v, _) = p.estimate();
        let exact = (2f64.powi(10) - 1.0) / 10.0 + 3.0 * (2f64.powi(9) + 1.0) / 9.0 - (4.0 - 1.0) / 2.0;
        assert!((v[0] - exact).abs() < 1e-11 * exact.abs());
    }

    #[test]
    fn peaked_integrand_converges() {
        let eps = 1e-3;
        let (v, err) = integrate_scalar(|x| eps / (x * x + eps * eps), -1.0, 1.0, &[], TOL).unwrap();
        let exact = 2.0 * (1.0 / eps).atan();
        assert!((v - exact).abs() < 1e-10, "{v} vs {exact} (err {err})");
    }

    #[test]
    fn vector_integrand_and_breaks() {
        let f = |x: f64| [x.sin(), x.abs()];
        let out = integrate(&f, -PI, PI, &[0.0], TOL).unwrap();
        assert!(out.value[0].abs() < 1e-13);
        assert!((out.value[1] - PI * PI).abs() < 1e-12);
    }

    #[test]
    fn budget_exhaustion_reports_nonconvergence() {
        let tight = Tolerance { abs: 1e-15, rel: 0.0, max_panels: 20 };
        let r = integrate_scalar(|x| 1.0 / x.abs().sqrt().max(1e-300), 0.0, 1.0, &[], tight);
        assert!(matches!(r, Err(QuadratureError::NonConvergence { .. }) | Err(QuadratureError::NonFinite { .. })));
    }
}
