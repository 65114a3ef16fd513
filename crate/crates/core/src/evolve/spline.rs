//! Periodic cubic splines on nonuniform nodes.
//!
//! The interpolant is C² on the circle; each piece is stored as a cubic in the
//! local offset from its left node so that exact local Taylor data is available
//! to the singular-integral kernels.

use crate::curve::PeriodicField;
use crate::error::CurveError;

/// `c0 + c1 t + c2 t^2 + c3 t^3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cubic {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl Cubic {
    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        self.c0 + t * (self.c1 + t * (self.c2 + t * self.c3))
    }

    #[inline]
    pub fn deriv(&self, t: f64) -> f64 {
        self.c1 + t * (2.0 * self.c2 + 3.0 * t * self.c3)
    }

    #[inline]
    pub fn second(&self, t: f64) -> f64 {
        2.0 * self.c2 + 6.0 * self.c3 * t
    }

    /// The same polynomial re-expanded about `t = tau`.
    pub fn shifted(&self, tau: f64) -> Cubic {
        Cubic {
            c0: self.eval(tau),
            c1: self.deriv(tau),
            c2: self.c2 + 3.0 * self.c3 * tau,
            c3: self.c3,
        }
    }

    /// `(p(0) - p(t)) / t`, exact and cancellation free.
    #[inline]
    pub fn neg_divided(&self, t: f64) -> f64 {
        -(self.c1 + t * (self.c2 + t * self.c3))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicSpline {
    x: Vec<f64>,
    period: f64,
    h: Vec<f64>,
    pieces: Vec<Cubic>,
}

impl PeriodicSpline {
    /// Interpolate `y` at strictly increasing nodes `x` spanning less than one period.
    pub fn new(x: Vec<f64>, y: Vec<f64>, period: f64) -> Result<Self, CurveError> {
        let n = x.len();
        if n < 4 {
            return Err(CurveError::TooFewNodes { min: 4, got: n });
        }
        if y.len() != n {
            return Err(CurveError::LengthMismatch { expected: n, got: y.len() });
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(CurveError::NonFinite(i));
        }
        let mut h = Vec::with_capacity(n);
        for i in 0..n {
            let next = if i + 1 < n { x[i + 1] } else { x[0] + period };
            let hi = next - x[i];
            if hi <= 0.0 || !hi.is_finite() {
                return Err(CurveError::DuplicateNodes(i, (i + 1) % n));
            }
            h.push(hi);
        }

        // h_{i-1} M_{i-1} + 2 (h_{i-1} + h_i) M_i + h_i M_{i+1} = r_i
        let mut sub = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut sup = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        for i in 0..n {
            let im = (i + n - 1) % n;
            let ip = (i + 1) % n;
            sub[i] = h[im];
            diag[i] = 2.0 * (h[im] + h[i]);
            sup[i] = h[i];
            rhs[i] = 6.0 * ((y[ip] - y[i]) / h[i] - (y[i] - y[im]) / h[im]);
        }
        let m = solve_cyclic(&sub, &diag, &sup, h[n - 1], h[n - 1], &rhs);

        let pieces = (0..n)
            .map(|i| {
                let ip = (i + 1) % n;
                Cubic {
                    c0: y[i],
                    c1: (y[ip] - y[i]) / h[i] - h[i] * (2.0 * m[i] + m[ip]) / 6.0,
                    c2: 0.5 * m[i],
                    c3: (m[ip] - m[i]) / (6.0 * h[i]),
                }
            })
            .collect();
        Ok(Self { x, period, h, pieces })
    }

    pub fn from_field(field: &PeriodicField) -> Result<Self, CurveError> {
        Self::new(
            field.grid().alphas().to_vec(),
            field.values().to_vec(),
            2.0 * std::f64::consts::PI,
        )
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.x
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn width(&self, i: usize) -> f64 {
        self.h[i]
    }

    pub fn piece(&self, i: usize) -> &Cubic {
        &self.pieces[i]
    }

    /// Piece `i - 1` re-expanded about node `i` (its right end), so that the
    /// local offset is negative on that piece.
    pub fn left_piece_about(&self, i: usize) -> Cubic {
        let n = self.len();
        let im = (i + n - 1) % n;
        self.pieces[im].shifted(self.h[im])
    }

    /// Piece index and local offset of `x` (wrapped periodically).
    pub fn locate(&self, x: f64) -> (usize, f64) {
        let x0 = self.x[0];
        let mut u = (x - x0).rem_euclid(self.period);
        if u >= self.period {
            u = 0.0;
        }
        let i = self.x.partition_point(|&xi| xi - x0 <= u).saturating_sub(1);
        (i, u - (self.x[i] - x0))
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (i, t) = self.locate(x);
        self.pieces[i].eval(t)
    }

    pub fn deriv(&self, x: f64) -> f64 {
        let (i, t) = self.locate(x);
        self.pieces[i].deriv(t)
    }

    pub fn second(&self, x: f64) -> f64 {
        let (i, t) = self.locate(x);
        self.pieces[i].second(t)
    }

    pub fn node_values(&self) -> Vec<f64> {
        self.pieces.iter().map(|p| p.c0).collect()
    }

    pub fn node_derivatives(&self) -> Vec<f64> {
        self.pieces.iter().map(|p| p.c1).collect()
    }

    pub fn node_second_derivatives(&self) -> Vec<f64> {
        self.pieces.iter().map(|p| 2.0 * p.c2).collect()
    }

    /// Exact integral of the interpolant over one period.
    pub fn integral(&self) -> f64 {
        self.pieces
            .iter()
            .zip(&self.h)
            .map(|(p, &h)| h * (p.c0 + h * (p.c1 / 2.0 + h * (p.c2 / 3.0 + h * p.c3 / 4.0))))
            .sum()
    }

    /// Exact maximum of |S| over the period (piecewise critical points).
    pub fn max_abs(&self) -> f64 {
        let mut best = 0.0f64;
        for (p, &h) in self.pieces.iter().zip(&self.h) {
            best = best.max(p.c0.abs()).max(p.eval(h).abs());
            for t in quadratic_roots(3.0 * p.c3, 2.0 * p.c2, p.c1) {
                if t > 0.0 && t < h {
                    best = best.max(p.eval(t).abs());
                }
            }
        }
        best
    }

    pub fn resample(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.eval(x)).collect()
    }
}

fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    if a.abs() < 1e-300 {
        if b.abs() < 1e-300 {
            return Vec::new();
        }
        return vec![-c / b];
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Vec::new();
    }
    let sq = disc.sqrt();
    let q = -0.5 * (b + b.signum() * sq);
    let mut r = vec![q / a];
    if q != 0.0 {
        r.push(c / q);
    }
    r
}

fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut cp = vec![0.0; n];
    let mut dp = vec![0.0; n];
    cp[0] = sup[0] / diag[0];
    dp[0] = rhs[0] / diag[0];
    for i in 1..n {
        let denom = diag[i] - sub[i] * cp[i - 1];
        cp[i] = sup[i] / denom;
        dp[i] = (rhs[i] - sub[i] * dp[i - 1]) / denom;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = dp[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = dp[i] - cp[i] * x[i + 1];
    }
    x
}

/// Cyclic tridiagonal solve via Sherman-Morrison. `lower_corner` is
/// `A[n-1][0]`, `upper_corner` is `A[0][n-1]`.
fn solve_cyclic(
    sub: &[f64],
    diag: &[f64],
    sup: &[f64],
    lower_corner: f64,
    upper_corner: f64,
    rhs: &[f64],
) -> Vec<f64> {
    let n = diag.len();
    let gamma = -diag[0];
    let mut bb = diag.to_vec();
    bb[0] -= gamma;
    bb[n - 1] -= lower_corner * upper_corner / gamma;
    let x = solve_tridiagonal(sub, &bb, sup, rhs);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = lower_corner;
    let z = solve_tridiagonal(sub, &bb, sup, &u);
    let fact = (x[0] + upper_corner * x[n - 1] / gamma) / (1.0 + z[0] + upper_corner * z[n - 1] / gamma);
    x.iter().zip(&z).map(|(xi, zi)| xi - fact * zi).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn uniform(n: usize) -> Vec<f64> {
        (0..n).map(|i| -PI + 2.0 * PI * i as f64 / n as f64).collect()
    }

    #[test]
    fn cosine_interpolation_error_is_small() {
        let x = uniform(64);
        let y: Vec<f64> = x.iter().map(|a| a.cos()).collect();
        let s = PeriodicSpline::new(x, y, 2.0 * PI).unwrap();
        let mut worst = 0.0f64;
        for k in 0..4001 {
            let a = -PI + 2.0 * PI * k as f64 / 4000.0;
            worst = worst.max((s.eval(a) - a.cos()).abs());
        }
        assert!(worst < 1e-6, "worst = {worst}");
    }

    #[test]
    fn interpolates_nodes_and_constants() {
        let x: Vec<f64> = uniform(12).iter().enumerate().map(|(i, a)| a + 0.05 * (i as f64).sin()).collect();
        let y: Vec<f64> = x.iter().map(|a| a.sin()).collect();
        let s = PeriodicSpline::new(x.clone(), y.clone(), 2.0 * PI).unwrap();
        for (a, v) in x.iter().zip(&y) {
            assert!((s.eval(*a) - v).abs() < 1e-14);
        }
        let c = PeriodicSpline::new(x, vec![2.5; 12], 2.0 * PI).unwrap();
        for k in 0..100 {
            let a = -PI + 0.0631 * k as f64;
            assert!((c.eval(a) - 2.5).abs() < 1e-14);
            assert!(c.deriv(a).abs() < 1e-13);
        }
    }

    #[test]
    fn continuity_across_the_seam() {
        let x = uniform(10);
        let y: Vec<f64> = x.iter().map(|a| (a + 0.3).sin().powi(3)).collect();
        let s = PeriodicSpline::new(x, y, 2.0 * PI).unwrap();
        let e = 1e-9;
        assert!((s.eval(PI - e) - s.eval(-PI + e)).abs() < 1e-7);
        assert!((s.deriv(PI - e) - s.deriv(-PI + e)).abs() < 1e-6);
        assert!((s.second(PI - e) - s.second(-PI + e)).abs() < 1e-6);
    }

    #[test]
    fn duplicate_nodes_rejected() {
        let x = vec![0.0, 1.0, 1.0, 2.0, 3.0];
        assert!(matches!(PeriodicSpline::new(x, vec![0.0; 5], 2.0 * PI), Err(CurveError::DuplicateNodes(1, 2))));
    }

    #[test]
    fn left_piece_matches_node_data() {
        let x = uniform(16);
        let y: Vec<f64> = x.iter().map(|a| (2.0 * a).sin() + a.cos()).collect();
        let s = PeriodicSpline::new(x, y.clone(), 2.0 * PI).unwrap();
        for i in 0..16 {
            let l = s.left_piece_about(i);
            let r = s.piece(i);
            assert!((l.c0 - r.c0).abs() < 1e-13);
            assert!((l.c1 - r.c1).abs() < 1e-12);
            assert!((l.c2 - r.c2).abs() < 1e-11);
        }
    }

    #[test]
    fn integral_and_max() {
        let x = uniform(256);
        let y: Vec<f64> = x.iter().map(|a| 1.0 + 0.5 * a.cos()).collect();
        let s = PeriodicSpline::new(x, y, 2.0 * PI).unwrap();
        assert!((s.integral() - 2.0 * PI).abs() < 1e-10);
        assert!((s.max_abs() - 1.5).abs() < 1e-9);
    }
}
