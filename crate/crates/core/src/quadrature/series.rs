//! Truncated power series arithmetic, used to build the local Taylor models
//! that replace 0/0 integrands near the singular point.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    c: Vec<f64>,
}

impl Series {
    pub fn from_coeffs(c: Vec<f64>) -> Self {
        assert!(!c.is_empty());
        Self { c }
    }

    pub fn constant(v: f64, order: usize) -> Self {
        let mut c = vec![0.0; order + 1];
        c[0] = v;
        Self { c }
    }

    /// The independent variable `t`.
    pub fn variable(order: usize) -> Self {
        let mut c = vec![0.0; order + 1];
        if order >= 1 {
            c[1] = 1.0;
        }
        Self { c }
    }

    /// Polynomial with the given low coefficients, padded/truncated to `order`.
    pub fn polynomial(coeffs: &[f64], order: usize) -> Self {
        let mut c = vec![0.0; order + 1];
        for (dst, src) in c.iter_mut().zip(coeffs) {
            *dst = *src;
        }
        Self { c }
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.c.iter().rev().fold(0.0, |acc, &ck| acc * t + ck)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { c: self.c.iter().map(|v| v * s).collect() }
    }

    /// Divide by `t^k`, discarding the first `k` coefficients (assumed zero).
    pub fn shift_down(&self, k: usize) -> Self {
        Self { c: self.c[k..].to_vec() }
    }

    pub fn truncate(&self, order: usize) -> Self {
        Self { c: self.c[..=order.min(self.order())].to_vec() }
    }

    pub fn recip(&self) -> Option<Self> {
        Series::constant(1.0, self.order()).div(self)
    }

    pub fn div(&self, other: &Series) -> Option<Self> {
        let n = self.order().min(other.order());
        let d0 = other.c[0];
        if d0 == 0.0 || !d0.is_finite() {
            return None;
        }
        let mut q = vec![0.0; n + 1];
        for k in 0..=n {
            let mut acc = self.c[k];
            for j in 1..=k {
                acc -= other.c[j] * q[k - j];
            }
            q[k] = acc / d0;
        }
        Some(Self { c: q })
    }

    pub fn exp(&self) -> Self {
        let n = self.order();
        let mut e = vec![0.0; n + 1];
        e[0] = self.c[0].exp();
        for k in 1..=n {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += j as f64 * self.c[j] * e[k - j];
            }
            e[k] = acc / k as f64;
        }
        Self { c: e }
    }

    /// `(sin x, cos x)`.
    pub fn sin_cos(&self) -> (Self, Self) {
        let n = self.order();
        let mut s = vec![0.0; n + 1];
        let mut co = vec![0.0; n + 1];
        s[0] = self.c[0].sin();
        co[0] = self.c[0].cos();
        for k in 1..=n {
            let (mut as_, mut ac) = (0.0, 0.0);
            for j in 1..=k {
                let jx = j as f64 * self.c[j];
                as_ += jx * co[k - j];
                ac -= jx * s[k - j];
            }
            s[k] = as_ / k as f64;
            co[k] = ac / k as f64;
        }
        (Self { c: s }, Self { c: co })
    }

    /// `(sinh x, cosh x)`.
    pub fn sinh_cosh(&self) -> (Self, Self) {
        let n = self.order();
        let mut s = vec![0.0; n + 1];
        let mut ch = vec![0.0; n + 1];
        s[0] = self.c[0].sinh();
        ch[0] = self.c[0].cosh();
        for k in 1..=n {
            let (mut as_, mut ac) = (0.0, 0.0);
            for j in 1..=k {
                let jx = j as f64 * self.c[j];
                as_ += jx * ch[k - j];
                ac += jx * s[k - j];
            }
            s[k] = as_ / k as f64;
            ch[k] = ac / k as f64;
        }
        (Self { c: s }, Self { c: ch })
    }

    pub fn sin(&self) -> Self {
        self.sin_cos().0
    }

    pub fn sinh(&self) -> Self {
        self.sinh_cosh().0
    }

    /// `y = tan x` via `y' = (1 + y²) x'`.
    pub fn tan(&self) -> Self {
        self.riccati(1.0, self.c[0].tan())
    }

    /// `y = tanh x` via `y' = (1 - y²) x'`.
    pub fn tanh(&self) -> Self {
        self.riccati(-1.0, self.c[0].tanh())
    }

    fn riccati(&self, sign: f64, y0: f64) -> Self {
        let n = self.order();
        let mut y = vec![0.0; n + 1];
        let mut g = vec![0.0; n + 1];
        y[0] = y0;
        g[0] = 1.0 + sign * y0 * y0;
        for k in 1..=n {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += j as f64 * self.c[j] * g[k - j];
            }
            y[k] = acc / k as f64;
            let mut sq = 0.0;
            for i in 0..=k {
                sq += y[i] * y[k - i];
            }
            g[k] = sign * sq;
        }
        Self { c: y }
    }

    /// `∫_a^b Σ c_k t^k dt`.
    pub fn integrate(&self, a: f64, b: f64) -> f64 {
        self.c
            .iter()
            .enumerate()
            .map(|(k, ck)| {
                let p = (k + 1) as i32;
                ck * (b.powi(p) - a.powi(p)) / (k + 1) as f64
            })
            .sum()
    }
}

impl Add for &Series {
    type Output = Series;
    fn add(self, rhs: &Series) -> Series {
        let n = self.order().min(rhs.order());
        Series { c: (0..=n).map(|k| self.c[k] + rhs.c[k]).collect() }
    }
}

impl Sub for &Series {
    type Output = Series;
    fn sub(self, rhs: &Series) -> Series {
        let n = self.order().min(rhs.order());
        Series { c: (0..=n).map(|k| self.c[k] - rhs.c[k]).collect() }
    }
}

impl Mul for &Series {
    type Output = Series;
    fn mul(self, rhs: &Series) -> Series {
        let n = self.order().min(rhs.order());
        let mut c = vec![0.0; n + 1];
        for (i, ai) in self.c.iter().enumerate().take(n + 1) {
            if *ai == 0.0 {
                continue;
            }
            for j in 0..=(n - i) {
                c[i + j] += ai * rhs.c[j];
            }
        }
        Series { c }
    }
}

impl Neg for &Series {
    type Output = Series;
    fn neg(self) -> Series {
        self.scale(-1.0)
    }
}
