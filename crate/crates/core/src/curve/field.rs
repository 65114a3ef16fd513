use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use super::grid::PeriodicGrid;
use crate::error::CurveError;
use crate::fft;

/// Fourier coefficients `A_k` of a real 2π-periodic function sampled on a
/// uniform grid, so that `f(alpha) = sum_k A_k exp(i k alpha)`.
///
/// Stored in FFT order: index `j <= n/2` holds wavenumber `j`, index `j > n/2`
/// holds `j - n`. For even `n` the Nyquist coefficient sits at `n/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn from_coeffs(coeffs: Vec<Complex64>) -> Self {
        Self { coeffs }
    }

    pub fn zeros(n: usize) -> Self {
        Self { coeffs: vec![Complex64::new(0.0, 0.0); n] }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Signed wavenumber stored at FFT index `idx`.
    pub fn wavenumber(&self, idx: usize) -> i64 {
        let n = self.coeffs.len();
        if idx <= n / 2 {
            idx as i64
        } else {
            idx as i64 - n as i64
        }
    }

    /// `true` when `idx` is the unpaired Nyquist slot of an even-length spectrum.
    pub fn is_nyquist(&self, idx: usize) -> bool {
        let n = self.coeffs.len();
        n % 2 == 0 && idx == n / 2
    }

    /// Coefficient for wavenumber `k`, zero outside the stored range.
    pub fn coeff(&self, k: i64) -> Complex64 {
        let n = self.coeffs.len() as i64;
        if k.abs() > n / 2 {
            return Complex64::new(0.0, 0.0);
        }
        let idx = k.rem_euclid(n) as usize;
        self.coeffs[idx]
    }

    /// Multiply every coefficient by `symbol(k)`; the Nyquist slot receives
    /// `nyquist(k)` instead so callers can decide how to treat the unpaired mode.
    pub fn apply<F, G>(&self, symbol: F, nyquist: G) -> Spectrum
    where
        F: Fn(i64) -> Complex64,
        G: Fn(i64) -> Complex64,
    {
        let coeffs = (0..self.coeffs.len())
            .map(|idx| {
                let k = self.wavenumber(idx);
                let m = if self.is_nyquist(idx) { nyquist(k) } else { symbol(k) };
                self.coeffs[idx] * m
            })
            .collect();
        Spectrum { coeffs }
    }

    /// Zero every mode with `|k| > n_max`.
    pub fn truncate(&self, n_max: usize) -> Spectrum {
        let coeffs = (0..self.coeffs.len())
            .map(|idx| {
                if self.wavenumber(idx).unsigned_abs() as usize > n_max {
                    Complex64::new(0.0, 0.0)
                } else {
                    self.coeffs[idx]
                }
            })
            .collect();
        Spectrum { coeffs }
    }

    /// Evaluate the trigonometric interpolant at an arbitrary point.
    pub fn eval(&self, alpha: f64) -> f64 {
        let n = self.coeffs.len();
        let mut acc = self.coeffs[0].re;
        for idx in 1..=n / 2 {
            let k = idx as f64;
            let c = self.coeffs[idx];
            if self.is_nyquist(idx) {
                acc += c.re * (k * alpha).cos();
            } else {
                // A_k e^{ik a} + conj(A_k) e^{-ik a}
                acc += 2.0 * (c.re * (k * alpha).cos() - c.im * (k * alpha).sin());
            }
        }
        acc
    }

    /// Largest |A_k| over the stored modes with `k != 0`.
    pub fn max_nonzero_mode_amplitude(&self) -> f64 {
        (1..self.coeffs.len()).map(|i| self.coeffs[i].norm()).fold(0.0, f64::max)
    }
}

/// Samples of a 2π-periodic scalar function on a [`PeriodicGrid`].
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PeriodicField {
    grid: Arc<PeriodicGrid>,
    values: Vec<f64>,
}

impl PeriodicField {
    pub fn new(grid: Arc<PeriodicGrid>, values: Vec<f64>) -> Result<Self, CurveError> {
        if values.len() != grid.len() {
            return Err(CurveError::LengthMismatch { expected: grid.len(), got: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(CurveError::NonFinite(i));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Arc<PeriodicGrid>, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.alphas().iter().map(|&a| f(a)).collect();
        Self { grid, values }
    }

    pub fn constant(grid: Arc<PeriodicGrid>, c: f64) -> Self {
        let n = grid.len();
        Self { grid, values: vec![c; n] }
    }

    /// Inverse of [`PeriodicField::spectrum`] on a uniform grid.
    pub fn from_spectrum(grid: Arc<PeriodicGrid>, spectrum: &Spectrum) -> Result<Self, CurveError> {
        if !grid.is_uniform() {
            return Err(CurveError::UnsupportedGrid);
        }
        let n = grid.len();
        if spectrum.len() != n {
            return Err(CurveError::LengthMismatch { expected: n, got: spectrum.len() });
        }
        // x_j = sum_k A_k e^{ik(-pi + 2 pi j/n)} = sum_k (A_k (-1)^k) e^{2 pi i jk/n}
        let shifted: Vec<Complex64> = (0..n)
            .map(|idx| {
                let k = spectrum.wavenumber(idx);
                let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                spectrum.coeffs()[idx] * sign
            })
            .collect();
        let values = fft::inverse(&shifted).into_iter().map(|c| c.re).collect();
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn grid_arc(&self) -> &Arc<PeriodicGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Same grid, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self, CurveError> {
        Self::new(self.grid.clone(), values)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| s * v)
    }

    /// Pointwise `a*self + b*other` on a shared grid.
    pub fn axpby(&self, a: f64, other: &PeriodicField, b: f64) -> Result<Self, CurveError> {
        if other.len() != self.len() {
            return Err(CurveError::LengthMismatch { expected: self.len(), got: other.len() });
        }
        let values = self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect();
        Ok(Self { grid: self.grid.clone(), values })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Fourier coefficients; uniform grids only.
    pub fn spectrum(&self) -> Result<Spectrum, CurveError> {
        if !self.grid.is_uniform() {
            return Err(CurveError::UnsupportedGrid);
        }
        let n = self.values.len();
        let raw = fft::forward_real(&self.values);
        let spec = Spectrum::from_coeffs(raw);
        let inv_n = 1.0 / n as f64;
        let coeffs = (0..n)
            .map(|idx| {
                let k = spec.wavenumber(idx);
                let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                spec.coeffs()[idx] * (sign * inv_n)
            })
            .collect();
        Ok(Spectrum::from_coeffs(coeffs))
    }

    /// Mean over one period: exact trapezoid on uniform grids, spline integral otherwise.
    pub fn mean(&self) -> f64 {
        if self.grid.is_uniform() {
            self.values.iter().sum::<f64>() / self.values.len() as f64
        } else {
            match crate::evolve::spline::PeriodicSpline::from_field(self) {
                Ok(s) => s.integral() / (2.0 * PI),
                Err(_) => self.values.iter().sum::<f64>() / self.values.len() as f64,
            }
        }
    }
}
