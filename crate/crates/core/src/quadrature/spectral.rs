use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;

use crate::curve::{PeriodicField, PeriodicGrid};
use crate::error::{CurveError, QuadratureError};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Hilbert transform with the convention `H(cos kα) = sin kα`, i.e. the symbol
/// `-i sgn(k)`. The mean and the unpaired Nyquist mode are annihilated.
pub fn hilbert_transform(field: &PeriodicField) -> Result<PeriodicField, CurveError> {
    let spec = field.spectrum()?;
    let out = spec.apply(|k| Complex64::new(0.0, -(k.signum() as f64)), |_| ZERO);
    PeriodicField::from_spectrum(field.grid_arc().clone(), &out)
}

/// `Λ^s`, the Fourier multiplier `|k|^s`.
pub fn lambda_op(field: &PeriodicField, s: f64) -> Result<PeriodicField, CurveError> {
    let spec = field.spectrum()?;
    let sym = |k: i64| Complex64::new((k.unsigned_abs() as f64).powf(s), 0.0);
    let out = spec.apply(sym, sym);
    PeriodicField::from_spectrum(field.grid_arc().clone(), &out)
}

/// Minimum over the nodes of `2 g Λg - Λ(g²)`.
///
/// `g` must be resolved with room for its square: trigonometric degree at most `n/4`.
pub fn ad_inequality_margin(g: &PeriodicField) -> Result<f64, QuadratureError> {
    let n = g.len();
    let spec = g.spectrum()?;
    let scale = spec.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max);
    let degree = (0..n)
        .filter(|&i| spec.coeffs()[i].norm() > 1e-12 * scale.max(1e-300))
        .map(|i| spec.wavenumber(i).unsigned_abs() as usize)
        .max()
        .unwrap_or(0);
    if degree > n / 4 {
        return Err(QuadratureError::Aliasing { degree, n });
    }
    let lg = lambda_op(g, 1.0)?;
    let g2 = g.map(|v| v * v);
    let lg2 = lambda_op(&g2, 1.0)?;
    let margin = g
        .values()
        .iter()
        .zip(lg.values())
        .zip(lg2.values())
        .map(|((gv, l), l2)| 2.0 * gv * l - l2)
        .fold(f64::INFINITY, f64::min);
    Ok(margin)
}

/// Random real trigonometric polynomial of the given degree with coefficients
/// uniform in `[-1, 1]`.
pub fn random_trig_polynomial<R: Rng + ?Sized>(grid: Arc<PeriodicGrid>, degree: usize, rng: &mut R) -> PeriodicField {
    let a0: f64 = rng.random_range(-1.0..1.0);
    let ab: Vec<(f64, f64)> = (0..degree).map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    PeriodicField::from_fn(grid, |x| {
        a0 + ab.iter().enumerate().map(|(k, (a, b))| {
            let kk = (k + 1) as f64;
            a * (kk * x).cos() + b * (kk * x).sin()
        }).sum::<f64>()
    })
}
