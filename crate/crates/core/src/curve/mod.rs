//! Grids, periodic fields, interfaces and their geometric functionals.

mod field;
mod grid;

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

pub use field::{PeriodicField, Spectrum};
pub use grid::PeriodicGrid;

use crate::error::CurveError;
use crate::evolve::spline::PeriodicSpline;

/// Density jump used when none is given, matching the normalization `ρ² - ρ¹ = 4π`.
pub const DEFAULT_DELTA_RHO: f64 = 4.0 * PI;

/// Pairs closer than this in the periodic chord metric count as coincident.
pub const ARC_CHORD_FLOOR: f64 = 1e-14;

/// A periodic interface `z(α) = (α + p(α), q(α))` with `p = z₁ - α` and `q = z₂`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Curve {
    z1_minus_alpha: PeriodicField,
    z2: PeriodicField,
    delta_rho: f64,
}

impl Curve {
    pub fn new(z1_minus_alpha: PeriodicField, z2: PeriodicField, delta_rho: f64) -> Result<Self, CurveError> {
        if z1_minus_alpha.grid() != z2.grid() {
            return Err(CurveError::LengthMismatch { expected: z1_minus_alpha.len(), got: z2.len() });
        }
        Ok(Self { z1_minus_alpha, z2, delta_rho })
    }

    pub fn flat(grid: Arc<PeriodicGrid>, delta_rho: f64) -> Self {
        Self {
            z1_minus_alpha: PeriodicField::constant(grid.clone(), 0.0),
            z2: PeriodicField::constant(grid, 0.0),
            delta_rho,
        }
    }

    /// The graph `z = (α, f(α))`.
    pub fn from_graph(f: &PeriodicField, delta_rho: f64) -> Self {
        Self {
            z1_minus_alpha: PeriodicField::constant(f.grid_arc().clone(), 0.0),
            z2: f.clone(),
            delta_rho,
        }
    }

    pub fn grid(&self) -> &PeriodicGrid {
        self.z1_minus_alpha.grid()
    }

    pub fn grid_arc(&self) -> &Arc<PeriodicGrid> {
        self.z1_minus_alpha.grid_arc()
    }

    pub fn z1_minus_alpha(&self) -> &PeriodicField {
        &self.z1_minus_alpha
    }

    pub fn z2(&self) -> &PeriodicField {
        &self.z2
    }

    pub fn delta_rho(&self) -> f64 {
        self.delta_rho
    }

    pub fn with_delta_rho(mut self, delta_rho: f64) -> Self {
        self.delta_rho = delta_rho;
        self
    }

    /// `z₁` at the nodes.
    pub fn z1_values(&self) -> Vec<f64> {
        self.grid().alphas().iter().zip(self.z1_minus_alpha.values()).map(|(a, p)| a + p).collect()
    }
}

/// A single graph interface `(α, f(α))` on a periodic grid.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GraphInterface {
    f: PeriodicField,
    mean: f64,
}

impl GraphInterface {
    pub fn new(f: PeriodicField) -> Self {
        let mean = f.mean();
        Self { f, mean }
    }

    pub fn field(&self) -> &PeriodicField {
        &self.f
    }

    pub fn grid(&self) -> &PeriodicGrid {
        self.f.grid()
    }

    pub fn values(&self) -> &[f64] {
        self.f.values()
    }

    /// Mean height at construction time.
    pub fn mean(&self) -> f64 {
        self.mean
    }
}

/// Sampled derivative of a periodic field.
///
/// Uniform grids use the exact spectral derivative (the unpaired Nyquist mode is
/// dropped for odd orders); nonuniform grids use the periodic cubic spline.
pub fn differentiate(field: &PeriodicField, order: u32) -> Result<PeriodicField, CurveError> {
    if !(1..=2).contains(&order) {
        return Err(CurveError::BadOrder(order));
    }
    if field.grid().is_uniform() {
        let spec = field.spectrum()?;
        let out = spec.apply(
            |k| Complex64::new(0.0, k as f64).powu(order),
            |k| if order % 2 == 1 { Complex64::new(0.0, 0.0) } else { Complex64::new(-(k as f64).powi(2), 0.0) },
        );
        return PeriodicField::from_spectrum(field.grid_arc().clone(), &out);
    }
    if order == 2 && field.len() < 8 {
        return Err(CurveError::GridTooCoarse { order });
    }
    let spline = PeriodicSpline::from_field(field)?;
    let values = if order == 1 { spline.node_derivatives() } else { spline.node_second_derivatives() };
    field.with_values(values)
}

/// `∂_α z₁ = 1 + ∂_α p` at the nodes.
pub fn slope_z1(curve: &Curve) -> Result<PeriodicField, CurveError> {
    Ok(differentiate(curve.z1_minus_alpha(), 1)?.map(|d| 1.0 + d))
}

/// `2 (cosh Δ₂ - cos Δ₁)` written as a sum of squares, free of cancellation.
#[inline]
pub(crate) fn chord_denominator(d1: f64, d2: f64) -> f64 {
    let s1 = (0.5 * d1).sin();
    let s2 = (0.5 * d2).sinh();
    4.0 * (s1 * s1 + s2 * s2)
}

/// Discrete supremum of the periodic arc-chord functional
/// `F(z)(α,β) = ‖β‖² / (2 (cosh(z₂(α)-z₂(α-β)) - cos(z₁(α)-z₁(α-β))))`
/// over node pairs, together with the diagonal limit `1/|∂_α z|²`.
pub fn arc_chord_constant(curve: &Curve) -> Result<f64, CurveError> {
    let grid = curve.grid();
    let n = grid.len();
    let alphas = grid.alphas();
    let p = curve.z1_minus_alpha().values();
    let q = curve.z2().values();
    let dz1 = slope_z1(curve)?;
    let dz2 = differentiate(curve.z2(), 1)?;

    let mut sup = 0.0f64;
    for i in 0..n {
        let speed2 = dz1.values()[i].powi(2) + dz2.values()[i].powi(2);
        if speed2 < ARC_CHORD_FLOOR {
            return Err(CurveError::ArcChordViolation { alpha: alphas[i], beta: 0.0 });
        }
        sup = sup.max(1.0 / speed2);
        for j in 0..n {
            if i == j {
                continue;
            }
            let beta = PeriodicGrid::wrap(alphas[i] - alphas[j]);
            let d1 = (alphas[i] - alphas[j]) + (p[i] - p[j]);
            let d2 = q[i] - q[j];
            let denom = chord_denominator(d1, d2);
            if denom < ARC_CHORD_FLOOR {
                return Err(CurveError::ArcChordViolation { alpha: alphas[i], beta });
            }
            sup = sup.max(beta * beta / denom);
        }
    }
    Ok(sup)
}

/// `σ(α) = Δρ ∂_α z₁(α)`.
pub fn rayleigh_taylor_profile(curve: &Curve) -> Result<PeriodicField, CurveError> {
    let dr = curve.delta_rho();
    Ok(slope_z1(curve)?.map(|s| dr * s))
}

/// `ω(α) = -Δρ ∂_α z₂(α)`.
pub fn vorticity_strength(curve: &Curve) -> Result<PeriodicField, CurveError> {
    let dr = curve.delta_rho();
    Ok(differentiate(curve.z2(), 1)?.map(|s| -dr * s))
}

/// Minimum of `∂_α z₁` over the nodes and the node where it is attained.
pub fn min_slope(curve: &Curve) -> Result<(f64, f64), CurveError> {
    let slope = slope_z1(curve)?;
    let (idx, val) = slope
        .values()
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bv), (i, &v)| if v < bv { (i, v) } else { (bi, bv) });
    Ok((val, curve.grid().alphas()[idx]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Arc<PeriodicGrid> {
        Arc::new(PeriodicGrid::uniform(n).unwrap())
    }

    /// Independent scan of β²/(2(1 - cos β)) on (0, π].
    fn flat_arc_chord_oracle() -> f64 {
        (1..=200_000).map(|k| PI * k as f64 / 200_000.0).map(|b| b * b / (2.0 * (1.0 - b.cos()))).fold(0.0, f64::max)
    }

    #[test]
    fn spectral_derivative_of_sine() {
        let g = grid(64);
        let f = PeriodicField::from_fn(g, |a| a.sin());
        let d = differentiate(&f, 1).unwrap();
        for (a, v) in f.grid().alphas().iter().zip(d.values()) {
            assert!((v - a.cos()).abs() < 1e-12);
        }
        let d2 = differentiate(&f, 2).unwrap();
        for (a, v) in f.grid().alphas().iter().zip(d2.values()) {
            assert!((v + a.sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn derivative_of_constant_is_zero() {
        let f = PeriodicField::constant(grid(32), 3.7);
        assert!(differentiate(&f, 1).unwrap().max_abs() < 1e-14);
        assert_eq!(differentiate(&f, 3), Err(CurveError::BadOrder(3)));
    }

    #[test]
    fn z1_slope_of_turning_profile() {
        let g = grid(64);
        let curve = Curve::new(
            PeriodicField::from_fn(g.clone(), |a| -a.sin()),
            PeriodicField::constant(g, 0.0),
            DEFAULT_DELTA_RHO,
        )
        .unwrap();
        let s = slope_z1(&curve).unwrap();
        for (a, v) in curve.grid().alphas().iter().zip(s.values()) {
            assert!((v - (1.0 - a.cos())).abs() < 1e-12);
        }
        assert!(s.values()[32].abs() < 1e-14);
        let (m, at) = min_slope(&curve).unwrap();
        assert!(m.abs() < 1e-14 && at == 0.0);
    }

    #[test]
    fn nonuniform_derivative_uses_spline() {
        let nodes: Vec<f64> = (0..128).map(|i| {
            let u = -PI + 2.0 * PI * i as f64 / 128.0;
            u + 0.1 * (u.sin() * 0.5)
        }).collect();
        let g = Arc::new(PeriodicGrid::from_nodes(nodes).unwrap());
        let f = PeriodicField::from_fn(g, |a| (2.0 * a).cos());
        let d = differentiate(&f, 1).unwrap();
        for (a, v) in f.grid().alphas().iter().zip(d.values()) {
            assert!((v + 2.0 * (2.0 * a).sin()).abs() < 1e-4);
        }
    }

    #[test]
    fn flat_curve_arc_chord_matches_scan() {
        let c = Curve::flat(grid(64), DEFAULT_DELTA_RHO);
        let k = arc_chord_constant(&c).unwrap();
        let oracle = flat_arc_chord_oracle();
        assert!((oracle - 2.467_401_100_272_34).abs() < 1e-8);
        assert!((k - oracle).abs() < 1e-9, "k = {k}");
    }

    #[test]
    fn coincident_points_violate_arc_chord() {
        let g = grid(16);
        // z(α) = (α - sin... ) chosen so nodes 4 and 12 land on the same point.
        let mut p = vec![0.0; 16];
        let mut q = vec![0.0; 16];
        let a = g.alphas().to_vec();
        p[12] = a[4] - a[12];
        q[12] = 0.0;
        q[4] = 0.0;
        let curve = Curve::new(
            PeriodicField::new(g.clone(), p).unwrap(),
            PeriodicField::new(g, q.drain(..).collect()).unwrap(),
            DEFAULT_DELTA_RHO,
        )
        .unwrap();
        assert!(matches!(arc_chord_constant(&curve), Err(CurveError::ArcChordViolation { .. })));
    }

    #[test]
    fn rt_profile_and_vorticity() {
        let g = grid(32);
        let flat = Curve::flat(g.clone(), DEFAULT_DELTA_RHO);
        let sigma = rayleigh_taylor_profile(&flat).unwrap();
        assert!(sigma.values().iter().all(|s| (s - 4.0 * PI).abs() < 1e-13));
        assert!(vorticity_strength(&flat).unwrap().max_abs() < 1e-14);

        let wavy = Curve::new(
            PeriodicField::constant(g.clone(), 0.0),
            PeriodicField::from_fn(g.clone(), |a| a.sin()),
            DEFAULT_DELTA_RHO,
        )
        .unwrap();
        let w = vorticity_strength(&wavy).unwrap();
        for (a, v) in g.alphas().iter().zip(w.values()) {
            assert!((v + 4.0 * PI * a.cos()).abs() < 1e-12);
        }
        let zero = wavy.clone().with_delta_rho(0.0);
        assert!(rayleigh_taylor_profile(&zero).unwrap().max_abs() == 0.0);
        assert!(vorticity_strength(&zero).unwrap().max_abs() == 0.0);
    }

    #[test]
    fn min_slope_closed_forms() {
        let g = grid(64);
        let c = Curve::new(
            PeriodicField::from_fn(g.clone(), |a| -1.1 * a.sin()),
            PeriodicField::constant(g.clone(), 0.0),
            DEFAULT_DELTA_RHO,
        )
        .unwrap();
        let (m, at) = min_slope(&c).unwrap();
        assert!((m + 0.1).abs() < 1e-12 && at == 0.0);
        let (m, _) = min_slope(&Curve::flat(g, 1.0)).unwrap();
        assert!((m - 1.0).abs() < 1e-14);
    }
}
