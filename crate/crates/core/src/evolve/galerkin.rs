//! Spectral Galerkin backend: the contour velocity projected onto `|k| ≤ N`.

use crate::curve::{Curve, PeriodicField, Spectrum};
use crate::dynamics::contour_rhs_periodic;
use crate::error::{CurveError, EvolveError};
use crate::quadrature::QuadratureSpec;

fn check_budget(curve: &Curve, n_modes: usize) -> Result<(), EvolveError> {
    if !curve.grid().is_uniform() {
        return Err(CurveError::UnsupportedGrid.into());
    }
    let n = curve.grid().len();
    if n < 4 * n_modes {
        return Err(EvolveError::AliasingBudget { n, n_modes });
    }
    Ok(())
}

/// `Π_N` of a sampled field.
pub fn project_field(field: &PeriodicField, n_modes: usize) -> Result<PeriodicField, CurveError> {
    let s = field.spectrum()?.truncate(n_modes);
    PeriodicField::from_spectrum(field.grid_arc().clone(), &s)
}

/// `Π_N` applied to both components of a curve.
pub fn project(curve: &Curve, n_modes: usize) -> Result<Curve, EvolveError> {
    check_budget(curve, n_modes)?;
    let p = project_field(curve.z1_minus_alpha(), n_modes)?;
    let q = project_field(curve.z2(), n_modes)?;
    Ok(Curve::new(p, q, curve.delta_rho())?)
}

/// Spectra of `Π_N z_t` for the periodic contour equation.
pub fn galerkin_rhs(curve: &Curve, n_modes: usize, spec: &QuadratureSpec) -> Result<(Spectrum, Spectrum), EvolveError> {
    check_budget(curve, n_modes)?;
    let (a, b) = contour_rhs_periodic(curve, spec)?;
    Ok((a.spectrum()?.truncate(n_modes), b.spectrum()?.truncate(n_modes)))
}
