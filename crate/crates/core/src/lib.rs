//! Simulation and verification toolkit for Muskat interfaces in porous media.
//!
//! The crate evolves single and two-interface configurations with the
//! contour-dynamics formulation, constructs initial data whose horizontal
//! tangent turns over in finite time, and checks the qualitative behaviour
//! expected of stable runs (maximum principle, L² decay, analyticity).

/// Version of the library, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod curve;
pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod evolve;
mod fft;
pub mod quadrature;
pub mod turnover;
