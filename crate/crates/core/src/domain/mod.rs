//! Domains, their measures and numerical integration.

pub mod io;
pub mod planar;
pub mod radial;

pub use planar::{grid_integrate, grid_laplacian, GridField, NodeKind, PlanarGrid, PlanarShape};
pub use radial::{ball_volume, kappa, radial_weight, RadialBall, RadialProfile};

use crate::error::Result;

/// `∫_B g dμ` for radial samples `g` (trapezoid rule in `ρ`).
pub fn radial_integrate(g: &[f64], ball: &RadialBall) -> Result<f64> {
    ball.integrate(g)
}
