//! Numerical laboratory for the complex Monge-Ampère energy on
//! plurisubharmonic functions vanishing on the boundary.
//!
//! Two exactly solvable settings are covered: radial potentials on balls
//! in ℂⁿ ([`domain::RadialProfile`]) and full planar grids for `n = 1`
//! ([`domain::GridField`]). On top of them sit the energy functionals,
//! two descent gradient flows, the slice-reduction checks on balls in ℂ²
//! and estimators for the Sobolev, Moser-Trudinger and Brezis-Merle
//! constants.
//!
//! Conventions: integrals are against Lebesgue measure on ℝ²ⁿ, and
//! reported functionals use `(dd^c u)ⁿ = κ_n det(u_{ij̄}) dμ` with
//! `κ_n = 4ⁿ n!`, so that `n = 1` gives `Δu dx`. Flow internals work
//! with the raw determinant.

// `!(x > 0.0)` is how NaN is rejected along with non-positive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod domain;
pub mod error;
pub mod flow;
pub mod functionals;
pub mod lab;
pub mod planar_solver;
pub mod radial_solver;
pub mod runner;
pub mod slice;

pub use error::{LabError, Result};
