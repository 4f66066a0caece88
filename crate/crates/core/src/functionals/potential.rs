//! The common view of radial profiles and planar grid fields used by the
//! functionals and flows.

use crate::domain::planar::{grid_laplacian, GridField, NodeKind, PlanarGrid};
use crate::domain::radial::{RadialBall, RadialProfile};
use crate::error::{LabError, Result};

/// A discretized domain with two node-based quadratures.
pub trait Measure {
    /// Complex dimension.
    fn dim(&self) -> usize;
    /// Number of nodes.
    fn nodes(&self) -> usize;
    /// Weights of the measurement quadrature (`∫ g dμ ≈ Σ wᵢ gᵢ`).
    fn quadrature_weights(&self) -> Vec<f64>;
    /// Weights paired with the discrete Monge-Ampère operator; the energy
    /// and the flow functionals integrate against these so that discrete
    /// gradients are exact.
    fn nodal_volumes(&self) -> Vec<f64>;
    /// Measure of the domain.
    fn volume(&self) -> f64;
    fn diameter(&self) -> f64;
}

impl Measure for RadialBall {
    fn dim(&self) -> usize {
        self.n()
    }
    fn nodes(&self) -> usize {
        self.len()
    }
    fn quadrature_weights(&self) -> Vec<f64> {
        self.trapezoid_weights()
    }
    fn nodal_volumes(&self) -> Vec<f64> {
        self.dual_volumes()
    }
    fn volume(&self) -> f64 {
        RadialBall::volume(self)
    }
    fn diameter(&self) -> f64 {
        RadialBall::diameter(self)
    }
}

impl Measure for PlanarGrid {
    fn dim(&self) -> usize {
        1
    }
    fn nodes(&self) -> usize {
        self.len()
    }
    fn quadrature_weights(&self) -> Vec<f64> {
        self.weights().to_vec()
    }
    fn nodal_volumes(&self) -> Vec<f64> {
        self.weights().to_vec()
    }
    fn volume(&self) -> f64 {
        self.area()
    }
    fn diameter(&self) -> f64 {
        PlanarGrid::diameter(self)
    }
}

/// A discrete potential `u ≤ 0` vanishing on the boundary.
pub trait Potential: Clone + Send + Sync {
    type Domain: Measure;

    fn domain(&self) -> &Self::Domain;
    fn values(&self) -> &[f64];
    /// Nodal `det(u_{ij̄})` without the `κ_n` factor.
    fn raw_det(&self) -> Result<Vec<f64>>;
    fn check_admissible(&self) -> Result<()>;
    fn scaled(&self, t: f64) -> Self;
    /// Replaces the nodal values (same discretization, no checks).
    fn with_values(&self, values: Vec<f64>) -> Result<Self>;

    fn dim(&self) -> usize {
        self.domain().dim()
    }
    fn resolution(&self) -> usize {
        self.domain().nodes()
    }
}

impl Potential for RadialProfile {
    type Domain = RadialBall;

    fn domain(&self) -> &RadialBall {
        self.ball()
    }
    fn values(&self) -> &[f64] {
        RadialProfile::values(self)
    }
    fn raw_det(&self) -> Result<Vec<f64>> {
        Ok(self.det())
    }
    fn check_admissible(&self) -> Result<()> {
        RadialProfile::check_admissible(self)?;
        if self.values().iter().any(|v| *v > 0.0) {
            return Err(LabError::Inadmissible("potential must be non-positive".into()));
        }
        Ok(())
    }
    fn scaled(&self, t: f64) -> Self {
        RadialProfile::scaled(self, t)
    }
    fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        RadialProfile::raw(self.ball().clone(), values)
    }
}

/// Slack for `Δu ≥ 0` relative to `max |Δu|`.
const SUBHARMONIC_TOL: f64 = 1e-9;

impl Potential for GridField {
    type Domain = PlanarGrid;

    fn domain(&self) -> &PlanarGrid {
        self.grid()
    }
    fn values(&self) -> &[f64] {
        GridField::values(self)
    }
    fn raw_det(&self) -> Result<Vec<f64>> {
        Ok(grid_laplacian(self)?.into_values().into_iter().map(|l| 0.25 * l).collect())
    }
    fn check_admissible(&self) -> Result<()> {
        self.check_potential()?;
        let lap = grid_laplacian(self)?;
        let scale = lap.values().iter().fold(0.0f64, |a, x| a.max(x.abs()));
        for (k, l) in lap.values().iter().enumerate() {
            if self.grid().kind(k) == NodeKind::Interior && *l < -SUBHARMONIC_TOL * scale {
                let (i, j) = self.grid().ij(k);
                return Err(LabError::Inadmissible(format!("negative Laplacian {l:e} at ({i}, {j})")));
            }
        }
        Ok(())
    }
    fn scaled(&self, t: f64) -> Self {
        GridField::scaled(self, t)
    }
    fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        GridField::new(self.grid().clone(), values)
    }
}
