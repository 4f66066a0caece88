//! Dimension reduction on the unit ball of ℂ²: for `u(z, w)` radial the
//! slice potential
//!
//! `v(ξ) = κ₁ ∫_{D_ξ} (-u)(ξ, w) u_{ww̄}(ξ, w) dμ_w`, `D_ξ = {|w|² ≤ 1-|ξ|²}`,
//!
//! depends on `s = |ξ|²` only. Integrating by parts in `t = |w|²` gives
//! `v(s) = 4π ∫_s^1 (ρ - s) V'(ρ)² dρ` for `u = V(|z|²)`, evaluated
//! exactly for the piecewise linear profile on the source grid. Then
//! `Δ_ξ v = 4 d/ds (s v') = 16π (s V'(s)² - ∫_s^1 V'²)` is linear on each
//! cell and `∫_D |Δ_ξ v| dμ_ξ` is integrated exactly cell by cell.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::domain::planar::{GridField, PlanarGrid};
use crate::domain::radial::{kappa, RadialProfile};
use crate::error::{LabError, Result};
use crate::functionals::{lp_norm, ma_mass};

/// Slice potential on the radial grid `s = |ξ|²` of the source.
#[derive(Debug, Clone, PartialEq)]
pub struct SlicePotential {
    /// Nodes in `s = |ξ|²`, shared with the source grid.
    pub s: Vec<f64>,
    /// `v(s) ≥ 0`, zero at `s = 1`.
    pub v: Vec<f64>,
    /// `s v'(s)` at the nodes.
    pub flux: Vec<f64>,
    pub source: RadialProfile,
}

fn check_source(u: &RadialProfile) -> Result<()> {
    if u.n() != 2 {
        return Err(LabError::Capability(format!("slices are implemented on ℂ², got n = {}", u.n())));
    }
    if (u.ball().radius() - 1.0).abs() > 1e-12 {
        return Err(LabError::InvalidDomain(format!("slices need the unit ball, got radius {}", u.ball().radius())));
    }
    u.check_admissible()
}

/// `v(ξ) = κ₁∫_{D_ξ}(-u) u_{ww̄} dμ_w` for a radial admissible `u` on the
/// unit ball of ℂ².
pub fn slice_potential(u: &RadialProfile) -> Result<SlicePotential> {
    check_source(u)?;
    let rho = u.ball().rho();
    let dv = u.slopes();
    let m = rho.len();
    let c = kappa(1) * PI;
    // tails from the outside in: A_i = ∫_{ρ_i}^1 V'², B_i = ∫_{ρ_i}^1 ρ V'²
    let mut a = vec![0.0; m];
    let mut b = vec![0.0; m];
    for j in (0..m - 1).rev() {
        let d2 = dv[j] * dv[j];
        let h = rho[j + 1] - rho[j];
        a[j] = a[j + 1] + d2 * h;
        b[j] = b[j + 1] + d2 * 0.5 * (rho[j + 1] * rho[j + 1] - rho[j] * rho[j]);
    }
    let v = (0..m).map(|i| (c * (b[i] - rho[i] * a[i])).max(0.0)).collect();
    let flux = (0..m).map(|i| -c * rho[i] * a[i]).collect();
    Ok(SlicePotential { s: rho.to_vec(), v, flux, source: u.clone() })
}

impl SlicePotential {
    /// `v` at a point of the unit disc, linear in `s` between nodes.
    pub fn sample(&self, x: f64, y: f64) -> f64 {
        let s = x * x + y * y;
        if s >= 1.0 {
            return 0.0;
        }
        let k = self.s.partition_point(|r| *r <= s).clamp(1, self.s.len() - 1);
        let (s0, s1) = (self.s[k - 1], self.s[k]);
        let t = ((s - s0) / (s1 - s0)).clamp(0.0, 1.0);
        self.v[k - 1] + t * (self.v[k] - self.v[k - 1])
    }

    /// The slice potential sampled on a planar disc grid.
    pub fn on_disc_grid(&self, cells: usize) -> Result<GridField> {
        let grid = Arc::new(PlanarGrid::disc(0.0, 0.0, 1.0, cells)?);
        GridField::potential_from_fn(grid, |x, y| self.sample(x, y))
    }

    /// `(s, Δ_ξ v)` at both ends of each source cell; `Δ_ξ v` is linear
    /// within a cell.
    pub fn laplacian_segments(&self) -> Vec<[(f64, f64); 2]> {
        let dv = self.source.slopes();
        let c = 4.0 * kappa(1) * PI;
        // ∫_{s}^{1} V'² at the nodes
        let m = self.s.len();
        let mut tail = vec![0.0; m];
        for j in (0..m - 1).rev() {
            tail[j] = tail[j + 1] + dv[j] * dv[j] * (self.s[j + 1] - self.s[j]);
        }
        (0..m - 1)
            .map(|j| {
                let d2 = dv[j] * dv[j];
                let (s0, s1) = (self.s[j], self.s[j + 1]);
                [(s0, c * (s0 * d2 - tail[j])), (s1, c * (s1 * d2 - tail[j + 1]))]
            })
            .collect()
    }

    /// `∫_D |Δ_ξ v| dμ_ξ = π ∫_0^1 |Δ_ξ v| ds`.
    pub fn abs_laplacian_integral(&self) -> f64 {
        PI * self.laplacian_segments().iter().map(|seg| abs_linear_integral(seg[0], seg[1])).sum::<f64>()
    }

    /// `∫_D Δ_ξ v dμ_ξ = 4π [s v']_0^1`; vanishes since `v'(1) = 0`.
    pub fn laplacian_integral(&self) -> f64 {
        PI * self.laplacian_segments().iter().map(|[(s0, a), (s1, b)]| 0.5 * (a + b) * (s1 - s0)).sum::<f64>()
    }

    /// Largest deviation of `v` along the orbit of `(x, y)` under `k`
    /// rotations.
    pub fn orbit_deviation(&self, x: f64, y: f64, k: usize) -> f64 {
        let base = self.sample(x, y);
        (1..k)
            .map(|j| {
                let th = 2.0 * PI * j as f64 / k as f64;
                let (c, s) = (th.cos(), th.sin());
                (self.sample(c * x - s * y, s * x + c * y) - base).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// `∫|g|` for `g` linear between two points.
fn abs_linear_integral((s0, a): (f64, f64), (s1, b): (f64, f64)) -> f64 {
    let h = s1 - s0;
    if a * b >= 0.0 {
        0.5 * (a.abs() + b.abs()) * h
    } else {
        // split at the root
        let t = a.abs() / (a.abs() + b.abs());
        0.5 * (a.abs() * t + b.abs() * (1.0 - t)) * h
    }
}

/// Outputs of the slice mass inequality check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SliceMassCheck {
    /// `∫_D |Δ_ξ v| dμ_ξ`.
    pub laplacian_mass: f64,
    /// `2 M(u)`.
    pub twice_mass: f64,
    /// `G ≤ 0` at every sampled `ξ`.
    pub boundary_nonpositive: bool,
    /// Largest sampled boundary term.
    pub max_boundary_term: f64,
}

impl SliceMassCheck {
    pub fn ratio(&self) -> f64 {
        if self.twice_mass > 0.0 {
            self.laplacian_mass / self.twice_mass
        } else {
            0.0
        }
    }

    pub fn holds(&self, slack: f64) -> bool {
        self.laplacian_mass <= self.twice_mass * (1.0 + slack)
    }
}

/// Radial derivative of `(-u)u_{ww̄}` across `∂D_ξ` at `s = |ξ|²`:
/// `G = -2r V'(1)(sV'(1) + (1-s)det(1)/V'(1))`, `r = (1-s)^{1/2}`.
pub fn boundary_term(u: &RadialProfile, s: f64) -> f64 {
    let dv = *u.slopes().last().expect("grids have two nodes");
    let det = *u.det().last().expect("grids have two nodes");
    if dv <= 0.0 {
        return 0.0;
    }
    let r = (1.0 - s).max(0.0).sqrt();
    -2.0 * r * dv * (s * dv + (1.0 - s) * det / dv)
}

/// `∫_D|Δ_ξ v| dμ_ξ` against `2M(u)`, together with the sign of the
/// boundary term at every node of the `s`-grid.
pub fn slice_mass_check(u: &RadialProfile) -> Result<SliceMassCheck> {
    let sp = slice_potential(u)?;
    let twice_mass = 2.0 * ma_mass(u)?;
    let g: Vec<f64> = sp.s.iter().map(|s| boundary_term(u, *s)).collect();
    let max_boundary_term = g.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(SliceMassCheck {
        laplacian_mass: sp.abs_laplacian_integral(),
        twice_mass,
        boundary_nonpositive: max_boundary_term <= 0.0,
        max_boundary_term,
    })
}

/// `‖u‖_{L^p}` against `M(u)^{1/n}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReductionBound {
    pub lhs: f64,
    pub rhs: f64,
}

impl ReductionBound {
    pub fn ratio(&self) -> f64 {
        self.lhs / self.rhs
    }
}

pub fn dimension_reduction_bound(u: &RadialProfile, p: f64) -> Result<ReductionBound> {
    let lhs = lp_norm(u, p)?;
    let rhs = ma_mass(u)?.powf(1.0 / u.n() as f64);
    Ok(ReductionBound { lhs, rhs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::radial::RadialBall;

    fn quadratic(nodes: usize) -> RadialProfile {
        let b = Arc::new(RadialBall::uniform(2, 1.0, nodes).unwrap());
        RadialProfile::from_fn(b, |r| r - 1.0).unwrap()
    }

    #[test]
    fn quadratic_slice() {
        let sp = slice_potential(&quadratic(257)).unwrap();
        for (s, v) in sp.s.iter().zip(&sp.v) {
            assert!((v - 2.0 * PI * (1.0 - s).powi(2)).abs() < 1e-12);
        }
        let chk = slice_mass_check(&quadratic(257)).unwrap();
        assert!((chk.laplacian_mass - 8.0 * PI * PI).abs() < 1e-10);
        assert!((chk.twice_mass - 32.0 * PI * PI).abs() < 1e-9);
        assert!((chk.ratio() - 0.25).abs() < 1e-10);
        assert!(chk.boundary_nonpositive);
        assert!(sp.laplacian_integral().abs() < 1e-10);
    }

    #[test]
    fn zero_slice() {
        let b = Arc::new(RadialBall::uniform(2, 1.0, 33).unwrap());
        let z = RadialProfile::zero(b);
        let sp = slice_potential(&z).unwrap();
        assert!(sp.v.iter().all(|v| *v == 0.0));
        let chk = slice_mass_check(&z).unwrap();
        assert_eq!(chk.laplacian_mass, 0.0);
        assert_eq!(chk.twice_mass, 0.0);
        assert!(chk.holds(0.0));
    }

    #[test]
    fn wrong_dimension_is_capability_error() {
        let b = Arc::new(RadialBall::uniform(1, 1.0, 33).unwrap());
        let q = RadialProfile::from_fn(b, |r| r - 1.0).unwrap();
        assert!(matches!(slice_potential(&q), Err(LabError::Capability(_))));
    }

    #[test]
    fn rotational_symmetry() {
        let sp = slice_potential(&quadratic(129)).unwrap();
        for (x, y) in [(0.3, 0.1), (0.7, -0.2), (0.05, 0.6)] {
            assert!(sp.orbit_deviation(x, y, 12) <= 1e-10);
        }
    }

    #[test]
    fn reduction_bound_homogeneous() {
        let u = quadratic(257);
        let a = dimension_reduction_bound(&u, 2.0).unwrap();
        let b = dimension_reduction_bound(&u.scaled(2.0), 2.0).unwrap();
        assert!((a.ratio() - b.ratio()).abs() < 1e-12);
        // ‖ρ-1‖_{L²} = (π²∫(1-ρ)²ρ dρ)^{1/2} = π/√12, M^{1/2} = 4π
        assert!((a.lhs - PI / 12f64.sqrt()).abs() < 1e-4);
        assert!((a.rhs - 4.0 * PI).abs() < 1e-9);
    }
}
