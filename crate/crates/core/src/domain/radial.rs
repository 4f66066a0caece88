//! Radial balls in ℂⁿ and potentials `u(z) = v(|z|²)` sampled on a grid in
//! `ρ = |z|²`.
//!
//! Lebesgue measure on ℝ²ⁿ pushes forward to `c_n ρ^{n-1} dρ` with
//! `c_n = πⁿ / (n-1)!`. Two quadratures are offered:
//!
//! * [`RadialBall::integrate`] is the composite trapezoid rule of
//!   `c_n ∫ g ρ^{n-1} dρ` on the (possibly non-uniform) grid;
//! * [`RadialBall::dual_volumes`] are exact volumes of the dual shells
//!   `{ρ_{i-1/2} ≤ |z|² ≤ ρ_{i+1/2}}`, the weights paired with the
//!   finite-volume Monge-Ampère operator in [`RadialProfile::det`].

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{LabError, Result};

/// Default number of nodes of a graded grid.
pub const DEFAULT_NODES: usize = 2048;
/// Default width of the first cell, relative to `R²`.
pub const DEFAULT_FIRST_CELL: f64 = 1e-12;
/// Default growth factor of the geometric part of a graded grid.
pub const DEFAULT_GROWTH: f64 = 1.05;

/// `c_n = πⁿ/(n-1)!`, the radial volume weight.
pub fn radial_weight(n: usize) -> f64 {
    let mut c = PI.powi(n as i32);
    for k in 1..n {
        c /= k as f64;
    }
    c
}

/// `κ_n = 4ⁿ n!`, the factor in `(dd^c u)ⁿ = κ_n det(u_{ij̄}) dμ`.
pub fn kappa(n: usize) -> f64 {
    let mut k = 4f64.powi(n as i32);
    for j in 2..=n {
        k *= j as f64;
    }
    k
}

/// Volume of the ball of radius `r` in ℂⁿ.
pub fn ball_volume(n: usize, r: f64) -> f64 {
    radial_weight(n) * r.powi(2 * n as i32) / n as f64
}

/// A ball `{|z| < R}` in ℂⁿ with a strictly increasing grid in `ρ = |z|²`
/// running from `0` to `R²`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialBall {
    n: usize,
    radius: f64,
    rho: Vec<f64>,
}

impl RadialBall {
    /// Ball with an explicit grid. The grid must start at 0 and end at `R²`.
    pub fn from_grid(n: usize, radius: f64, rho: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(LabError::InvalidDomain("complex dimension must be >= 1".into()));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(LabError::InvalidDomain(format!("radius must be positive, got {radius}")));
        }
        if rho.len() < 2 {
            return Err(LabError::InvalidDomain(format!("grid needs at least 2 points, got {}", rho.len())));
        }
        if rho[0] != 0.0 {
            return Err(LabError::InvalidDomain("grid must start at rho = 0".into()));
        }
        let r2 = radius * radius;
        if (rho[rho.len() - 1] - r2).abs() > 1e-12 * r2 {
            return Err(LabError::InvalidDomain("grid must end at rho = R^2".into()));
        }
        if rho.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(LabError::InvalidDomain("grid must be strictly increasing".into()));
        }
        let mut rho = rho;
        let last = rho.len() - 1;
        rho[last] = r2;
        Ok(Self { n, radius, rho })
    }

    /// Uniform grid in `ρ` with `nodes` points.
    pub fn uniform(n: usize, radius: f64, nodes: usize) -> Result<Self> {
        if nodes < 2 {
            return Err(LabError::InvalidDomain(format!("grid needs at least 2 points, got {nodes}")));
        }
        let r2 = radius * radius;
        let cells = (nodes - 1) as f64;
        let rho = (0..nodes).map(|i| r2 * i as f64 / cells).collect();
        Self::from_grid(n, radius, rho)
    }

    /// The default graded grid: [`DEFAULT_NODES`] points, first cell
    /// `10⁻¹² R²`.
    pub fn graded_default(n: usize, radius: f64) -> Result<Self> {
        Self::graded(n, radius, DEFAULT_NODES, DEFAULT_FIRST_CELL * radius * radius, DEFAULT_GROWTH)
    }

    /// Grid that grows geometrically from a cell of width `first_cell`
    /// (absolute, in `ρ` units) by factor `growth` until it reaches the
    /// width of a uniform tail, which then fills the rest of `[0, R²]`.
    /// Falls back to a purely geometric grid when `nodes` is too small.
    pub fn graded(n: usize, radius: f64, nodes: usize, first_cell: f64, growth: f64) -> Result<Self> {
        if nodes < 3 {
            return Self::uniform(n, radius, nodes);
        }
        let r2 = radius * radius;
        if !(first_cell > 0.0) || first_cell >= r2 {
            return Err(LabError::InvalidDomain(format!("first cell {first_cell:e} outside (0, R^2)")));
        }
        if !(growth > 1.0) {
            return Err(LabError::InvalidDomain(format!("growth factor must exceed 1, got {growth}")));
        }
        let cells = nodes - 1;
        let mut geometric_sum = 0.0;
        let mut width = first_cell;
        for k in 0..cells {
            // k geometric cells so far, the rest uniform
            let rest = r2 - geometric_sum;
            let tail = rest / (cells - k) as f64;
            if width >= tail && rest > 0.0 {
                let mut rho = Vec::with_capacity(nodes);
                rho.push(0.0);
                let mut acc = 0.0;
                let mut w = first_cell;
                for _ in 0..k {
                    acc += w;
                    rho.push(acc);
                    w *= growth;
                }
                for j in 1..=(cells - k) {
                    rho.push(geometric_sum + tail * j as f64);
                }
                return Self::from_grid(n, radius, rho);
            }
            geometric_sum += width;
            width *= growth;
        }
        Self::geometric(n, radius, nodes, first_cell)
    }

    /// Purely geometric grid with the given first cell; the ratio is
    /// solved so that the cells sum to `R²`.
    pub fn geometric(n: usize, radius: f64, nodes: usize, first_cell: f64) -> Result<Self> {
        let r2 = radius * radius;
        let cells = nodes.saturating_sub(1);
        if cells < 1 {
            return Err(LabError::InvalidDomain("grid needs at least 2 points".into()));
        }
        let total = |q: f64| {
            let mut s = 0.0;
            let mut w = first_cell;
            for _ in 0..cells {
                s += w;
                w *= q;
            }
            s
        };
        let (mut lo, mut hi) = (1.0, 2.0);
        while total(hi) < r2 {
            hi *= 2.0;
        }
        if total(lo) > r2 {
            return Self::uniform(n, radius, nodes);
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if total(mid) < r2 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let q = 0.5 * (lo + hi);
        let mut rho = Vec::with_capacity(nodes);
        rho.push(0.0);
        let mut acc = 0.0;
        let mut w = first_cell;
        for _ in 0..cells {
            acc += w;
            rho.push(acc);
            w *= q;
        }
        let scale = r2 / acc;
        rho.iter_mut().for_each(|r| *r *= scale);
        Self::from_grid(n, radius, rho)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    pub fn diameter(&self) -> f64 {
        2.0 * self.radius
    }

    pub fn volume(&self) -> f64 {
        ball_volume(self.n, self.radius)
    }

    /// Cell midpoints `ρ_{i+1/2}`.
    pub fn midpoints(&self) -> Vec<f64> {
        self.rho.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    /// Trapezoid weights including the measure: `∫ g dμ ≈ Σ wᵢ gᵢ`.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let c = radial_weight(self.n);
        let m = self.rho.len();
        let mut w = vec![0.0; m];
        for i in 0..m - 1 {
            let h = self.rho[i + 1] - self.rho[i];
            w[i] += 0.5 * h;
            w[i + 1] += 0.5 * h;
        }
        let p = self.n as i32 - 1;
        for (wi, &r) in w.iter_mut().zip(&self.rho) {
            *wi *= c * r.powi(p);
        }
        w
    }

    /// Exact volumes of the dual shells around each node. They sum to the
    /// volume of the ball.
    pub fn dual_volumes(&self) -> Vec<f64> {
        let n = self.n as i32;
        let c = radial_weight(self.n) / self.n as f64;
        let m = self.rho.len();
        let mut edges = Vec::with_capacity(m + 1);
        edges.push(0.0);
        edges.extend(self.midpoints());
        edges.push(self.rho[m - 1]);
        edges.windows(2).map(|e| c * (e[1].powi(n) - e[0].powi(n))).collect()
    }

    /// Composite trapezoid quadrature of `∫_B g dμ` for radial `g` sampled
    /// on the grid.
    pub fn integrate(&self, g: &[f64]) -> Result<f64> {
        self.check_len(g.len())?;
        Ok(self.trapezoid_weights().iter().zip(g).map(|(w, v)| w * v).sum())
    }

    /// `ln ∫_B exp(a) dμ` for radial exponent samples `a`, evaluated
    /// without overflow.
    pub fn log_integral_exp(&self, exponent: &[f64]) -> Result<f64> {
        self.check_len(exponent.len())?;
        let terms: Vec<f64> =
            self.trapezoid_weights().iter().zip(exponent).filter(|(w, _)| **w > 0.0).map(|(w, a)| w.ln() + a).collect();
        Ok(log_sum_exp(&terms))
    }

    /// The same ball with every `ρ` multiplied by `s²` (radius `sR`).
    pub fn dilated(&self, s: f64) -> Result<Self> {
        let s2 = s * s;
        Self::from_grid(self.n, self.radius * s, self.rho.iter().map(|r| r * s2).collect())
    }

    /// The same grid shape in another complex dimension.
    pub fn with_dimension(&self, n: usize) -> Result<Self> {
        Self::from_grid(n, self.radius, self.rho.clone())
    }

    pub(crate) fn check_len(&self, got: usize) -> Result<()> {
        if got != self.rho.len() {
            return Err(LabError::ShapeMismatch { expected: self.rho.len(), got });
        }
        Ok(())
    }
}

/// `ln Σ exp(tᵢ)`; `-∞` for an empty slice.
pub fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// Relative slack allowed when checking discrete plurisubharmonicity.
pub const ADMISSIBILITY_TOL: f64 = 1e-10;

/// A radial potential `u(z) = v(|z|²)` on a [`RadialBall`].
///
/// `v` lives on the nodes, `dv` holds the one-sided slopes on the cells.
/// Admissible profiles vanish at `ρ = R²`, are non-positive and satisfy
/// the discrete plurisubharmonicity conditions `v' ≥ 0` and
/// `ρⁿ (v')ⁿ` non-decreasing (equivalently `v' + ρ v'' ≥ 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    ball: Arc<RadialBall>,
    v: Vec<f64>,
    dv: Vec<f64>,
}

impl RadialProfile {
    /// Builds and validates an admissible profile.
    pub fn new(ball: Arc<RadialBall>, v: Vec<f64>) -> Result<Self> {
        let p = Self::raw(ball, v)?;
        p.check_admissible()?;
        Ok(p)
    }

    /// Samples `v(ρ)` on the grid of `ball` and validates the result.
    pub fn from_fn(ball: Arc<RadialBall>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let v = ball.rho().iter().map(|&r| f(r)).collect();
        Self::new(ball, v)
    }

    /// The zero profile.
    pub fn zero(ball: Arc<RadialBall>) -> Self {
        let m = ball.len();
        Self { ball, v: vec![0.0; m], dv: vec![0.0; m - 1] }
    }

    /// Builds a profile checking only shape, finiteness and the boundary
    /// value; admissibility is not enforced.
    pub fn raw(ball: Arc<RadialBall>, mut v: Vec<f64>) -> Result<Self> {
        ball.check_len(v.len())?;
        if v.iter().any(|x| !x.is_finite()) {
            return Err(LabError::Inadmissible("non-finite sample".into()));
        }
        let last = v.len() - 1;
        let scale = v.iter().fold(1.0f64, |a, x| a.max(x.abs()));
        if v[last].abs() > 1e-12 * scale {
            return Err(LabError::Inadmissible(format!(
                "profile must vanish on the boundary, got v(R^2) = {:e}",
                v[last]
            )));
        }
        v[last] = 0.0;
        let dv = slopes(ball.rho(), &v);
        Ok(Self { ball, v, dv })
    }

    /// Builds a profile from cell slopes by integrating inward from the
    /// boundary.
    pub fn from_slopes(ball: Arc<RadialBall>, dv: Vec<f64>) -> Result<Self> {
        ball.check_len(dv.len() + 1)?;
        let rho = ball.rho();
        let m = rho.len();
        let mut v = vec![0.0; m];
        for i in (0..m - 1).rev() {
            v[i] = v[i + 1] - dv[i] * (rho[i + 1] - rho[i]);
        }
        Ok(Self { ball, v, dv })
    }

    pub fn ball(&self) -> &Arc<RadialBall> {
        &self.ball
    }

    pub fn n(&self) -> usize {
        self.ball.n()
    }

    pub fn values(&self) -> &[f64] {
        &self.v
    }

    pub fn slopes(&self) -> &[f64] {
        &self.dv
    }

    /// `t·u`.
    pub fn scaled(&self, t: f64) -> Self {
        Self {
            ball: self.ball.clone(),
            v: self.v.iter().map(|x| t * x).collect(),
            dv: self.dv.iter().map(|x| t * x).collect(),
        }
    }

    /// `u(·/s)` on the ball of radius `sR`.
    pub fn dilated(&self, s: f64) -> Result<Self> {
        let ball = Arc::new(self.ball.dilated(s)?);
        Self::raw(ball, self.v.clone())
    }

    /// `sup(-u)`.
    pub fn depth(&self) -> f64 {
        self.v.iter().fold(0.0f64, |a, x| a.max(-x))
    }

    /// Cell fluxes `W_{i+1/2} = ρ_{i+1/2}ⁿ (v'_{i+1/2})ⁿ`; the radial
    /// Monge-Ampère operator is `det = (nρ^{n-1})⁻¹ dW/dρ`.
    pub fn fluxes(&self) -> Vec<f64> {
        let n = self.n() as i32;
        self.ball.midpoints().iter().zip(&self.dv).map(|(r, d)| (r * d.max(0.0)).powi(n)).collect()
    }

    /// Nodal values of `det(u_{ij̄}) = (v')^{n-1}(v' + ρv'')` in
    /// finite-volume form: the flux jump across the dual shell of each
    /// node divided by its `ρⁿ`-width. At the outer node the last slope is
    /// extended to the boundary.
    pub fn det(&self) -> Vec<f64> {
        let n = self.n() as i32;
        let rho = self.ball.rho();
        let mid = self.ball.midpoints();
        let w = self.fluxes();
        let m = rho.len();
        let mut out = Vec::with_capacity(m);
        for i in 0..m {
            let (w_lo, r_lo) = if i == 0 { (0.0, 0.0) } else { (w[i - 1], mid[i - 1]) };
            let (w_hi, r_hi) =
                if i + 1 < m { (w[i], mid[i]) } else { ((rho[i] * self.dv[i - 1].max(0.0)).powi(n), rho[i]) };
            let span = r_hi.powi(n) - r_lo.powi(n);
            out.push(if span > 0.0 { (w_hi - w_lo) / span } else { 0.0 });
        }
        out
    }

    /// Checks the discrete plurisubharmonic cone with relative slack
    /// [`ADMISSIBILITY_TOL`].
    pub fn check_admissible(&self) -> Result<()> {
        let dv_scale = self.dv.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        if let Some((i, d)) = self.dv.iter().enumerate().find(|(_, d)| **d < -ADMISSIBILITY_TOL * dv_scale.max(1e-300))
        {
            return Err(LabError::Inadmissible(format!("negative slope {d:e} on cell {i}")));
        }
        let w = self.fluxes();
        let w_scale = w.iter().fold(0.0f64, |a, x| a.max(*x));
        if let Some(i) = w.windows(2).position(|p| p[1] < p[0] - ADMISSIBILITY_TOL * w_scale) {
            return Err(LabError::Inadmissible(format!("flux decreases across node {} (v' + rho v'' < 0)", i + 1)));
        }
        Ok(())
    }

    pub fn is_admissible(&self) -> bool {
        self.check_admissible().is_ok()
    }
}

/// One-sided slopes on the cells.
pub(crate) fn slopes(rho: &[f64], v: &[f64]) -> Vec<f64> {
    rho.windows(2).zip(v.windows(2)).map(|(r, x)| (x[1] - x[0]) / (r[1] - r[0])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(n: usize, nodes: usize) -> RadialBall {
        RadialBall::uniform(n, 1.0, nodes).unwrap()
    }

    #[test]
    fn constants() {
        assert_eq!(kappa(1), 4.0);
        assert_eq!(kappa(2), 32.0);
        assert!((radial_weight(2) - PI * PI).abs() < 1e-15);
        assert!((radial_weight(3) - PI.powi(3) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn unit_disc_area() {
        let b = unit(1, 65);
        let ones = vec![1.0; b.len()];
        assert!((b.integrate(&ones).unwrap() - PI).abs() < 1e-14);
    }

    #[test]
    fn unit_ball_volume_in_c2() {
        let b = unit(2, 65);
        let ones = vec![1.0; b.len()];
        assert!((b.integrate(&ones).unwrap() - PI * PI / 2.0).abs() < 1e-13);
    }

    #[test]
    fn linear_integrand() {
        let b = unit(1, 33);
        let g = b.rho().to_vec();
        assert!((b.integrate(&g).unwrap() - PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn short_grid_rejected() {
        assert!(matches!(RadialBall::uniform(1, 1.0, 1), Err(LabError::InvalidDomain(_))));
        assert!(matches!(RadialBall::from_grid(1, 1.0, vec![0.0]), Err(LabError::InvalidDomain(_))));
    }

    #[test]
    fn graded_grid_shape() {
        let b = RadialBall::graded_default(2, 1.0).unwrap();
        assert_eq!(b.len(), DEFAULT_NODES);
        assert!(b.rho()[1] <= 1e-12 * (1.0 + 1e-9));
        assert!(b.rho().windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn dual_volumes_sum_to_volume() {
        for n in 1..=3 {
            let b = RadialBall::graded(n, 1.3, 300, 1e-9, 1.05).unwrap();
            let s: f64 = b.dual_volumes().iter().sum();
            assert!((s - b.volume()).abs() < 1e-12 * b.volume());
        }
    }

    #[test]
    fn log_integral_exp_matches_direct() {
        let b = unit(2, 101);
        let a: Vec<f64> = b.rho().iter().map(|r| 3.0 * (1.0 - r)).collect();
        let direct = b.integrate(&a.iter().map(|x| x.exp()).collect::<Vec<_>>()).unwrap();
        let logged = b.log_integral_exp(&a).unwrap();
        assert!((logged.exp() - direct).abs() < 1e-12 * direct);
    }

    #[test]
    fn quadratic_profile_det_is_one() {
        for n in 1..=3 {
            let b = Arc::new(RadialBall::graded(n, 1.0, 200, 1e-8, 1.05).unwrap());
            let p = RadialProfile::from_fn(b, |r| r - 1.0).unwrap();
            for d in p.det() {
                assert!((d - 1.0).abs() < 1e-6, "n={n} det={d}");
            }
        }
    }

    #[test]
    fn nonzero_boundary_rejected() {
        let b = Arc::new(unit(1, 5));
        assert!(RadialProfile::from_fn(b, |r| r - 2.0).is_err());
    }

    #[test]
    fn decreasing_profile_inadmissible() {
        let b = Arc::new(unit(1, 9));
        assert!(RadialProfile::from_fn(b, |r| 1.0 - r).is_err());
    }
}
