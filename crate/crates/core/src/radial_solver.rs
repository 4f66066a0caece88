//! Exact Dirichlet solver and flow stepping for radial potentials.
//!
//! With `W = ρⁿ(v')ⁿ` the radial operator reads
//! `det(u_{ij̄}) = (nρ^{n-1})⁻¹ dW/dρ`, so the Dirichlet problem
//! integrates in closed form. The discrete solver inverts the
//! finite-volume operator of [`RadialProfile::det`] exactly: apply and
//! solve are mutual inverses at every node but the outermost.

use std::sync::Arc;

use crate::domain::radial::{slopes, RadialBall, RadialProfile};
use crate::error::{LabError, Result};
use crate::flow::{backtracking_step, evaluate, residual_norm, FlowKind, FlowState, StepControl, SLOPE_FLOOR};
use crate::functionals::Potential;

/// Samples of a density `f ≥ 0` on the nodes of a ball.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialRhs {
    pub ball: Arc<RadialBall>,
    pub f: Vec<f64>,
}

impl RadialRhs {
    pub fn new(ball: Arc<RadialBall>, f: Vec<f64>) -> Result<Self> {
        ball.check_len(f.len())?;
        if let Some((i, x)) = f.iter().enumerate().find(|(_, x)| !(**x >= 0.0) || !x.is_finite()) {
            return Err(LabError::InvalidRhs(format!("density must be finite and >= 0, got {x} at node {i}")));
        }
        Ok(Self { ball, f })
    }

    pub fn from_fn(ball: Arc<RadialBall>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let v = ball.rho().iter().map(|&r| f(r)).collect();
        Self::new(ball, v)
    }
}

/// `ρⁿ`-widths of the dual shells: edges are `0`, the cell midpoints and
/// `R²`.
fn shell_spans(ball: &RadialBall) -> Vec<f64> {
    let n = ball.n() as i32;
    let rho = ball.rho();
    let mut edges = Vec::with_capacity(rho.len() + 1);
    edges.push(0.0);
    edges.extend(ball.midpoints());
    edges.push(rho[rho.len() - 1]);
    edges.windows(2).map(|e| e[1].powi(n) - e[0].powi(n)).collect()
}

/// `f = det(u_{ij̄})` of an admissible profile.
pub fn radial_ma_apply(v: &RadialProfile) -> Result<RadialRhs> {
    v.check_admissible()?;
    Ok(RadialRhs { ball: v.ball().clone(), f: v.det().into_iter().map(|d| d.max(0.0)).collect() })
}

/// Solves `det(u_{ij̄}) = f`, `u = 0` on the sphere, exactly for the
/// discrete operator: `W_{i+1/2} = Σ_{j≤i} f_j (ρⁿ-span)_j`,
/// `v' = W^{1/n}/ρ`, then inward integration from `v(R²) = 0`.
pub fn radial_ma_solve(rhs: &RadialRhs) -> Result<RadialProfile> {
    let ball = &rhs.ball;
    ball.check_len(rhs.f.len())?;
    if rhs.f.iter().any(|x| !(*x >= 0.0)) {
        return Err(LabError::InvalidRhs("negative density".into()));
    }
    let n = ball.n() as f64;
    let spans = shell_spans(ball);
    let mid = ball.midpoints();
    let mut w = 0.0;
    let dv = mid
        .iter()
        .enumerate()
        .map(|(i, r)| {
            w += rhs.f[i] * spans[i];
            w.powf(1.0 / n) / r
        })
        .collect();
    RadialProfile::from_slopes(ball.clone(), dv)
}

/// Weighted pool-adjacent-violators: the non-decreasing sequence closest
/// to `y` in the `w`-weighted least-squares sense.
pub fn isotonic_regression(y: &[f64], w: &[f64]) -> Vec<f64> {
    // blocks of (mean, weight, length)
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(y.len());
    for (&yi, &wi) in y.iter().zip(w) {
        blocks.push((yi, wi, 1));
        while blocks.len() > 1 {
            let (m1, w1, l1) = blocks[blocks.len() - 1];
            let (m0, w0, l0) = blocks[blocks.len() - 2];
            if m0 <= m1 {
                break;
            }
            blocks.pop();
            let ws = w0 + w1;
            *blocks.last_mut().unwrap() = ((m0 * w0 + m1 * w1) / ws, ws, l0 + l1);
        }
    }
    blocks.iter().flat_map(|&(m, _, l)| std::iter::repeat_n(m, l)).collect()
}

fn satisfies_floor(v: &RadialProfile) -> bool {
    let floor = SLOPE_FLOOR.powi(v.n() as i32) * (1.0 - 1e-9);
    let det = v.det();
    det[..det.len() - 1].iter().all(|d| *d >= floor)
}

/// Maps a raw profile (vanishing on the boundary) into the admissible
/// cone: isotonic regression of the fluxes `W = ρⁿ(v')ⁿ` measured above
/// the floor flux `ε ρⁿ`, so that `v' ≥ ε^{1/n}`-type floors and
/// `det ≥ εⁿ` hold with `ε` = [`SLOPE_FLOOR`], then inward
/// re-integration. Profiles already inside the cone with the floor are
/// returned unchanged.
pub fn admissibility_project(v: &RadialProfile) -> RadialProfile {
    if v.is_admissible() && satisfies_floor(v) {
        return v.clone();
    }
    let ball = v.ball();
    let n = ball.n() as i32;
    let nf = n as f64;
    let mid = ball.midpoints();
    let floor = SLOPE_FLOOR.powi(n);
    let g: Vec<f64> = v
        .slopes()
        .iter()
        .zip(&mid)
        .map(|(d, r)| {
            let s = r * d;
            s.signum() * s.abs().powi(n) - floor * r.powi(n)
        })
        .collect();
    let widths: Vec<f64> = ball.rho().windows(2).map(|p| p[1] - p[0]).collect();
    let iso = isotonic_regression(&g, &widths);
    let dv = iso.iter().zip(&mid).map(|(gi, r)| (gi.max(0.0) + floor * r.powi(n)).powf(1.0 / nf) / r).collect();
    RadialProfile::from_slopes(ball.clone(), dv).expect("slopes match the ball")
}

/// Projection of raw nodal values; the last value is forced to zero.
pub fn project_values(ball: &Arc<RadialBall>, mut values: Vec<f64>) -> Result<RadialProfile> {
    ball.check_len(values.len())?;
    if let Some(last) = values.last_mut() {
        *last = 0.0;
    }
    if values.iter().any(|x| !x.is_finite()) {
        return Err(LabError::Inadmissible("non-finite sample".into()));
    }
    let dv = slopes(ball.rho(), &values);
    Ok(admissibility_project(&RadialProfile::from_slopes(ball.clone(), dv)?))
}

fn free_nodes(len: usize) -> Vec<bool> {
    let mut free = vec![true; len];
    free[len - 1] = false;
    free
}

/// Starts a radial flow from an admissible profile.
pub fn radial_flow_start(profile: RadialProfile, dt: f64, kind: &FlowKind) -> Result<FlowState<RadialProfile>> {
    let free = free_nodes(profile.ball().len());
    FlowState::new(profile, dt, kind, &free)
}

/// Solves `(I - dt·A) δ = dt·rhs` with `A = ∂ log det/∂v` (tridiagonal)
/// on the nodes `0..N-1`.
fn implicit_increment(u: &RadialProfile, det: &[f64], rhs: &[f64], dt: f64) -> Vec<f64> {
    let ball = u.ball();
    let n = ball.n() as i32;
    let nf = n as f64;
    let rho = ball.rho();
    let mid = ball.midpoints();
    let spans = shell_spans(ball);
    let dv = u.slopes();
    let m = rho.len() - 1;
    let h: Vec<f64> = rho.windows(2).map(|p| p[1] - p[0]).collect();
    let floor = SLOPE_FLOOR.powi(n);
    // dW_{i+1/2}/d(dv_i)
    let dw: Vec<f64> = mid.iter().zip(dv).map(|(r, d)| nf * r.powi(n) * d.max(0.0).powi(n - 1)).collect();
    let (mut lo, mut di, mut up) = (vec![0.0; m], vec![0.0; m], vec![0.0; m]);
    let mut b = vec![0.0; m];
    for i in 0..m {
        let scale = dt / (spans[i] * det[i].max(floor));
        let a = dw[i] / h[i];
        let c = if i > 0 { dw[i - 1] / h[i - 1] } else { 0.0 };
        di[i] = 1.0 + scale * (a + c);
        if i + 1 < m {
            up[i] = -scale * a;
        }
        if i > 0 {
            lo[i] = -scale * c;
        }
        b[i] = dt * rhs[i];
    }
    // Thomas algorithm; the matrix is a diagonally dominant M-matrix
    for i in 1..m {
        let f = lo[i] / di[i - 1];
        di[i] -= f * up[i - 1];
        b[i] -= f * b[i - 1];
    }
    let mut x = vec![0.0; m + 1];
    x[m - 1] = b[m - 1] / di[m - 1];
    for i in (0..m - 1).rev() {
        x[i] = (b[i] - up[i] * x[i + 1]) / di[i];
    }
    x
}

/// One accepted step of the radial flow of the given kind: a linearly
/// implicit Euler step in `log det`, projected onto the admissible cone
/// and accepted under backtracking on the descent functional.
pub fn radial_flow_step(
    state: &FlowState<RadialProfile>,
    kind: &FlowKind,
    control: &StepControl,
) -> Result<FlowState<RadialProfile>> {
    let free = free_nodes(state.profile.ball().len());
    backtracking_step(state, kind, control, &free, |u, eval, vel, dt| {
        let delta = implicit_increment(u, &eval.det, vel, dt);
        let values: Vec<f64> = u.values().iter().zip(&delta).map(|(a, d)| a + d).collect();
        project_values(u.ball(), values)
    })
}

/// `(Σ Vᵢ (detᵢ - g(u)ᵢ)²)^{1/2}` over the nodes inside the ball.
pub fn stationarity_residual(u: &RadialProfile, kind: &FlowKind) -> Result<f64> {
    u.check_admissible()?;
    kind.validate(u.n())?;
    let eval = evaluate(u, kind)?;
    Ok(residual_norm(&eval, &u.domain().dual_volumes(), &free_nodes(u.ball().len())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ball(n: usize, nodes: usize) -> Arc<RadialBall> {
        Arc::new(RadialBall::uniform(n, 1.0, nodes).unwrap())
    }

    #[test]
    fn apply_examples() {
        let b = ball(2, 101);
        let f = radial_ma_apply(&RadialProfile::from_fn(b.clone(), |r| r - 1.0).unwrap()).unwrap();
        assert!(f.f.iter().all(|x| (x - 1.0).abs() < 1e-12));
        let z = radial_ma_apply(&RadialProfile::zero(b)).unwrap();
        assert!(z.f.iter().all(|x| *x == 0.0));
        // (ρ²-1)/2 in n = 1: det = 2ρ up to O(h²)
        let b = ball(1, 1001);
        let f = radial_ma_apply(&RadialProfile::from_fn(b.clone(), |r| 0.5 * (r * r - 1.0)).unwrap()).unwrap();
        for (x, r) in f.f.iter().zip(b.rho()).take(1000).skip(1) {
            assert!((x - 2.0 * r).abs() < 1e-5, "{x} vs {}", 2.0 * r);
        }
    }

    #[test]
    fn solve_examples() {
        for n in 1..=2 {
            let b = ball(n, 1000);
            let v = radial_ma_solve(&RadialRhs::from_fn(b.clone(), |_| 1.0).unwrap()).unwrap();
            for (x, r) in v.values().iter().zip(b.rho()) {
                assert!((x - (r - 1.0)).abs() < 1e-10);
            }
        }
        let b = ball(2, 50);
        let v = radial_ma_solve(&RadialRhs::new(b.clone(), vec![0.0; 50]).unwrap()).unwrap();
        assert!(v.values().iter().all(|x| *x == 0.0));
        assert!(matches!(RadialRhs::new(b, vec![-1.0; 50]), Err(LabError::InvalidRhs(_))));
    }

    #[test]
    fn isotonic_small_arrays() {
        let y = [1.0, 3.0, 2.0, 4.0];
        assert_eq!(isotonic_regression(&y, &[1.0; 4]), vec![1.0, 2.5, 2.5, 4.0]);
        let y = [3.0, 1.0];
        assert_eq!(isotonic_regression(&y, &[1.0, 3.0]), vec![1.5, 1.5]);
        let y = [0.0, 1.0, 2.0];
        assert_eq!(isotonic_regression(&y, &[1.0; 3]), y.to_vec());
    }

    #[test]
    fn projection_examples() {
        let b = ball(1, 41);
        let q = RadialProfile::from_fn(b.clone(), |r| r - 1.0).unwrap();
        assert_eq!(admissibility_project(&q), q);
        let z = admissibility_project(&RadialProfile::zero(b.clone()));
        assert!(z.is_admissible());
        assert!(z.values().iter().all(|x| x.abs() <= SLOPE_FLOOR * (1.0 + 1e-9)));
        let mut dv = q.slopes().to_vec();
        dv[20] = -1.0;
        let raw = RadialProfile::from_slopes(b.clone(), dv.clone()).unwrap();
        let p = admissibility_project(&raw);
        assert!(p.is_admissible());
        // cells past the flipped one keep their slopes
        for (a, b) in p.slopes()[21..].iter().zip(&dv[21..]) {
            assert!((a - b).abs() < 1e-12);
        }
        // fluxes agree with the min-max formula of isotonic regression
        let mid = b.midpoints();
        let h: Vec<f64> = b.rho().windows(2).map(|r| r[1] - r[0]).collect();
        let g: Vec<f64> = dv.iter().zip(&mid).map(|(d, r)| r * d - SLOPE_FLOOR * r).collect();
        #[allow(clippy::needless_range_loop)]
        for i in 0..g.len() {
            let mut best = f64::NEG_INFINITY;
            for j in 0..=i {
                let mut worst = f64::INFINITY;
                for k in i..g.len() {
                    let (s, w) = (j..=k).fold((0.0, 0.0), |(s, w), l| (s + g[l] * h[l], w + h[l]));
                    worst = worst.min(s / w);
                }
                best = best.max(worst);
            }
            let expected = (best.max(0.0) + SLOPE_FLOOR * mid[i]) / mid[i];
            assert!((p.slopes()[i] - expected).abs() < 1e-12, "cell {i}");
        }
        assert_eq!(admissibility_project(&p), p);
    }
}
