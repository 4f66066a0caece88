//! Planar backend (`n = 1`): `det(u_{11̄}) = Δu/4`, Dirichlet Poisson
//! solves on [`PlanarGrid`] domains and the two flows on grid fields.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::domain::planar::{grid_laplacian, GridField, NodeKind, PlanarGrid, StencilRow};
use crate::error::{LabError, Result};
use crate::flow::{backtracking_step, evaluate, residual_norm, FlowKind, FlowState, StepControl, SLOPE_FLOOR};
use crate::functionals::Measure;

/// Relative residual at which the iterative solvers stop.
pub const SOLVER_TOL: f64 = 1e-10;

/// `A = -Δ + diag(shift)` restricted to the interior nodes, with
/// homogeneous Dirichlet data eliminated.
#[derive(Debug, Clone)]
pub struct InteriorOperator {
    /// Global node of each unknown.
    pub nodes: Vec<usize>,
    diag: Vec<f64>,
    offdiag: Vec<Vec<(usize, f64)>>,
    symmetric: bool,
}

impl InteriorOperator {
    pub fn new(grid: &PlanarGrid) -> Result<Self> {
        let rows = grid.stencil()?;
        Ok(Self::from_rows(grid, &rows))
    }

    fn from_rows(grid: &PlanarGrid, rows: &[StencilRow]) -> Self {
        let mut local = vec![usize::MAX; grid.len()];
        for (l, r) in rows.iter().enumerate() {
            local[r.node] = l;
        }
        let nodes: Vec<usize> = rows.iter().map(|r| r.node).collect();
        let diag: Vec<f64> = rows.iter().map(|r| -r.center).collect();
        let offdiag: Vec<Vec<(usize, f64)>> = rows
            .iter()
            .map(|r| {
                r.neighbours
                    .iter()
                    .filter(|(nb, _)| grid.kind(*nb) == NodeKind::Interior)
                    .map(|(nb, c)| (local[*nb], -c))
                    .collect()
            })
            .collect();
        let mut symmetric = true;
        'outer: for (i, row) in offdiag.iter().enumerate() {
            for &(j, c) in row {
                let back = offdiag[j].iter().find(|(k, _)| *k == i).map_or(0.0, |(_, c)| *c);
                if (back - c).abs() > 1e-12 * c.abs() {
                    symmetric = false;
                    break 'outer;
                }
            }
        }
        Self { nodes, diag, offdiag, symmetric }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    fn apply(&self, shift: &[f64], x: &[f64], out: &mut [f64]) {
        for i in 0..x.len() {
            let mut acc = (self.diag[i] + shift[i]) * x[i];
            for &(j, c) in &self.offdiag[i] {
                acc += c * x[j];
            }
            out[i] = acc;
        }
    }

    /// Solves `(-Δ + diag(shift)) x = b` with Jacobi preconditioning: CG
    /// when the stencil is symmetric, BiCGSTAB otherwise.
    pub fn solve(&self, shift: &[f64], b: &[f64]) -> Result<SolveStats> {
        let m = self.len();
        let bn = norm(b);
        if bn == 0.0 {
            return Ok(SolveStats { x: vec![0.0; m], iterations: 0, residual: 0.0 });
        }
        let inv: Vec<f64> = self.diag.iter().zip(shift).map(|(d, s)| 1.0 / (d + s)).collect();
        let cap = 10 * m + 1000;
        if self.symmetric {
            self.cg(shift, b, &inv, bn, cap)
        } else {
            self.bicgstab(shift, b, &inv, bn, cap)
        }
    }

    fn cg(&self, shift: &[f64], b: &[f64], inv: &[f64], bn: f64, cap: usize) -> Result<SolveStats> {
        let m = b.len();
        let mut x = vec![0.0; m];
        let mut r = b.to_vec();
        let mut z: Vec<f64> = r.iter().zip(inv).map(|(a, d)| a * d).collect();
        let mut p = z.clone();
        let mut ap = vec![0.0; m];
        let mut rz = dot(&r, &z);
        for it in 1..=cap {
            self.apply(shift, &p, &mut ap);
            let alpha = rz / dot(&p, &ap);
            for i in 0..m {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            let res = norm(&r) / bn;
            if res <= SOLVER_TOL {
                return Ok(SolveStats { x, iterations: it, residual: res });
            }
            for i in 0..m {
                z[i] = r[i] * inv[i];
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..m {
                p[i] = z[i] + beta * p[i];
            }
        }
        Err(LabError::SolverFailure { iterations: cap, residual: norm(&r) / bn })
    }

    fn bicgstab(&self, shift: &[f64], b: &[f64], inv: &[f64], bn: f64, cap: usize) -> Result<SolveStats> {
        let m = b.len();
        let mut x = vec![0.0; m];
        let mut r = b.to_vec();
        let r0 = r.clone();
        let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
        let mut v = vec![0.0; m];
        let mut p = vec![0.0; m];
        let mut y = vec![0.0; m];
        let mut s = vec![0.0; m];
        let mut zz = vec![0.0; m];
        let mut t = vec![0.0; m];
        for it in 1..=cap {
            let rho_new = dot(&r0, &r);
            if rho_new == 0.0 {
                break;
            }
            let beta = (rho_new / rho) * (alpha / omega);
            rho = rho_new;
            for i in 0..m {
                p[i] = r[i] + beta * (p[i] - omega * v[i]);
                y[i] = p[i] * inv[i];
            }
            self.apply(shift, &y, &mut v);
            alpha = rho / dot(&r0, &v);
            for i in 0..m {
                s[i] = r[i] - alpha * v[i];
            }
            if norm(&s) / bn <= SOLVER_TOL {
                for i in 0..m {
                    x[i] += alpha * y[i];
                }
                let res = self.true_residual(shift, &x, b) / bn;
                return Ok(SolveStats { x, iterations: it, residual: res });
            }
            for i in 0..m {
                zz[i] = s[i] * inv[i];
            }
            self.apply(shift, &zz, &mut t);
            omega = dot(&t, &s) / dot(&t, &t);
            for i in 0..m {
                x[i] += alpha * y[i] + omega * zz[i];
                r[i] = s[i] - omega * t[i];
            }
            if norm(&r) / bn <= SOLVER_TOL {
                let res = self.true_residual(shift, &x, b) / bn;
                if res <= 10.0 * SOLVER_TOL {
                    return Ok(SolveStats { x, iterations: it, residual: res });
                }
            }
            if omega == 0.0 {
                break;
            }
        }
        Err(LabError::SolverFailure { iterations: cap, residual: norm(&r) / bn })
    }

    fn true_residual(&self, shift: &[f64], x: &[f64], b: &[f64]) -> f64 {
        let mut ax = vec![0.0; x.len()];
        self.apply(shift, x, &mut ax);
        ax.iter().zip(b).map(|(a, c)| (a - c).powi(2)).sum::<f64>().sqrt()
    }
}

/// Solution and convergence data of one linear solve.
#[derive(Debug, Clone)]
pub struct SolveStats {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// The Dirichlet problem `Δu = 4f` (`det = f`), `u = 0` off the interior.
#[derive(Debug, Clone)]
pub struct PoissonSystem {
    pub grid: Arc<PlanarGrid>,
    pub rhs: GridField,
    pub iterations: usize,
    pub residual: f64,
}

impl PoissonSystem {
    pub fn new(rhs: GridField) -> Result<Self> {
        let grid = rhs.grid().clone();
        for k in grid.interior_nodes() {
            let f = rhs.values()[k];
            if !(f >= 0.0) {
                let (i, j) = grid.ij(k);
                return Err(LabError::InvalidRhs(format!("density must be >= 0, got {f} at ({i}, {j})")));
            }
        }
        Ok(Self { grid, rhs, iterations: 0, residual: 0.0 })
    }

    /// System with prescribed Laplacian `Δu = lap`.
    pub fn from_laplacian(grid: Arc<PlanarGrid>, lap: impl Fn(f64, f64) -> f64) -> Result<Self> {
        Self::new(GridField::from_fn(grid, |x, y| 0.25 * lap(x, y))?)
    }
}

/// Solves the system, recording iterations and the final relative
/// residual in `sys`.
pub fn poisson_solve(sys: &mut PoissonSystem) -> Result<GridField> {
    let op = InteriorOperator::new(&sys.grid)?;
    let (field, stats) = solve_with(&op, &sys.grid, sys.rhs.values())?;
    sys.iterations = stats.iterations;
    sys.residual = stats.residual;
    Ok(field)
}

fn solve_with(op: &InteriorOperator, grid: &Arc<PlanarGrid>, f: &[f64]) -> Result<(GridField, SolveStats)> {
    let b: Vec<f64> = op.nodes.iter().map(|&k| -4.0 * f[k]).collect();
    let stats = op.solve(&vec![0.0; op.len()], &b)?;
    let mut values = vec![0.0; grid.len()];
    for (l, &k) in op.nodes.iter().enumerate() {
        // the discrete maximum principle gives u ≤ 0; drop round-off
        values[k] = stats.x[l].min(0.0);
    }
    Ok((GridField::new(grid.clone(), values)?, stats))
}

fn free_nodes(grid: &PlanarGrid) -> Vec<bool> {
    grid.mask().iter().map(|k| *k == NodeKind::Interior).collect()
}

/// Starts a planar flow from an admissible field.
pub fn planar_flow_start(field: GridField, dt: f64, kind: &FlowKind) -> Result<FlowState<GridField>> {
    let free = free_nodes(field.grid());
    FlowState::new(field, dt, kind, &free)
}

/// One accepted step of the planar flow: `(diag Δu - dt Δ) δ = dt Δu·v`
/// for the velocity `v = log(Δu/4) - log g`, then `Δu` is clamped at
/// `4ε` and the field re-solved when needed.
pub fn planar_flow_step(
    state: &FlowState<GridField>,
    kind: &FlowKind,
    control: &StepControl,
) -> Result<FlowState<GridField>> {
    let grid = state.profile.grid().clone();
    let op = InteriorOperator::new(&grid)?;
    let free = free_nodes(&grid);
    backtracking_step(state, kind, control, &free, |u, eval, vel, dt| {
        let lap: Vec<f64> = op.nodes.iter().map(|&k| (4.0 * eval.det[k]).max(4.0 * SLOPE_FLOOR)).collect();
        let shift: Vec<f64> = lap.iter().map(|l| l / dt).collect();
        let b: Vec<f64> = op.nodes.iter().zip(&lap).map(|(&k, l)| l * vel[k]).collect();
        let delta = op.solve(&shift, &b)?.x;
        let mut values = u.values().to_vec();
        for (l, &k) in op.nodes.iter().enumerate() {
            values[k] += delta[l];
        }
        let cand = GridField::new(grid.clone(), values)?;
        let new_lap = grid_laplacian(&cand)?;
        let floor = 4.0 * SLOPE_FLOOR;
        let ok = op.nodes.iter().all(|&k| new_lap.values()[k] >= floor * (1.0 - 1e-9));
        if ok && cand.values().iter().all(|v| *v <= 0.0) {
            return Ok(cand);
        }
        let f: Vec<f64> = new_lap.values().iter().map(|l| 0.25 * l.max(floor)).collect();
        Ok(solve_with(&op, &grid, &f)?.0)
    })
}

/// `(Σ wᵢ (Δuᵢ/4 - g(u)ᵢ)²)^{1/2}` over the interior nodes.
pub fn planar_stationarity_residual(u: &GridField, kind: &FlowKind) -> Result<f64> {
    crate::functionals::Potential::check_admissible(u)?;
    kind.validate(1)?;
    let eval = evaluate(u, kind)?;
    Ok(residual_norm(&eval, &u.grid().nodal_volumes(), &free_nodes(u.grid())))
}

/// Both sides of the planar exponential estimate for `Δu = f ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BrezisMerle {
    /// `∫ exp((4π - δ)(-u)/‖f‖₁) dx`.
    pub lhs: f64,
    /// `4π² diam(Ω)²/δ`.
    pub bound: f64,
    pub holds: bool,
}

/// Evaluates `∫exp((4π-δ)(-u)/‖f‖_{L¹})` and `4π²diam(Ω)²/δ`.
pub fn brezis_merle_check(u: &GridField, f: &GridField, delta: f64) -> Result<BrezisMerle> {
    if !(delta > 0.0 && delta < 4.0 * PI) {
        return Err(LabError::Parameter(format!("delta must lie in (0, 4π), got {delta}")));
    }
    if !Arc::ptr_eq(u.grid(), f.grid()) && u.grid().as_ref() != f.grid().as_ref() {
        return Err(LabError::Parameter("u and f live on different grids".into()));
    }
    let w = u.grid().weights();
    if f.values().iter().any(|x| !(*x >= 0.0)) {
        return Err(LabError::InvalidRhs("f must be >= 0".into()));
    }
    let l1: f64 = f.values().iter().zip(w).map(|(x, w)| w * x).sum();
    if !(l1 > 0.0) {
        return Err(LabError::Degenerate("f has zero mass".into()));
    }
    let a = (4.0 * PI - delta) / l1;
    let exponent: Vec<f64> = u.values().iter().map(|x| a * (-x).max(0.0)).collect();
    let lhs = crate::functionals::log_integral_exp(w, &exponent).exp();
    let d = u.grid().diameter();
    let bound = 4.0 * PI * PI * d * d / delta;
    Ok(BrezisMerle { lhs, bound, holds: lhs <= bound })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_err(u: &GridField, exact: impl Fn(f64, f64) -> f64) -> f64 {
        let g = u.grid();
        g.interior_nodes()
            .map(|k| {
                let (x, y) = g.coords(k);
                (u.values()[k] - exact(x, y)).abs()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn sine_source_on_square() {
        let mut errs = Vec::new();
        for cells in [16, 32, 64] {
            let g = Arc::new(PlanarGrid::unit_square(cells).unwrap());
            let mut sys =
                PoissonSystem::from_laplacian(g, |x, y| 2.0 * PI * PI * (PI * x).sin() * (PI * y).sin()).unwrap();
            let u = poisson_solve(&mut sys).unwrap();
            assert!(sys.residual <= SOLVER_TOL);
            errs.push(max_err(&u, |x, y| -(PI * x).sin() * (PI * y).sin()));
        }
        assert!(errs[2] < 1e-3);
        for w in errs.windows(2) {
            assert!((w[0] / w[1]).log2() >= 1.9, "{errs:?}");
        }
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let g = Arc::new(PlanarGrid::unit_square(8).unwrap());
        let mut sys = PoissonSystem::new(GridField::zeros(g)).unwrap();
        let u = poisson_solve(&mut sys).unwrap();
        assert!(u.values().iter().all(|x| *x == 0.0));
        assert_eq!(sys.iterations, 0);
    }

    #[test]
    fn paraboloid_on_disc() {
        let g = Arc::new(PlanarGrid::disc(0.0, 0.0, 1.0, 40).unwrap());
        assert!(!InteriorOperator::new(&g).unwrap().is_symmetric());
        let mut sys = PoissonSystem::from_laplacian(g, |_, _| 4.0).unwrap();
        let u = poisson_solve(&mut sys).unwrap();
        // Shortley-Weller reproduces quadratics exactly
        assert!(max_err(&u, |x, y| x * x + y * y - 1.0) < 1e-8);
    }

    #[test]
    fn negative_rhs_rejected() {
        let g = Arc::new(PlanarGrid::unit_square(8).unwrap());
        let f = GridField::from_fn(g, |_, _| -1.0).unwrap();
        assert!(matches!(PoissonSystem::new(f), Err(LabError::InvalidRhs(_))));
    }

    #[test]
    fn brezis_merle_range() {
        let g = Arc::new(PlanarGrid::unit_square(8).unwrap());
        let u = GridField::zeros(g.clone());
        let f = GridField::from_fn(g, |_, _| 1.0).unwrap();
        assert!(brezis_merle_check(&u, &f, 0.0).is_err());
        assert!(brezis_merle_check(&u, &f, 4.0 * PI).is_err());
        let r = brezis_merle_check(&u, &f, 1.0).unwrap();
        assert!((r.lhs - 1.0).abs() < 1e-12 && r.holds);
    }
}
