//! Masked uniform grids in the plane, the `n = 1` setting.
//!
//! Rectangles are resolved exactly by the grid. Discs cut grid lines
//! between nodes; the Laplacian there uses the Shortley-Weller
//! unequal-arm stencil with the Dirichlet value 0 at the cut point.

use std::collections::VecDeque;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Role of a grid node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeKind {
    Interior,
    Boundary,
    Exterior,
}

/// Geometry the grid was built for.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PlanarShape {
    Rectangle { x0: f64, x1: f64, y0: f64, y1: f64 },
    Disc { cx: f64, cy: f64, r: f64 },
    Custom,
}

/// Neighbour directions in stencil order.
pub const DIRECTIONS: [(isize, isize); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

/// A uniform grid with node mask and fractional arms to a curved boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarGrid {
    shape: PlanarShape,
    origin: (f64, f64),
    h: f64,
    nx: usize,
    ny: usize,
    mask: Vec<NodeKind>,
    /// Fractional arm lengths (E, W, N, S) in units of `h`; `0` means no
    /// cut point recorded in that direction.
    arms: Vec<[f64; 4]>,
    weights: Vec<f64>,
}

/// One row of the discrete Laplacian at an interior node.
#[derive(Debug, Clone, PartialEq)]
pub struct StencilRow {
    pub node: usize,
    pub center: f64,
    /// `(neighbour node, coefficient)`; cut points carry no entry.
    pub neighbours: Vec<(usize, f64)>,
}

impl PlanarGrid {
    /// Rectangle `[x0, x1] × [y0, y1]` with `cells_x` cells along x. The
    /// y-extent must be an integer number of cells of the same width.
    pub fn rectangle(x0: f64, x1: f64, y0: f64, y1: f64, cells_x: usize) -> Result<Self> {
        if !(x1 > x0 && y1 > y0) || cells_x < 2 {
            return Err(LabError::InvalidDomain("degenerate rectangle".into()));
        }
        let h = (x1 - x0) / cells_x as f64;
        let cy = (y1 - y0) / h;
        let cells_y = cy.round() as usize;
        if (cy - cells_y as f64).abs() > 1e-9 || cells_y < 2 {
            return Err(LabError::InvalidDomain("rectangle sides must be commensurate with h".into()));
        }
        let (nx, ny) = (cells_x + 1, cells_y + 1);
        let mut mask = vec![NodeKind::Interior; nx * ny];
        let mut weights = vec![h * h; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                let edge_x = i == 0 || i == nx - 1;
                let edge_y = j == 0 || j == ny - 1;
                let k = j * nx + i;
                if edge_x || edge_y {
                    mask[k] = NodeKind::Boundary;
                }
                if edge_x {
                    weights[k] *= 0.5;
                }
                if edge_y {
                    weights[k] *= 0.5;
                }
            }
        }
        let mut arms = vec![[0.0; 4]; nx * ny];
        for (k, kind) in mask.iter().enumerate() {
            if *kind == NodeKind::Interior {
                arms[k] = [1.0; 4];
            }
        }
        let grid =
            Self { shape: PlanarShape::Rectangle { x0, x1, y0, y1 }, origin: (x0, y0), h, nx, ny, mask, arms, weights };
        grid.validate()?;
        Ok(grid)
    }

    /// `[0, 1]²` with `cells` cells per side.
    pub fn unit_square(cells: usize) -> Result<Self> {
        Self::rectangle(0.0, 1.0, 0.0, 1.0, cells)
    }

    /// Disc of radius `r` centred at `(cx, cy)`, `cells` cells across the
    /// diameter.
    pub fn disc(cx: f64, cy: f64, r: f64, cells: usize) -> Result<Self> {
        if !(r > 0.0) || cells < 4 {
            return Err(LabError::InvalidDomain("degenerate disc".into()));
        }
        let h = 2.0 * r / cells as f64;
        let (nx, ny) = (cells + 1, cells + 1);
        let origin = (cx - r, cy - r);
        let coord = |i: usize, j: usize| (origin.0 + i as f64 * h, origin.1 + j as f64 * h);
        let on_circle_tol = 1e-8 * h;
        let mut mask = vec![NodeKind::Exterior; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                let (x, y) = coord(i, j);
                let d = ((x - cx).powi(2) + (y - cy).powi(2)).sqrt();
                mask[j * nx + i] = if (d - r).abs() <= on_circle_tol {
                    NodeKind::Boundary
                } else if d < r {
                    NodeKind::Interior
                } else {
                    NodeKind::Exterior
                };
            }
        }
        let mut arms = vec![[0.0; 4]; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                let k = j * nx + i;
                if mask[k] != NodeKind::Interior {
                    continue;
                }
                let (x, y) = coord(i, j);
                for (d, (di, dj)) in DIRECTIONS.iter().enumerate() {
                    let ni = i as isize + di;
                    let nj = j as isize + dj;
                    let nk = nj as usize * nx + ni as usize;
                    arms[k][d] = if mask[nk] != NodeKind::Exterior {
                        1.0
                    } else if *di != 0 {
                        let half = (r * r - (y - cy).powi(2)).max(0.0).sqrt();
                        let xb = cx + *di as f64 * half;
                        ((xb - x).abs() / h).clamp(f64::MIN_POSITIVE, 1.0)
                    } else {
                        let half = (r * r - (x - cx).powi(2)).max(0.0).sqrt();
                        let yb = cy + *dj as f64 * half;
                        ((yb - y).abs() / h).clamp(f64::MIN_POSITIVE, 1.0)
                    };
                }
            }
        }
        let mut weights = vec![0.0; nx * ny];
        const SUB: usize = 16;
        for j in 0..ny {
            for i in 0..nx {
                // exterior nodes keep the overlap of their cell; potentials
                // vanish there, matching the boundary trace
                let k = j * nx + i;
                let (x, y) = coord(i, j);
                let d = ((x - cx).powi(2) + (y - cy).powi(2)).sqrt();
                if d > r + h {
                    continue;
                }
                if d + h < r {
                    weights[k] = h * h;
                    continue;
                }
                let mut inside = 0usize;
                for a in 0..SUB {
                    for b in 0..SUB {
                        let px = x + h * ((a as f64 + 0.5) / SUB as f64 - 0.5);
                        let py = y + h * ((b as f64 + 0.5) / SUB as f64 - 0.5);
                        if (px - cx).powi(2) + (py - cy).powi(2) < r * r {
                            inside += 1;
                        }
                    }
                }
                weights[k] = h * h * inside as f64 / (SUB * SUB) as f64;
            }
        }
        let grid = Self { shape: PlanarShape::Disc { cx, cy, r }, origin, h, nx, ny, mask, arms, weights };
        grid.validate()?;
        Ok(grid)
    }

    /// Grid from an explicit mask. Interior nodes receive full arms towards
    /// interior or boundary neighbours; arms towards exterior neighbours
    /// must be supplied through `cut_arms` (`(node, direction, fraction)`),
    /// otherwise the Laplacian reports an inconsistent mask.
    pub fn from_mask(
        origin: (f64, f64),
        h: f64,
        nx: usize,
        ny: usize,
        mask: Vec<NodeKind>,
        cut_arms: &[(usize, usize, f64)],
    ) -> Result<Self> {
        if mask.len() != nx * ny {
            return Err(LabError::ShapeMismatch { expected: nx * ny, got: mask.len() });
        }
        if !(h > 0.0) {
            return Err(LabError::InvalidDomain("spacing must be positive".into()));
        }
        let mut arms = vec![[0.0; 4]; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                let k = j * nx + i;
                if mask[k] != NodeKind::Interior {
                    continue;
                }
                for (d, (di, dj)) in DIRECTIONS.iter().enumerate() {
                    let ni = i as isize + di;
                    let nj = j as isize + dj;
                    if ni < 0 || nj < 0 || ni >= nx as isize || nj >= ny as isize {
                        continue;
                    }
                    if mask[nj as usize * nx + ni as usize] != NodeKind::Exterior {
                        arms[k][d] = 1.0;
                    }
                }
            }
        }
        for &(k, d, frac) in cut_arms {
            if !(frac > 0.0 && frac <= 1.0) || k >= arms.len() || d >= 4 {
                return Err(LabError::InvalidDomain(format!("bad cut arm ({k}, {d}, {frac})")));
            }
            arms[k][d] = frac;
        }
        let weights = mask.iter().map(|m| if *m == NodeKind::Interior { h * h } else { 0.0 }).collect();
        let grid = Self { shape: PlanarShape::Custom, origin, h, nx, ny, mask, arms, weights };
        grid.validate()?;
        Ok(grid)
    }

    fn validate(&self) -> Result<()> {
        let interior: Vec<usize> = (0..self.mask.len()).filter(|&k| self.mask[k] == NodeKind::Interior).collect();
        if interior.is_empty() {
            return Err(LabError::InvalidDomain("grid has no interior nodes".into()));
        }
        for &k in &interior {
            let (i, j) = self.ij(k);
            if i == 0 || j == 0 || i + 1 == self.nx || j + 1 == self.ny {
                return Err(LabError::InvalidDomain(format!("interior node ({i}, {j}) on the grid edge")));
            }
        }
        // connectivity of the interior set
        let mut seen = vec![false; self.mask.len()];
        let mut queue = VecDeque::from([interior[0]]);
        seen[interior[0]] = true;
        let mut count = 0;
        while let Some(k) = queue.pop_front() {
            count += 1;
            for nb in self.neighbour_nodes(k).into_iter().flatten() {
                if self.mask[nb] == NodeKind::Interior && !seen[nb] {
                    seen[nb] = true;
                    queue.push_back(nb);
                }
            }
        }
        if count != interior.len() {
            return Err(LabError::InvalidDomain("interior nodes are not connected".into()));
        }
        Ok(())
    }

    fn neighbour_nodes(&self, k: usize) -> [Option<usize>; 4] {
        let (i, j) = self.ij(k);
        let mut out = [None; 4];
        for (d, (di, dj)) in DIRECTIONS.iter().enumerate() {
            let ni = i as isize + di;
            let nj = j as isize + dj;
            if ni >= 0 && nj >= 0 && (ni as usize) < self.nx && (nj as usize) < self.ny {
                out[d] = Some(nj as usize * self.nx + ni as usize);
            }
        }
        out
    }

    pub fn shape(&self) -> PlanarShape {
        self.shape
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn len(&self) -> usize {
        self.mask.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mask.is_empty()
    }

    pub fn mask(&self) -> &[NodeKind] {
        &self.mask
    }

    pub fn kind(&self, k: usize) -> NodeKind {
        self.mask[k]
    }

    pub fn arms(&self, k: usize) -> [f64; 4] {
        self.arms[k]
    }

    /// Quadrature weights: `h²` times the fraction of the node's cell
    /// inside the domain.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn ij(&self, k: usize) -> (usize, usize) {
        (k % self.nx, k / self.nx)
    }

    pub fn coords(&self, k: usize) -> (f64, f64) {
        let (i, j) = self.ij(k);
        (self.origin.0 + i as f64 * self.h, self.origin.1 + j as f64 * self.h)
    }

    pub fn interior_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.mask.len()).filter(move |&k| self.mask[k] == NodeKind::Interior)
    }

    pub fn bounds(&self) -> (f64, f64, f64, f64) {
        let (x0, y0) = self.origin;
        (x0, x0 + (self.nx - 1) as f64 * self.h, y0, y0 + (self.ny - 1) as f64 * self.h)
    }

    pub fn diameter(&self) -> f64 {
        match self.shape {
            PlanarShape::Rectangle { x0, x1, y0, y1 } => ((x1 - x0).powi(2) + (y1 - y0).powi(2)).sqrt(),
            PlanarShape::Disc { r, .. } => 2.0 * r,
            PlanarShape::Custom => {
                let pts: Vec<(f64, f64)> =
                    (0..self.len()).filter(|&k| self.mask[k] != NodeKind::Exterior).map(|k| self.coords(k)).collect();
                let mut d = 0.0f64;
                for a in &pts {
                    for b in &pts {
                        d = d.max(((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt());
                    }
                }
                d
            }
        }
    }

    /// Measure of the domain as seen by the quadrature.
    pub fn area(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// A checksum of the mask for file headers (FNV-1a over node kinds).
    pub fn mask_checksum(&self) -> u64 {
        let mut hash: u64 = 0xcbf29ce484222325;
        for m in &self.mask {
            let b = match m {
                NodeKind::Interior => 1u8,
                NodeKind::Boundary => 2,
                NodeKind::Exterior => 3,
            };
            hash ^= b as u64;
            hash = hash.wrapping_mul(0x100000001b3);
        }
        hash
    }

    /// Shortley-Weller rows at every interior node. Coefficients towards
    /// cut points are dropped (homogeneous Dirichlet data); those towards
    /// boundary nodes are kept.
    pub fn stencil(&self) -> Result<Vec<StencilRow>> {
        let h = self.h;
        let mut rows = Vec::new();
        for k in self.interior_nodes() {
            let nbs = self.neighbour_nodes(k);
            let arms = self.arms[k];
            let (i, j) = self.ij(k);
            for d in 0..4 {
                let nb = nbs[d].expect("interior nodes are off the grid edge");
                if self.mask[nb] == NodeKind::Exterior && arms[d] <= 0.0 {
                    return Err(LabError::InconsistentMask { i, j });
                }
            }
            let mut center = 0.0;
            let mut neighbours = Vec::with_capacity(4);
            for axis in 0..2 {
                let (a, b) = (2 * axis, 2 * axis + 1);
                let (ha, hb) = (arms[a] * h, arms[b] * h);
                let ca = 2.0 / (ha * (ha + hb));
                let cb = 2.0 / (hb * (ha + hb));
                center -= ca + cb;
                for (d, c) in [(a, ca), (b, cb)] {
                    let nb = nbs[d].unwrap();
                    if self.mask[nb] != NodeKind::Exterior {
                        neighbours.push((nb, c));
                    }
                }
            }
            rows.push(StencilRow { node: k, center, neighbours });
        }
        Ok(rows)
    }
}

/// A scalar field on a [`PlanarGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    grid: Arc<PlanarGrid>,
    values: Vec<f64>,
}

impl GridField {
    pub fn new(grid: Arc<PlanarGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(LabError::ShapeMismatch { expected: grid.len(), got: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(LabError::Parameter("grid field has non-finite values".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Arc<PlanarGrid>) -> Self {
        let m = grid.len();
        Self { grid, values: vec![0.0; m] }
    }

    /// Samples `f(x, y)` on interior and boundary nodes; exterior nodes
    /// hold 0.
    pub fn from_fn(grid: Arc<PlanarGrid>, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let values = (0..grid.len())
            .map(|k| {
                if grid.kind(k) == NodeKind::Exterior {
                    0.0
                } else {
                    let (x, y) = grid.coords(k);
                    f(x, y)
                }
            })
            .collect();
        Self::new(grid, values)
    }

    /// Like [`GridField::from_fn`] but forces zero on every non-interior
    /// node, as required of a potential.
    pub fn potential_from_fn(grid: Arc<PlanarGrid>, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let values = (0..grid.len())
            .map(|k| {
                if grid.kind(k) == NodeKind::Interior {
                    let (x, y) = grid.coords(k);
                    f(x, y)
                } else {
                    0.0
                }
            })
            .collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Arc<PlanarGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|v| f(*v)).collect() }
    }

    pub fn scaled(&self, t: f64) -> Self {
        self.map(|v| t * v)
    }

    /// Checks the potential invariants: zero off the interior, `≤ 0`.
    pub fn check_potential(&self) -> Result<()> {
        for (k, v) in self.values.iter().enumerate() {
            if self.grid.kind(k) != NodeKind::Interior && *v != 0.0 {
                let (i, j) = self.grid.ij(k);
                return Err(LabError::Inadmissible(format!("potential nonzero at boundary node ({i}, {j})")));
            }
            if *v > 0.0 {
                return Err(LabError::Inadmissible("potential must be non-positive".into()));
            }
        }
        Ok(())
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// `∫ u dx` with the grid's cell-fraction weights.
pub fn grid_integrate(u: &GridField) -> f64 {
    u.grid.weights.iter().zip(&u.values).map(|(w, v)| w * v).sum()
}

/// Discrete Laplacian at interior nodes (zero elsewhere): five-point
/// stencil, Shortley-Weller arms next to curved boundaries.
pub fn grid_laplacian(u: &GridField) -> Result<GridField> {
    let rows = u.grid.stencil()?;
    Ok(apply_stencil(&rows, u))
}

pub(crate) fn apply_stencil(rows: &[StencilRow], u: &GridField) -> GridField {
    let mut out = vec![0.0; u.values.len()];
    for row in rows {
        let mut acc = row.center * u.values[row.node];
        for (nb, c) in &row.neighbours {
            acc += c * u.values[*nb];
        }
        out[row.node] = acc;
    }
    GridField { grid: u.grid.clone(), values: out }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_and_linear_on_square() {
        let g = Arc::new(PlanarGrid::unit_square(16).unwrap());
        let one = GridField::from_fn(g.clone(), |_, _| 1.0).unwrap();
        assert!((grid_integrate(&one) - 1.0).abs() < 1e-14);
        let x = GridField::from_fn(g.clone(), |x, _| x).unwrap();
        assert!((grid_integrate(&x) - 0.5).abs() < 1e-14);
        assert_eq!(grid_integrate(&GridField::zeros(g)), 0.0);
    }

    #[test]
    fn quadratic_laplacian_exact() {
        let g = Arc::new(PlanarGrid::rectangle(-1.0, 2.0, 0.0, 1.5, 12).unwrap());
        let u = GridField::from_fn(g.clone(), |x, y| x * x + y * y).unwrap();
        let lap = grid_laplacian(&u).unwrap();
        for k in g.interior_nodes() {
            assert!((lap.values()[k] - 4.0).abs() < 1e-10);
        }
    }

    #[test]
    fn shortley_weller_exact_on_quadratics_in_disc() {
        // u = |z|² - 1 vanishes on the unit circle, so cut points carry 0
        let g = Arc::new(PlanarGrid::disc(0.0, 0.0, 1.0, 23).unwrap());
        let u = GridField::potential_from_fn(g.clone(), |x, y| x * x + y * y - 1.0).unwrap();
        let lap = grid_laplacian(&u).unwrap();
        for k in g.interior_nodes() {
            assert!((lap.values()[k] - 4.0).abs() < 1e-8, "{}", lap.values()[k]);
        }
    }

    #[test]
    fn disc_area_converges() {
        let g = PlanarGrid::disc(0.0, 0.0, 1.0, 128).unwrap();
        assert!((g.area() - PI).abs() < 1e-3, "{}", g.area());
    }

    #[test]
    fn missing_offset_is_inconsistent() {
        use NodeKind::*;
        // 4x3 grid, interior node (1,1) has an exterior neighbour east with no arm
        let mask = vec![
            Boundary, Boundary, Boundary, Boundary, //
            Boundary, Interior, Exterior, Boundary, //
            Boundary, Boundary, Boundary, Boundary,
        ];
        let g = Arc::new(PlanarGrid::from_mask((0.0, 0.0), 0.1, 4, 3, mask.clone(), &[]).unwrap());
        let u = GridField::zeros(g);
        assert!(matches!(grid_laplacian(&u), Err(LabError::InconsistentMask { i: 1, j: 1 })));
        let g = Arc::new(PlanarGrid::from_mask((0.0, 0.0), 0.1, 4, 3, mask, &[(5, 0, 0.5)]).unwrap());
        assert!(grid_laplacian(&GridField::zeros(g)).is_ok());
    }

    #[test]
    fn disconnected_interior_rejected() {
        use NodeKind::*;
        let mask = vec![
            Boundary, Boundary, Boundary, Boundary, Boundary, //
            Boundary, Interior, Boundary, Interior, Boundary, //
            Boundary, Boundary, Boundary, Boundary, Boundary,
        ];
        assert!(PlanarGrid::from_mask((0.0, 0.0), 0.1, 5, 3, mask, &[]).is_err());
    }
}
