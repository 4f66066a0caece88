//! Planar Brezis-Merle bounds for random bump sources and the critical
//! exponent at unit Monge-Ampere mass.

use std::f64::consts::PI;
use std::sync::Arc;

use cma_lab::domain::planar::{GridField, PlanarGrid};
use cma_lab::lab::{bm_profile, AlphaBudget, BmMode, BumpSource};
use cma_lab::planar_solver::{brezis_merle_check, poisson_solve, PoissonSystem};
use rand::SeedableRng;

fn main() -> cma_lab::Result<()> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let grid = Arc::new(PlanarGrid::unit_square(64)?);
    for k in 0..5 {
        let src = BumpSource::random(&mut rng, (0.0, 1.0, 0.0, 1.0));
        let mut sys = PoissonSystem::from_laplacian(grid.clone(), |x, y| src.value(x, y))?;
        let u = poisson_solve(&mut sys)?;
        let f = GridField::from_fn(grid.clone(), |x, y| src.value(x, y))?;
        let c = brezis_merle_check(&u, &f, PI)?;
        println!("source {k}: lhs = {:.6}, bound = {:.6}, holds = {}", c.lhs, c.bound, c.holds);
    }
    let target = 4.0 * PI;
    let mut budget = AlphaBudget::default_for(0.55 * target, 1.65 * target);
    budget.width = 0.005 * target;
    budget.bisection_depth = 16;
    let rec = bm_profile(1, &BmMode::Weak(budget))?;
    println!("critical exponent bracket at unit mass: {:?} (4pi = {target:.6})", rec.bracket.unwrap());
    Ok(())
}
