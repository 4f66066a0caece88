//! Slice potentials of a radial profile on the unit ball of C^2: the
//! Laplacian mass of the slices against twice the Monge-Ampere mass.

use std::sync::Arc;

use cma_lab::domain::radial::{RadialBall, RadialProfile};
use cma_lab::slice::{dimension_reduction_bound, slice_mass_check, slice_potential};

fn main() -> cma_lab::Result<()> {
    let ball = Arc::new(RadialBall::uniform(2, 1.0, 513)?);
    for (name, a) in [("quadratic", 1.0), ("flat", 0.5), ("steep", 3.0)] {
        let u = RadialProfile::from_fn(ball.clone(), |r: f64| -(1.0 - r.powf(a)))?;
        let c = slice_mass_check(&u)?;
        let b = dimension_reduction_bound(&u, 2.0)?;
        println!(
            "{name:9}: int|Lap v| = {:.8}, 2M = {:.8}, max G = {:.2e}, reduction ratio = {:.4}",
            c.laplacian_mass,
            c.twice_mass,
            c.max_boundary_term,
            b.ratio()
        );
    }
    let sp = slice_potential(&RadialProfile::from_fn(ball, |r| r - 1.0)?)?;
    println!("slice at (0.3, 0.4): {:.10}", sp.sample(0.3, 0.4));
    Ok(())
}
