//! Energy, mass, seminorm and L^p norms of a radial potential, with the
//! integration-by-parts cross-check.

use std::sync::Arc;

use cma_lab::domain::radial::{RadialBall, RadialProfile};
use cma_lab::functionals::{energy_by_parts, ma_energy, ma_mass, psh_seminorm, FunctionalReport};

fn main() -> cma_lab::Result<()> {
    let ball = Arc::new(RadialBall::uniform(2, 1.0, 400)?);
    let u = RadialProfile::from_fn(ball, |r| -(1.0 - r * r))?;
    println!("E(u)        = {:.12}", ma_energy(&u)?);
    println!("by parts    = {:.12}", energy_by_parts(&u));
    println!("M(u)        = {:.12}", ma_mass(&u)?);
    println!("||u||       = {:.12}", psh_seminorm(&u)?);
    println!("E(2u)/E(u)  = {:.12}", ma_energy(&u.scaled(2.0))? / ma_energy(&u)?);
    println!("{}", FunctionalReport::evaluate(&u, &[1.0, 2.0, 3.0])?.to_json()?);
    Ok(())
}
