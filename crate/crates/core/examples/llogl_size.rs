//! L log L size of the stationary densities of the Moser-Trudinger flow
//! along the truncation order m.

use std::sync::Arc;

use cma_lab::domain::radial::{RadialBall, RadialProfile};
use cma_lab::lab::g_llogl_check;

fn main() -> cma_lab::Result<()> {
    let u = RadialProfile::from_fn(Arc::new(RadialBall::uniform(2, 1.0, 200)?), |r| 0.5 * (r - 1.0))?;
    let rep = g_llogl_check(&u, &[2, 6, 10], 1.0, 0.1, &[0.1, 0.05, 0.025], 400)?;
    for (m, a) in rep.ms.iter().zip(&rep.a_values) {
        println!("m = {m:2}: A = {a:.8}");
    }
    println!("delta sweep {:?}", rep.delta_sweep);
    Ok(())
}
