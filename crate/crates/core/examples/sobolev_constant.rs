//! Upper bounds for the Sobolev constant on balls of several radii.

use cma_lab::lab::{estimate_sobolev_t, Backend, SobolevBudget};

fn main() -> cma_lab::Result<()> {
    let budget = SobolevBudget::default();
    for n in 1..=2 {
        let p = n as f64 + 1.0;
        for r in [0.5, 1.0, 2.0] {
            let e = estimate_sobolev_t(n, p, r, Backend::Radial, &budget)?;
            println!(
                "n = {n}, p = {p}, R = {r}: T <= {:.8} (extrapolated {:.8})",
                e.record.estimate, e.record.extrapolated
            );
        }
    }
    let e = estimate_sobolev_t(1, 2.0, 1.0, Backend::Planar, &SobolevBudget { resolutions: vec![32], ..budget })?;
    println!("planar disc, 32 cells: T <= {:.6}", e.record.estimate);
    Ok(())
}
