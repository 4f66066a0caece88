//! Blow-up rate of the integral just below the critical exponent.

use cma_lab::lab::{bm_profile, BmMode};

fn main() -> cma_lab::Result<()> {
    for n in 1..=3 {
        let mode = BmMode::Quasi { delta_max: 1.6, levels: 4, depth: 300.0, growths: vec![1.04, 1.02] };
        let rec = bm_profile(n, &mode)?;
        println!("n = {n}: fitted slopes {:?}", rec.values);
    }
    Ok(())
}
