//! Brackets the Moser-Trudinger exponent on the log-cusp family.

use cma_lab::lab::{estimate_mt_alpha, log_cusp_alpha, AlphaBudget};

fn main() -> cma_lab::Result<()> {
    for n in 1..=2 {
        let target = log_cusp_alpha(n);
        let mut budget = AlphaBudget::default_for(0.6 * target, 1.7 * target);
        budget.width = 0.005 * target;
        budget.bisection_depth = 16;
        let rec = estimate_mt_alpha(n, &budget)?;
        println!("n = {n}: bracket {:?}, family value {target:.6}", rec.bracket.unwrap());
    }
    Ok(())
}
