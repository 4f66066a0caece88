//! The gain inequality F(tw) <= t e^(1-t) F(w) and the seminorm brackets
//! of near-maximizers of the Moser-Trudinger functional.

use cma_lab::lab::norm_concentration_check;

fn main() -> cma_lab::Result<()> {
    let chk = norm_concentration_check(1, 3, 2.0, 0.1, &[0.2, 0.1, 0.05, 0.025])?;
    println!("max gain ratio {:.15}", chk.max_gain_ratio);
    for (eps, b) in &chk.brackets {
        println!("eps = {eps:<6}: [{:.2}, {:.2}]", b[0], b[1]);
    }
    Ok(())
}
