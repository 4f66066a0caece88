//! The exact exponent schedule beta_{k+1} = 1 + (q/n) beta_k and the
//! growth of the Orlicz-class integrals around the limit exponent.

use cma_lab::lab::{beta_iteration_schedule, orlicz_delta_threshold, orlicz_growth, parse_rational};

fn main() -> cma_lab::Result<()> {
    let q = parse_rational("1")?;
    let s = beta_iteration_schedule(&q, 2, 8)?;
    for (k, b) in s.betas.iter().enumerate() {
        println!("beta_{k} = {b}");
    }
    println!("limit {:?}", s.limit.map(|l| l.to_string()));
    let dc = orlicz_delta_threshold(2, 1.0).unwrap();
    let depths: Vec<f64> = (1..=10).map(|k| 250.0 * k as f64).collect();
    for beta in [2.0, 2.4] {
        let (g, logs, _) = orlicz_growth(2, 1.0, beta, 0.9 * dc, &depths, 1.0, 0.25)?;
        println!("beta = {beta}: {g:?}, ln I at deepest member {:.4}", logs.last().unwrap());
    }
    Ok(())
}
