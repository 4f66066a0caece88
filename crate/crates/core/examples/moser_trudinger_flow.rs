//! The Moser-Trudinger flow drives the seminorm to 1; prints the trace as CSV.

use std::sync::Arc;

use cma_lab::domain::radial::{RadialBall, RadialProfile};
use cma_lab::flow::{FlowKind, LambdaRule, StepControl};
use cma_lab::functionals::{psh_seminorm, MtParams};
use cma_lab::radial_solver::{radial_flow_start, radial_flow_step};

fn main() -> cma_lab::Result<()> {
    let kind =
        FlowKind::MoserTrudinger { params: MtParams { m: 6, alpha: 1.0, delta: 0.1 }, rule: LambdaRule::Normalized };
    let u = RadialProfile::from_fn(Arc::new(RadialBall::uniform(1, 1.0, 400)?), |r| 0.5 * (r - 1.0))?;
    let mut s = radial_flow_start(u, 1e-2, &kind)?;
    for _ in 0..200 {
        s = radial_flow_step(&s, &kind, &StepControl::default())?;
    }
    s.history.write_csv(std::io::stdout())?;
    eprintln!("terminal seminorm {:.12}", psh_seminorm(&s.profile)?);
    Ok(())
}
