//! The Sobolev descent flow on a radial ball in C^2 and on the unit square
//! in C, printing the functional every 100 steps.

use std::sync::Arc;

use cma_lab::domain::planar::{GridField, PlanarGrid};
use cma_lab::domain::radial::{RadialBall, RadialProfile};
use cma_lab::flow::{FlowKind, StepControl};
use cma_lab::functionals::SobolevParams;
use cma_lab::planar_solver::{planar_flow_start, planar_flow_step};
use cma_lab::radial_solver::{radial_flow_start, radial_flow_step};

fn main() -> cma_lab::Result<()> {
    let kind = FlowKind::SobolevPe(SobolevParams { lambda: 0.1, p: 2.0, cap: 50.0, delta: 0.01 });
    let control = StepControl::default();

    let u = RadialProfile::from_fn(Arc::new(RadialBall::uniform(2, 1.0, 400)?), |r| r - 1.0)?;
    let mut s = radial_flow_start(u, 1e-2, &kind)?;
    for k in 1..=1000 {
        s = radial_flow_step(&s, &kind, &control)?;
        if k % 100 == 0 {
            let r = s.history.last().unwrap();
            println!("radial  step {k:4}: J = {:.10e}, residual = {:.2e}", r.functional, r.residual);
        }
    }
    println!("radial worst increase {:.2e}", s.history.worst_increase());

    let grid = Arc::new(PlanarGrid::unit_square(32)?);
    let u = GridField::potential_from_fn(grid, |x, y| -16.0 * x * (1.0 - x) * y * (1.0 - y))?;
    let mut s = planar_flow_start(u, 1e-2, &kind)?;
    for _ in 0..300 {
        s = planar_flow_step(&s, &kind, &control)?;
    }
    let r = s.history.last().unwrap();
    println!("planar  J = {:.10e}, residual = {:.2e}", r.functional, r.residual);
    Ok(())
}
