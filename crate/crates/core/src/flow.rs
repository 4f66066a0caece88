//! Shared machinery of the two descent flows: flow kinds, target
//! densities, the flow state with its trace and the backtracking driver.
//!
//! Both flows move the potential by `u_t = log det(u_{ij̄}) - log g(u)`
//! where `g` is the target density of the kind. The recorded functional
//! (`J_δ`, resp. `-𝓕_{m,δ,η}`) is non-increasing along accepted steps.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::domain::io::fmt;
use crate::error::{LabError, Result};
use crate::functionals::{
    eta, j_delta_from_pairing, ma_mass, mt_series, psh_seminorm, raw_pairing, EnergyCrossCheck, Measure, MtParams,
    Potential, SobolevParams,
};

/// Largest relative increase of the functional tolerated on a step.
pub const DESCENT_TOL: f64 = 1e-9;
/// Maximum number of step halvings before a step is abandoned.
pub const MAX_HALVINGS: usize = 40;
/// Floor on `v'` (radial) and `Δu/4` (planar) kept by the admissibility
/// projections; radial determinants are floored at its `n`-th power.
pub const SLOPE_FLOOR: f64 = 1e-10;

/// How the multiplier of the Moser-Trudinger flow is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum LambdaRule {
    /// `λ = (n+1)E_det(u)/∫(-u)f_m^δ`, which makes the stationary equation
    /// hold in the weak sense for every norm.
    Quotient,
    /// `λ/‖u‖`: the multiplier of the constrained critical point; the flow
    /// is then an exact ascent of `𝓕_{m,δ,η}` and rests only on `‖u‖ = 1`.
    #[default]
    Normalized,
}

/// Right-hand side of the flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FlowKind {
    SobolevPe(SobolevParams),
    MoserTrudinger { params: MtParams, rule: LambdaRule },
}

impl FlowKind {
    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            FlowKind::SobolevPe(s) => {
                s.validate()?;
                if !(s.delta > 0.0) {
                    return Err(LabError::Parameter("the Sobolev flow needs delta > 0".into()));
                }
                Ok(())
            }
            FlowKind::MoserTrudinger { params, .. } => params.validate(n),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FlowKind::SobolevPe(_) => "sobolev-pe",
            FlowKind::MoserTrudinger { .. } => "moser-trudinger",
        }
    }
}

/// Target density and functional value at one potential.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub det: Vec<f64>,
    pub target: Vec<f64>,
    pub functional: f64,
    /// Multiplier actually used (`λ`, or `λβ_δ` for the Sobolev flow).
    pub multiplier: f64,
}

/// Evaluates `det`, the target density and the descent functional.
pub fn evaluate<P: Potential + EnergyCrossCheck>(u: &P, kind: &FlowKind) -> Result<Evaluation> {
    let det = u.raw_det()?;
    let pairing = raw_pairing(u)?;
    match kind {
        FlowKind::SobolevPe(s) => {
            let j = j_delta_from_pairing(u, s, pairing);
            let mult = s.lambda * j.beta;
            let target = u.values().iter().map(|x| mult * s.f_delta(*x)).collect();
            Ok(Evaluation { det, target, functional: j.value, multiplier: mult })
        }
        FlowKind::MoserTrudinger { params, rule } => {
            let n = u.dim();
            let norm = psh_seminorm(u)?;
            if !(norm > 0.0) {
                return Err(LabError::Degenerate("the Moser-Trudinger flow needs a nonzero potential".into()));
            }
            let e = eta(norm);
            let vol = u.domain().nodal_volumes();
            let mut big = 0.0;
            let mut den = 0.0;
            let mut small = Vec::with_capacity(vol.len());
            for (x, w) in u.values().iter().zip(&vol) {
                let s = mt_series((-x / e).max(0.0), params.m, n, params.alpha, params.delta)?;
                big += w * s.big_f;
                den += -x * w * s.small_f;
                small.push(s.small_f);
            }
            if !(den > 0.0) {
                return Err(LabError::Degenerate("vanishing denominator in lambda".into()));
            }
            let lambda = match rule {
                LambdaRule::Quotient => pairing / den,
                LambdaRule::Normalized => pairing / den / norm,
            };
            let target = small.iter().map(|f| lambda * f).collect();
            Ok(Evaluation { det, target, functional: -big, multiplier: lambda })
        }
    }
}

/// `log det - log g` at the free nodes, zero elsewhere.
pub fn velocity(eval: &Evaluation, free: &[bool]) -> Vec<f64> {
    eval.det
        .iter()
        .zip(&eval.target)
        .zip(free)
        .map(|((d, g), f)| if *f { d.max(f64::MIN_POSITIVE).ln() - g.max(f64::MIN_POSITIVE).ln() } else { 0.0 })
        .collect()
}

/// `(Σ Vᵢ (detᵢ - gᵢ)²)^{1/2}` over the free nodes.
pub fn residual_norm(eval: &Evaluation, volumes: &[f64], free: &[bool]) -> f64 {
    eval.det
        .iter()
        .zip(&eval.target)
        .zip(volumes)
        .zip(free)
        .filter(|(_, f)| **f)
        .map(|(((d, g), w), _)| w * (d - g).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// One row of a flow trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub step: usize,
    pub t: f64,
    pub dt: f64,
    pub functional: f64,
    pub residual: f64,
    pub seminorm: f64,
    pub mass: f64,
}

/// History of a flow run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FlowTrace {
    pub rows: Vec<TraceRow>,
}

impl FlowTrace {
    pub const COLUMNS: [&'static str; 7] = ["step", "t", "dt", "functional", "residual", "seminorm", "mass"];

    pub fn last(&self) -> Option<&TraceRow> {
        self.rows.last()
    }

    /// Largest relative increase of the functional between rows.
    pub fn worst_increase(&self) -> f64 {
        self.rows
            .windows(2)
            .map(|w| (w[1].functional - w[0].functional) / w[0].functional.abs().max(1.0))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(Self::COLUMNS)?;
        for r in &self.rows {
            w.write_record([
                r.step.to_string(),
                fmt(r.t),
                fmt(r.dt),
                fmt(r.functional),
                fmt(r.residual),
                fmt(r.seminorm),
                fmt(r.mass),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Step-size controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepControl {
    pub dt_max: f64,
    /// Factor applied to `dt` after an accepted step.
    pub growth: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        Self { dt_max: 1e3, growth: 1.5 }
    }
}

/// Potential, time, step and history of a flow.
#[derive(Debug, Clone)]
pub struct FlowState<P> {
    pub profile: P,
    pub t: f64,
    pub dt: f64,
    pub history: FlowTrace,
}

impl<P: Potential + EnergyCrossCheck> FlowState<P> {
    /// Starts a flow; the initial row of the trace is recorded.
    pub fn new(profile: P, dt: f64, kind: &FlowKind, free: &[bool]) -> Result<Self> {
        profile.check_admissible()?;
        kind.validate(profile.dim())?;
        if !(dt > 0.0) {
            return Err(LabError::Parameter(format!("dt must be positive, got {dt}")));
        }
        let mut s = Self { profile, t: 0.0, dt, history: FlowTrace::default() };
        let eval = evaluate(&s.profile, kind)?;
        s.record(0, &eval, free)?;
        Ok(s)
    }

    pub(crate) fn record(&mut self, step: usize, eval: &Evaluation, free: &[bool]) -> Result<()> {
        let vol = self.profile.domain().nodal_volumes();
        self.history.rows.push(TraceRow {
            step,
            t: self.t,
            dt: self.dt,
            functional: eval.functional,
            residual: residual_norm(eval, &vol, free),
            seminorm: psh_seminorm(&self.profile)?,
            mass: ma_mass(&self.profile)?,
        });
        Ok(())
    }
}

/// Generic backtracking step: `propose(u, velocity, dt)` returns the
/// projected candidate. Accepts the first candidate whose functional does
/// not rise by more than [`DESCENT_TOL`] (relative), halving `dt` up to
/// [`MAX_HALVINGS`] times.
pub(crate) fn backtracking_step<P, F>(
    state: &FlowState<P>,
    kind: &FlowKind,
    control: &StepControl,
    free: &[bool],
    mut propose: F,
) -> Result<FlowState<P>>
where
    P: Potential + EnergyCrossCheck,
    F: FnMut(&P, &Evaluation, &[f64], f64) -> Result<P>,
{
    let eval = evaluate(&state.profile, kind)?;
    let vel = velocity(&eval, free);
    let step = state.history.last().map_or(0, |r| r.step) + 1;
    if vel.iter().all(|x| *x == 0.0) {
        let mut next = state.clone();
        next.t += state.dt;
        next.record(step, &eval, free)?;
        return Ok(next);
    }
    let f0 = eval.functional;
    let mut dt = state.dt;
    for _ in 0..=MAX_HALVINGS {
        if let Ok(cand) = propose(&state.profile, &eval, &vel, dt) {
            if let Ok(e1) = evaluate(&cand, kind) {
                if e1.functional.is_finite() && e1.functional <= f0 + DESCENT_TOL * f0.abs().max(1.0) {
                    let mut next = FlowState {
                        profile: cand,
                        t: state.t + dt,
                        dt: (dt * control.growth).min(control.dt_max),
                        history: state.history.clone(),
                    };
                    next.record(step, &e1, free)?;
                    return Ok(next);
                }
            }
        }
        dt *= 0.5;
    }
    Err(LabError::Stagnation { t: state.t, halvings: MAX_HALVINGS })
}

/// Runs `steps` steps of `step_fn`, stopping early once the residual
/// falls below `tol`.
pub fn run<P, F>(mut state: FlowState<P>, steps: usize, tol: f64, mut step_fn: F) -> Result<FlowState<P>>
where
    F: FnMut(&FlowState<P>) -> Result<FlowState<P>>,
{
    for _ in 0..steps {
        state = step_fn(&state)?;
        if let Some(r) = state_residual(&state) {
            if r < tol {
                break;
            }
        }
    }
    Ok(state)
}

fn state_residual<P>(state: &FlowState<P>) -> Option<f64> {
    state.history.rows.last().map(|r| r.residual)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_csv_has_columns() {
        let mut t = FlowTrace::default();
        t.rows.push(TraceRow { step: 0, t: 0.0, dt: 0.1, functional: 1.0, residual: 0.5, seminorm: 1.0, mass: 2.0 });
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("step,t,dt,functional,residual,seminorm,mass\n"));
        assert_eq!(s.lines().count(), 2);
    }

    #[test]
    fn worst_increase_detects_rise() {
        let row = |f| TraceRow { step: 0, t: 0.0, dt: 0.0, functional: f, residual: 0.0, seminorm: 0.0, mass: 0.0 };
        let t = FlowTrace { rows: vec![row(2.0), row(1.0), row(1.5)] };
        assert!((t.worst_increase() - 0.5).abs() < 1e-15);
    }
}
