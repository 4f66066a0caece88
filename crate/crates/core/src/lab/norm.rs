//! Concentration of the Moser-Trudinger functional at unit seminorm and
//! the `L log L` size of the stationary densities.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::families::PowerMixture;
use super::EstimateRecord;
use crate::domain::radial::{kappa, RadialBall, RadialProfile};
use crate::error::{LabError, Result};
use crate::flow::{evaluate, FlowKind, LambdaRule, StepControl};
use crate::functionals::{lorentz_zygmund_norm, mt_functional, norm_gain, psh_seminorm, Measure, MtParams};
use crate::radial_solver::{radial_flow_start, radial_flow_step};

/// Seminorms at which the gain inequality is tested.
pub const GAIN_TS: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];

/// Outcome of [`norm_concentration_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormCheck {
    pub record: EstimateRecord,
    /// Largest `𝓕(tw)/(g(t)𝓕(w))` over profiles `‖w‖ = 1` and [`GAIN_TS`].
    pub max_gain_ratio: f64,
    /// `(ε, [Θ_*, Θ*])` at the finest resolution.
    pub brackets: Vec<(f64, [f64; 2])>,
}

fn unit_profiles(ball: &Arc<RadialBall>) -> Result<Vec<RadialProfile>> {
    let mixtures = [
        (vec![0.5], vec![1.0]),
        (vec![1.0], vec![1.0]),
        (vec![1.5], vec![1.0]),
        (vec![2.0], vec![1.0]),
        (vec![3.0], vec![1.0]),
        (vec![0.25, 2.0], vec![0.5, 0.5]),
        (vec![0.5, 4.0], vec![0.3, 0.7]),
        (vec![1.0, 3.0], vec![0.8, 0.2]),
        (vec![0.75, 1.25], vec![0.5, 0.5]),
        (vec![0.3, 1.0, 5.0], vec![0.2, 0.3, 0.5]),
    ];
    mixtures
        .into_iter()
        .map(|(a, w)| {
            let u = PowerMixture::new(a, w)?.profile(ball.clone())?;
            let s = psh_seminorm(&u)?;
            Ok(u.scaled(1.0 / s))
        })
        .collect()
}

/// Checks `𝓕(tw) ≤ t e^{1-t} 𝓕(w)` for unit-seminorm profiles and brackets
/// the seminorms of near-maximizers: `Θ_*(ε), Θ*(ε)` are the extreme `t`
/// with `sup_{‖u‖=t} 𝓕 ≥ (1-ε) sup 𝓕` on a grid of `t` in `[0.1, 4]`.
pub fn norm_concentration_check(n: usize, m: usize, alpha: f64, delta: f64, eps_list: &[f64]) -> Result<NormCheck> {
    let params = MtParams { m, alpha, delta };
    params.validate(n)?;
    if eps_list.is_empty() || eps_list.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
        return Err(LabError::Parameter("epsilons must lie in (0, 1)".into()));
    }
    let mut eps: Vec<f64> = eps_list.to_vec();
    eps.sort_by(|a, b| b.total_cmp(a));
    let ts: Vec<f64> = (0..=390).map(|k| 0.1 + 0.01 * k as f64).collect();
    let mut resolutions = Vec::new();
    let mut widths = Vec::new();
    let mut max_gain_ratio = f64::NEG_INFINITY;
    let mut brackets = Vec::new();
    let mut nested = true;
    for nodes in [200, 400] {
        let ball = Arc::new(RadialBall::uniform(n, 1.0, nodes)?);
        let profiles = unit_profiles(&ball)?;
        let base: Vec<f64> = profiles.iter().map(|w| mt_functional(w, &params)).collect::<Result<_>>()?;
        for (w, b) in profiles.iter().zip(&base) {
            for &t in &GAIN_TS {
                let r = mt_functional(&w.scaled(t), &params)? / (norm_gain(t) * b);
                max_gain_ratio = max_gain_ratio.max(r);
            }
        }
        let sup: Vec<f64> = ts
            .par_iter()
            .map(|&t| {
                profiles.iter().map(|w| mt_functional(&w.scaled(t), &params)).try_fold(0.0f64, |a, x| Ok(a.max(x?)))
            })
            .collect::<Result<_>>()?;
        let top = sup.iter().copied().fold(0.0, f64::max);
        brackets.clear();
        let mut last = f64::INFINITY;
        for &e in &eps {
            let near: Vec<f64> = ts.iter().zip(&sup).filter(|(_, s)| **s >= (1.0 - e) * top).map(|(t, _)| *t).collect();
            let b = [near[0], near[near.len() - 1]];
            nested &= b[1] - b[0] <= last;
            last = b[1] - b[0];
            brackets.push((e, b));
        }
        resolutions.push(nodes);
        widths.push(last);
    }
    let mut record = EstimateRecord::new("norm-concentration", "power-mixture")
        .param("n", n as f64)
        .param("m", m as f64)
        .param("alpha", alpha)
        .param("delta", delta)
        .with_values(resolutions, widths, 2.0);
    let contains_one = brackets.iter().all(|(_, b)| b[0] <= 1.0 && 1.0 <= b[1]);
    record.verdict = max_gain_ratio <= 1.0 + 1e-12 && nested && contains_one;
    record.bracket = brackets.last().map(|(_, b)| *b);
    Ok(NormCheck { record, max_gain_ratio, brackets })
}

/// `A = ∫ g (log(1+g))^{n/(n+1)}` of the stationary density
/// `g = κ_n λ f_m^δ(-u/η(‖u‖))` of the Moser-Trudinger flow at `u`.
pub fn llogl_value(u: &RadialProfile, params: &MtParams, rule: LambdaRule) -> Result<f64> {
    let kind = FlowKind::MoserTrudinger { params: *params, rule };
    let eval = evaluate(u, &kind)?;
    let k = kappa(u.n());
    let g: Vec<f64> = eval.target.iter().map(|x| k * x).collect();
    let q = u.n() as f64 / (u.n() as f64 + 1.0);
    lorentz_zygmund_norm(&g, &u.ball().quadrature_weights(), q)
}

/// Largest `max A / A(m = n)` accepted as bounded along the `m` sweep.
pub const LLOGL_BOUND: f64 = 10.0;

/// `A` along the `m` sweep and its continuity in `δ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlogLReport {
    pub ms: Vec<usize>,
    pub a_values: Vec<f64>,
    pub residuals: Vec<f64>,
    pub baseline: f64,
    pub max_ratio: f64,
    /// `(δ, A)` at `m = n`, with `δ` decreasing.
    pub delta_sweep: Vec<(f64, f64)>,
    pub bounded: bool,
}

/// Runs the Moser-Trudinger flow from `start` for each `m` (and for each
/// `δ` of `deltas` at `m = n`) and evaluates `A` at the final states.
pub fn g_llogl_check(
    start: &RadialProfile,
    ms: &[usize],
    alpha: f64,
    delta: f64,
    deltas: &[f64],
    steps: usize,
) -> Result<LlogLReport> {
    let n = start.n();
    if ms.first() != Some(&n) {
        return Err(LabError::Parameter("the m sweep must start at m = n".into()));
    }
    let flow = |m: usize, d: f64| -> Result<(f64, f64)> {
        let params = MtParams { m, alpha, delta: d };
        let rule = LambdaRule::Normalized;
        let kind = FlowKind::MoserTrudinger { params, rule };
        let control = StepControl::default();
        let mut state = radial_flow_start(start.clone(), 1e-2, &kind)?;
        for _ in 0..steps {
            state = match radial_flow_step(&state, &kind, &control) {
                Ok(s) => s,
                Err(LabError::Stagnation { .. }) => break,
                Err(e) => return Err(e),
            };
            if state.history.last().is_some_and(|r| r.residual < 1e-10) {
                break;
            }
        }
        let res = state.history.last().map_or(f64::NAN, |r| r.residual);
        Ok((llogl_value(&state.profile, &params, rule)?, res))
    };
    let runs: Vec<(f64, f64)> = ms.par_iter().map(|&m| flow(m, delta)).collect::<Result<_>>()?;
    let a_values: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let residuals = runs.iter().map(|r| r.1).collect();
    let baseline = a_values[0];
    let max_ratio = a_values.iter().map(|a| a / baseline).fold(f64::NEG_INFINITY, f64::max);
    let delta_sweep = deltas.par_iter().map(|&d| Ok((d, flow(n, d)?.0))).collect::<Result<Vec<_>>>()?;
    let bounded = baseline.is_finite() && baseline > 0.0 && max_ratio <= LLOGL_BOUND;
    Ok(LlogLReport { ms: ms.to_vec(), a_values, residuals, baseline, max_ratio, delta_sweep, bounded })
}
