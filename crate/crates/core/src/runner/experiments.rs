//! The experiment registry.

use std::f64::consts::PI;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::{Outcome, Table};
use crate::domain::planar::{GridField, PlanarGrid};
use crate::domain::radial::{kappa, RadialBall, RadialProfile};
use crate::error::{LabError, Result};
use crate::flow::{FlowKind, FlowState, LambdaRule, StepControl};
use crate::functionals::{energy_by_parts, ma_energy, psh_seminorm, raw_pairing, MtParams, SobolevParams};
use crate::lab::families::{BumpSource, PowerMixture};
use crate::lab::{
    beta_iteration_schedule, bm_profile, estimate_mt_alpha, estimate_sobolev_t, g_llogl_check, log_cusp_alpha,
    norm_concentration_check, orlicz_delta_threshold, orlicz_growth, AlphaBudget, Backend, BmMode, EstimateRecord,
    Growth, SobolevBudget,
};
use crate::planar_solver::{
    brezis_merle_check, planar_flow_start, planar_flow_step, planar_stationarity_residual, poisson_solve, PoissonSystem,
};
use crate::radial_solver::{
    radial_flow_start, radial_flow_step, radial_ma_apply, radial_ma_solve, stationarity_residual, RadialRhs,
};
use crate::slice::{slice_mass_check, slice_potential};

/// A registered experiment.
pub struct Experiment {
    pub name: &'static str,
    pub summary: &'static str,
    pub run: fn(&ExperimentConfig) -> Result<Outcome>,
}

pub const REGISTRY: &[Experiment] = &[
    Experiment {
        name: "radial-roundtrip",
        summary: "radial solve of f = 1 against |z|^2 - 1; solve/apply identities",
        run: radial_roundtrip,
    },
    Experiment {
        name: "energy-consistency",
        summary: "direct vs by-parts energy, homogeneity and dilation invariance on random profiles",
        run: energy_consistency,
    },
    Experiment {
        name: "descent-flow",
        summary: "Sobolev descent flow: monotone J_delta and stationarity",
        run: descent_flow,
    },
    Experiment { name: "mt-flow", summary: "Moser-Trudinger flow: terminal seminorm near 1", run: mt_flow },
    Experiment {
        name: "norm-concentration",
        summary: "gain inequality F(tw) <= t e^(1-t) F(w) and near-maximizer brackets",
        run: norm_concentration,
    },
    Experiment { name: "slice", summary: "slice Laplacian mass against 2M(u) and the boundary term sign", run: slice },
    Experiment { name: "mt-alpha", summary: "Moser-Trudinger exponent bracket on the log-cusp family", run: mt_alpha },
    Experiment { name: "weak-bm", summary: "critical exponent at unit Monge-Ampere mass", run: weak_bm },
    Experiment { name: "planar-bm", summary: "classical Brezis-Merle bound for random planar sources", run: planar_bm },
    Experiment { name: "quasi-bm", summary: "blow-up rate below the critical exponent", run: quasi_bm },
    Experiment { name: "bmq", summary: "exponent schedule and Orlicz-class exponential bounds", run: bmq },
    Experiment {
        name: "sobolev-t",
        summary: "Sobolev constant upper bounds, monotonicity and dilation law",
        run: sobolev_t,
    },
    Experiment { name: "llogl", summary: "L log L size of stationary Moser-Trudinger densities", run: llogl },
];

pub fn find(name: &str) -> Option<&'static Experiment> {
    REGISTRY.iter().find(|e| e.name == name)
}

fn rng(cfg: &ExperimentConfig, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(cfg.seed);
    r.set_stream(stream);
    r
}

fn uniform_ball(n: usize, radius: f64, nodes: usize) -> Result<Arc<RadialBall>> {
    Ok(Arc::new(RadialBall::uniform(n, radius, nodes)?))
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn fmt(x: f64) -> String {
    crate::domain::io::fmt(x)
}

fn radial_roundtrip(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut out = Outcome::default();
    let mut table = Table::new("roundtrip", &["n", "nodes", "max_error", "solve_apply", "apply_solve"]);
    let resolutions = cfg.resolutions_or(&[1024, 2048]);
    for n in cfg.dims_or(&[1, 2, 3]) {
        let mut errors = Vec::new();
        let mut identity = 0.0f64;
        let mut r = rng(cfg, n as u64);
        let mix = PowerMixture::random(&mut r);
        for &nodes in &resolutions {
            let ball = uniform_ball(n, 1.0, nodes)?;
            let u = radial_ma_solve(&RadialRhs::from_fn(ball.clone(), |_| 1.0)?)?;
            let exact: Vec<f64> = ball.rho().iter().map(|r| r - 1.0).collect();
            let err = max_abs_diff(u.values(), &exact);
            let w = mix.profile(ball.clone())?;
            let sa = max_abs_diff(radial_ma_solve(&radial_ma_apply(&w)?)?.values(), w.values())
                / w.depth().max(f64::MIN_POSITIVE);
            let f: Vec<f64> = ball.rho().iter().map(|r| 1.0 + r * r).collect();
            let back = radial_ma_apply(&radial_ma_solve(&RadialRhs::new(ball.clone(), f.clone())?)?)?;
            // the outer node carries the boundary closure
            let m = f.len() - 1;
            let as_ = max_abs_diff(&back.f[..m], &f[..m]) / 2.0;
            table.push(vec![n.to_string(), nodes.to_string(), fmt(err), fmt(sa), fmt(as_)]);
            identity = identity.max(sa).max(as_);
            errors.push(err);
        }
        let mut rec = EstimateRecord::new("radial-roundtrip", "constant-density")
            .param("n", n as f64)
            .param("identity_error", identity)
            .with_values(resolutions.clone(), errors, 2.0);
        rec.verdict = rec.values.iter().all(|e| *e <= 1e-10) && identity <= 1e-8;
        out.records.push(rec);
    }
    out.tables.push(table);
    Ok(out)
}

fn energy_consistency(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut out = Outcome::default();
    let count = cfg.usize_or("count", 50)?;
    let radius = cfg.f64_or("dilation", 2.0)?;
    let resolutions = cfg.resolutions_or(&[200, 400]);
    let mut table = Table::new("energy", &["n", "nodes", "profile", "direct", "by_parts", "rel_diff"]);
    for n in cfg.dims_or(&[1, 2]) {
        let mut r = rng(cfg, 100 + n as u64);
        let mixtures: Vec<PowerMixture> = (0..count).map(|_| PowerMixture::random(&mut r)).collect();
        let (mut worst, mut homog, mut dil) = (Vec::new(), 0.0f64, 0.0f64);
        for &nodes in &resolutions {
            let ball = uniform_ball(n, 1.0, nodes)?;
            let big = Arc::new(ball.dilated(radius)?);
            let mut w = 0.0f64;
            for (k, mix) in mixtures.iter().enumerate() {
                let u = mix.profile(ball.clone())?;
                let direct = kappa(n) * raw_pairing(&u)? / (n as f64 + 1.0);
                let parts = energy_by_parts(&u);
                let rel = (direct - parts).abs() / direct;
                w = w.max(rel);
                let e = ma_energy(&u)?;
                let e2 = ma_energy(&u.scaled(2.0))?;
                homog = homog.max((e2 / (2f64.powi(n as i32 + 1) * e) - 1.0).abs());
                let ud = RadialProfile::raw(big.clone(), u.values().to_vec())?;
                dil = dil.max((ma_energy(&ud)? / e - 1.0).abs());
                table.push(vec![n.to_string(), nodes.to_string(), k.to_string(), fmt(direct), fmt(parts), fmt(rel)]);
            }
            worst.push(w);
        }
        let mut rec = EstimateRecord::new("energy-consistency", "random-power-mixture")
            .param("n", n as f64)
            .param("profiles", count as f64)
            .param("homogeneity_error", homog)
            .param("dilation_error", dil)
            .with_values(resolutions.clone(), worst, 2.0);
        rec.verdict = rec.values.iter().all(|x| *x <= 1e-8) && homog <= 1e-12 && dil <= 1e-8;
        out.records.push(rec);
    }
    out.tables.push(table);
    Ok(out)
}

/// Runs `steps` steps; the state, the number of steps taken and whether
/// the flow stagnated.
fn drive<P, F>(mut state: FlowState<P>, steps: usize, mut step: F) -> Result<(FlowState<P>, bool)>
where
    F: FnMut(&FlowState<P>) -> Result<FlowState<P>>,
{
    for _ in 0..steps {
        match step(&state) {
            Ok(next) => state = next,
            Err(LabError::Stagnation { .. }) => return Ok((state, true)),
            Err(e) => return Err(e),
        }
    }
    Ok((state, false))
}

fn descent_flow(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut out = Outcome::default();
    let backend = cfg.backend_or(Backend::Radial);
    let params = SobolevParams {
        lambda: cfg.f64_or("lambda", 0.1)?,
        p: cfg.f64_or("p", 2.0)?,
        cap: cfg.f64_or("cap", 50.0)?,
        delta: cfg.f64_or("delta", 0.01)?,
    };
    let kind = FlowKind::SobolevPe(params);
    let steps = cfg.usize_or("steps", 1000)?;
    let dt = cfg.f64_or("dt", 1e-2)?;
    let control = StepControl::default();
    let (dims, resolutions) = match backend {
        Backend::Radial => (cfg.dims_or(&[2]), cfg.resolutions_or(&[200, 400])),
        Backend::Planar => (cfg.dims_or(&[1]), cfg.resolutions_or(&[32, 64])),
    };
    for n in dims {
        let mut values = Vec::new();
        let mut nodes = Vec::new();
        let mut ok = true;
        let mut worst = f64::NEG_INFINITY;
        let mut residual = 0.0f64;
        for &res in &resolutions {
            let (trace, res_final, stag, len) = match backend {
                Backend::Radial => {
                    let u = RadialProfile::from_fn(uniform_ball(n, 1.0, res)?, |r| r - 1.0)?;
                    let len = u.ball().len();
                    let (s, stag) =
                        drive(radial_flow_start(u, dt, &kind)?, steps, |s| radial_flow_step(s, &kind, &control))?;
                    (s.history, stationarity_residual(&s.profile, &kind)?, stag, len)
                }
                Backend::Planar => {
                    if n != 1 {
                        return Err(LabError::Usage("the planar backend needs n = 1".into()));
                    }
                    let g = Arc::new(PlanarGrid::unit_square(res)?);
                    let u = GridField::potential_from_fn(g.clone(), |x, y| -16.0 * x * (1.0 - x) * y * (1.0 - y))?;
                    let (s, stag) =
                        drive(planar_flow_start(u, dt, &kind)?, steps, |s| planar_flow_step(s, &kind, &control))?;
                    (s.history, planar_stationarity_residual(&s.profile, &kind)?, stag, g.len())
                }
            };
            let inc = trace.worst_increase();
            worst = worst.max(inc);
            residual = residual.max(res_final);
            ok &= !stag && inc <= crate::flow::DESCENT_TOL && res_final < 1e-6 && trace.rows.len() > steps;
            values.push(trace.last().map_or(f64::NAN, |r| r.functional));
            nodes.push(len);
            out.traces.push((format!("descent-n{n}-{res}"), trace));
        }
        let mut rec = EstimateRecord::new("descent-flow", backend_name(backend))
            .param("n", n as f64)
            .param("lambda", params.lambda)
            .param("p", params.p)
            .param("delta", params.delta)
            .param("worst_increase", worst)
            .param("terminal_residual", residual)
            .with_values(nodes, values, 2.0);
        rec.verdict = ok;
        out.records.push(rec);
    }
    Ok(out)
}

fn backend_name(b: Backend) -> &'static str {
    match b {
        Backend::Radial => "radial",
        Backend::Planar => "planar",
    }
}

fn mt_flow(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut out = Outcome::default();
    let alpha = cfg.f64_or("alpha", 1.0)?;
    let delta = cfg.f64_or("delta", 0.1)?;
    let steps = cfg.usize_or("steps", 400)?;
    let offsets: Vec<usize> = cfg.f64_list_or("m_offsets", &[0.0, 5.0])?.iter().map(|x| *x as usize).collect();
    let resolutions = cfg.resolutions_or(&[200, 400]);
    let control = StepControl::default();
    for n in cfg.dims_or(&[1, 2]) {
        for &off in &offsets {
            let m = n + off;
            let kind = FlowKind::MoserTrudinger { params: MtParams { m, alpha, delta }, rule: LambdaRule::Normalized };
            let mut norms = Vec::new();
            let mut residual = 0.0f64;
            for &res in &resolutions {
                let u = RadialProfile::from_fn(uniform_ball(n, 1.0, res)?, |r| 0.5 * (r - 1.0))?;
                let state = radial_flow_start(u, 1e-2, &kind)?;
                let (s, _) = drive(state, steps, |s| radial_flow_step(s, &kind, &control))?;
                norms.push(psh_seminorm(&s.profile)?);
                residual = residual.max(stationarity_residual(&s.profile, &kind)?);
                out.traces.push((format!("mt-n{n}-m{m}-{res}"), s.history));
            }
            let mut rec = EstimateRecord::new("mt-flow", "radial")
                .param("n", n as f64)
                .param("m", m as f64)
                .param("alpha", alpha)
                .param("delta", delta)
                .param("terminal_residual", residual)
                .with_values(resolutions.clone(), norms, 2.0);
            rec.verdict = rec.values.iter().all(|t| (t - 1.0).abs() <= 0.01);
            out.records.push(rec);
        }
    }
    Ok(out)
}

fn norm_concentration(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut out = Outcome::default();
    let alpha = cfg.f64_or("alpha", 2.0)?;
    let delta = cfg.f64_or("delta", 0.1)?;
    let eps = cfg.f64_list_or("eps", &[0.2, 0.1, 0.05, 0.025])?;
    let mut table = Table::new("theta-brackets", &["n", "m", "eps", "theta_lo", "theta_hi"]);
    for n in cfg.dims_or(&[1, 2]) {
        let m = cfg.usize_or("m", n + 2)?;
        let chk = norm_concentration_check(n, m, alpha, delta, &eps)?;
        for (e, b) in &chk.brackets {
            table.push(vec![n.to_string(), m.to_string(), fmt(*e), fmt(b[0]), fmt(b[1])]);
        }
        out.records.push(chk.record.param("max_gain_ratio", chk.max_gain_ratio));
    }
    out.tables.push(table);
    Ok(out)
}

fn slice(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut out = Outcome::default();
    let resolutions = cfg.resolutions_or(&[257, 513]);
    let count = cfg.usize_or("count", 20)?;
    let slack = cfg.f64_or("slack", 0.02)?;
    let mut errs = Vec::new();
    for &res in &resolutions {
        let u = RadialProfile::from_fn(uniform_ball(2, 1.0, res)?, |r| r - 1.0)?;
        let chk = slice_mass_check(&u)?;
        let e1 = (chk.laplacian_mass / (8.0 * PI * PI) - 1.0).abs();
        let e2 = (chk.twice_mass / (32.0 * PI * PI) - 1.0).abs();
        errs.push(e1.max(e2));
    }
    let mut rec =
        EstimateRecord::new("slice-quadratic", "quadratic").param("n", 2.0).with_values(resolutions.clone(), errs, 2.0);
    rec.verdict = rec.values.iter().all(|e| *e <= 1e-6);
    out.records.push(rec);

    let mut r = rng(cfg, 200);
    let mixtures: Vec<PowerMixture> = (0..count).map(|_| PowerMixture::random(&mut r)).collect();
    let mut table = Table::new("slice", &["nodes", "profile", "laplacian_mass", "twice_mass", "max_boundary_term"]);
    let mut ratios = Vec::new();
    let mut ok = true;
    for &res in &resolutions {
        let ball = uniform_ball(2, 1.0, res)?;
        let mut worst = 0.0f64;
        for (k, mix) in mixtures.iter().enumerate() {
            let u = mix.profile(ball.clone())?;
            let chk = slice_mass_check(&u)?;
            ok &= chk.holds(slack) && chk.boundary_nonpositive;
            worst = worst.max(chk.ratio());
            table.push(vec![
                res.to_string(),
                k.to_string(),
                fmt(chk.laplacian_mass),
                fmt(chk.twice_mass),
                fmt(chk.max_boundary_term),
            ]);
        }
        ratios.push(worst);
    }
    let mut rec = EstimateRecord::new("slice-random", "random-power-mixture")
        .param("n", 2.0)
        .param("profiles", count as f64)
        .param("slack", slack)
        .with_values(resolutions, ratios, 2.0);
    rec.verdict = ok;
    out.records.push(rec);
    out.tables.push(table);
    // radial symmetry of the sampled slice potential
    let u = RadialProfile::from_fn(uniform_ball(2, 1.0, 129)?, |r| r - 1.0)?;
    let sp = slice_potential(&u)?;
    let dev = sp.orbit_deviation(0.3, 0.4, 16);
    let mut rec =
        EstimateRecord::new("slice-orbit", "quadratic").param("n", 2.0).with_values(vec![129], vec![dev], 2.0);
    rec.verdict = dev <= 1e-12;
    out.records.push(rec);
    Ok(out)
}

/// A bracket record accepted when it contains `target` and is at most
/// `rel_width·target` wide.
fn judge_bracket(mut rec: EstimateRecord, target: f64, rel_width: f64) -> EstimateRecord {
    let contains = rec.bracket.is_some_and(|[a, b]| a <= target && target <= b);
    let narrow = rec.bracket.is_some_and(|[a, b]| b - a <= rel_width * target);
    rec.verdict = rec.verdict && contains && narrow;
    rec.param("target", target)
}

fn alpha_budget(cfg: &ExperimentConfig, target: f64, lo: f64, hi: f64) -> Result<AlphaBudget> {
    let mut b = AlphaBudget::default_for(cfg.f64_or("alpha_lo", lo)? * target, cfg.f64_or("alpha_hi", hi)? * target);
    b.width = cfg.f64_or("width", 0.005)? * target;
    b.depths = cfg.f64_list_or("depths", &b.depths)?;
    b.growths = cfg.f64_list_or("growths", &b.growths)?;
    b.bisection_depth = cfg.usize_or("bisection_depth", 16)?;
    Ok(b)
}

fn mt_alpha(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut out = Outcome::default();
    let rel = cfg.f64_or("max_rel_width", 0.2)?;
    for n in cfg.dims_or(&[1]) {
        let target = log_cusp_alpha(n);
        let rec = estimate_mt_alpha(n, &alpha_budget(cfg, target, 0.6, 1.7)?)?;
        out.records.push(judge_bracket(rec, target, rel));
    }
    Ok(out)
}

fn weak_bm(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut out = Outcome::default();
    let rel = cfg.f64_or("max_rel_width", 0.2)?;
    for n in cfg.dims_or(&[1]) {
        let target = 4.0 * PI * n as f64;
        let rec = bm_profile(n, &BmMode::Weak(alpha_budget(cfg, target, 0.55, 1.65)?))?;
        out.records.push(judge_bracket(rec, target, rel));
    }
    Ok(out)
}

fn planar_bm(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut out = Outcome::default();
    let count = cfg.usize_or("count", 25)?;
    let deltas = cfg.f64_list_or("deltas", &[0.5 * PI, PI, 2.0 * PI])?;
    let resolutions = cfg.resolutions_or(&[32, 64]);
    let mut r = rng(cfg, 300);
    let sources: Vec<BumpSource> = (0..count).map(|_| BumpSource::random(&mut r, (0.0, 1.0, 0.0, 1.0))).collect();
    let mut table = Table::new("brezis-merle", &["cells", "source", "delta", "lhs", "bound"]);
    let mut worst = Vec::new();
    let mut nodes = Vec::new();
    let mut ok = true;
    for &res in &resolutions {
        let grid = Arc::new(PlanarGrid::unit_square(res)?);
        let rows: Vec<Vec<(f64, f64, f64)>> = sources
            .par_iter()
            .map(|src| {
                let mut sys = PoissonSystem::from_laplacian(grid.clone(), |x, y| src.value(x, y))?;
                let u = poisson_solve(&mut sys)?;
                let f = GridField::from_fn(grid.clone(), |x, y| src.value(x, y))?;
                deltas
                    .iter()
                    .map(|&d| brezis_merle_check(&u, &f, d).map(|c| (d, c.lhs, c.bound)))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        let mut w = 0.0f64;
        for (k, row) in rows.iter().enumerate() {
            for &(d, lhs, bound) in row {
                ok &= lhs <= bound;
                w = w.max(lhs / bound);
                table.push(vec![res.to_string(), k.to_string(), fmt(d), fmt(lhs), fmt(bound)]);
            }
        }
        worst.push(w);
        nodes.push(grid.len());
    }
    let mut rec = EstimateRecord::new("planar-bm", "random-bumps")
        .param("n", 1.0)
        .param("sources", count as f64)
        .with_values(nodes, worst, 2.0);
    rec.verdict = ok;
    out.records.push(rec);
    out.tables.push(table);
    Ok(out)
}

fn quasi_bm(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut out = Outcome::default();
    for n in cfg.dims_or(&[2]) {
        let mode = BmMode::Quasi {
            delta_max: cfg.f64_or("delta_max", 1.6)?,
            levels: cfg.usize_or("levels", 4)?,
            depth: cfg.f64_or("depth", 300.0)?,
            growths: cfg.f64_list_or("growths", &[1.04, 1.02])?,
        };
        out.records.push(bm_profile(n, &mode)?);
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn orlicz_record(
    name: &str,
    n: usize,
    q: f64,
    beta: f64,
    delta: f64,
    depths: &[f64],
    panels: &[f64],
    expect: Growth,
) -> Result<EstimateRecord> {
    let mut values = Vec::new();
    let mut nodes = Vec::new();
    let mut ok = true;
    for &h in panels {
        let (g, logs, count) = orlicz_growth(n, q, beta, delta, depths, 1.0, h)?;
        ok &= g == expect;
        values.push(*logs.last().expect("depths are non-empty"));
        nodes.push(count);
    }
    let mut rec = EstimateRecord::new(name, "truncated-log-cusp")
        .param("n", n as f64)
        .param("q", q)
        .param("beta", beta)
        .param("delta", delta)
        .with_values(nodes, values, 2.0);
    rec.verdict = ok;
    Ok(rec)
}

fn bmq(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut out = Outcome::default();
    let n = *cfg.dims_or(&[2]).first().expect("non-empty");
    let q_text = cfg.params.get("q").cloned().unwrap_or_else(|| "1".into());
    let q_exact = crate::lab::parse_rational(&q_text).map_err(|e| LabError::Usage(e.to_string()))?;
    let q = num_traits::ToPrimitive::to_f64(&q_exact).unwrap_or(f64::NAN);
    let k_max = cfg.usize_or("k_max", 40)?;
    let sched = beta_iteration_schedule(&q_exact, n, k_max)?;
    let betas = sched.as_f64();
    let mut table = Table::new("beta-schedule", &["k", "beta_exact", "beta"]);
    for (k, (b, f)) in sched.betas.iter().zip(&betas).enumerate() {
        table.push(vec![k.to_string(), b.to_string(), fmt(*f)]);
    }
    out.tables.push(table);
    let nr = BigRational::from_integer(BigInt::from(n));
    let exact_limit = if sched.diverges { None } else { Some(&nr / (&nr - &q_exact)) };
    let monotone = sched.betas.windows(2).all(|w| w[1] >= w[0]);
    let mut rec = EstimateRecord::new("beta-schedule", "recursion").param("n", n as f64).param("q", q).with_values(
        (1..=betas.len()).collect(),
        betas.clone(),
        1.0,
    );
    rec.verdict = monotone && sched.limit == exact_limit;
    if let Some(l) = &sched.limit {
        let lf = num_traits::ToPrimitive::to_f64(l).unwrap_or(f64::NAN);
        rec = rec.param("limit", lf);
        rec.verdict &= (betas[betas.len() - 1] - lf).abs() <= lf * 2f64.powi(-(k_max as i32).min(50)) * 4.0 + 1e-15;
    }
    out.records.push(rec);

    let depths = cfg.f64_list_or("depths", &(1..=10).map(|k| 250.0 * k as f64).collect::<Vec<_>>())?;
    let panels = cfg.f64_list_or("panels", &[0.5, 0.25])?;
    if let (Some(dc), false) = (orlicz_delta_threshold(n, q), sched.diverges) {
        let beta = n as f64 / (n as f64 - q);
        let delta = cfg.f64_or("delta", 0.9 * dc)?;
        let factor = cfg.f64_or("super_factor", 1.2)?;
        out.records.push(
            orlicz_record("bmq-critical", n, q, beta, delta, &depths, &panels, Growth::Bounded)?
                .param("delta_threshold", dc),
        );
        out.records.push(
            orlicz_record("bmq-supercritical", n, q, factor * beta, delta, &depths, &panels, Growth::Diverging)?
                .param("delta_threshold", dc),
        );
    }
    let beta_big = cfg.f64_or("beta_large_q", 3.0)?;
    let delta_small = cfg.f64_or("delta_large_q", 1.0)?;
    out.records.push(orlicz_record(
        "bmq-large-q",
        n,
        n as f64,
        beta_big,
        delta_small,
        &depths,
        &panels,
        Growth::Bounded,
    )?);
    Ok(out)
}

fn sobolev_t(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut out = Outcome::default();
    let radii = cfg.f64_list_or("radii", &[0.5, 1.0, 2.0])?;
    let backend = cfg.backend_or(Backend::Radial);
    let mut budget = SobolevBudget { resolutions: cfg.resolutions_or(&[200, 400]), ..SobolevBudget::default() };
    budget.flow_steps = cfg.usize_or("steps", budget.flow_steps)?;
    budget.theta = cfg.f64_or("theta", budget.theta)?;
    let mut table = Table::new("sobolev", &["n", "p", "radius", "nodes", "family", "flow"]);
    let dims = match backend {
        Backend::Radial => cfg.dims_or(&[1, 2]),
        Backend::Planar => cfg.dims_or(&[1]),
    };
    for n in dims {
        let p = cfg.f64_or("p", n as f64 + 1.0)?;
        let estimates: Vec<(f64, f64)> = radii
            .iter()
            .map(|&r| {
                let e = estimate_sobolev_t(n, p, r, backend, &budget)?;
                for l in &e.levels {
                    table.push(vec![
                        n.to_string(),
                        fmt(p),
                        fmt(r),
                        l.nodes.to_string(),
                        fmt(l.family_value),
                        fmt(l.flow_value),
                    ]);
                }
                out.records.push(e.record.clone());
                Ok((r, e.record.estimate))
            })
            .collect::<Result<_>>()?;
        let expo = -2.0 * n as f64 * (n as f64 + 1.0) / (p + 1.0);
        let (r0, t0) = estimates.iter().copied().find(|(r, _)| *r == 1.0).unwrap_or(estimates[0]);
        let dev = estimates.iter().map(|(r, t)| (t / t0 / (r / r0).powf(expo) - 1.0).abs()).fold(0.0, f64::max);
        let mut sorted = estimates.clone();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let decreasing = sorted.windows(2).all(|w| w[1].1 < w[0].1);
        let mut rec = EstimateRecord::new("sobolev-scaling", "dilation")
            .param("n", n as f64)
            .param("p", p)
            .param("exponent", expo)
            .with_values(vec![radii.len()], vec![dev], 2.0);
        rec.verdict = dev <= 0.01 && (p <= n as f64 || decreasing);
        out.records.push(rec);
    }
    out.tables.push(table);
    Ok(out)
}

fn llogl(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut out = Outcome::default();
    let alpha = cfg.f64_or("alpha", 1.0)?;
    let delta = cfg.f64_or("delta", 0.1)?;
    let steps = cfg.usize_or("steps", 400)?;
    let deltas = cfg.f64_list_or("deltas", &[0.1, 0.05, 0.025, 0.0125])?;
    let mut table = Table::new("llogl", &["n", "m", "A", "residual"]);
    for n in cfg.dims_or(&[1, 2]) {
        let ms: Vec<usize> = (n..=n + 20).step_by(4).collect();
        let mut values = Vec::new();
        let resolutions = cfg.resolutions_or(&[200, 400]);
        let mut ok = true;
        let mut steps_diff = 0.0f64;
        for &res in &resolutions {
            let u = RadialProfile::from_fn(uniform_ball(n, 1.0, res)?, |r| 0.5 * (r - 1.0))?;
            let rep = g_llogl_check(&u, &ms, alpha, delta, &deltas, steps)?;
            for ((m, a), r) in rep.ms.iter().zip(&rep.a_values).zip(&rep.residuals) {
                table.push(vec![n.to_string(), m.to_string(), fmt(*a), fmt(*r)]);
            }
            // successive differences in δ must shrink
            let diffs: Vec<f64> = rep.delta_sweep.windows(2).map(|w| (w[1].1 - w[0].1).abs()).collect();
            ok &= rep.bounded && diffs.windows(2).all(|w| w[1] < w[0]);
            steps_diff = steps_diff.max(*diffs.last().unwrap_or(&0.0));
            values.push(rep.max_ratio);
        }
        let mut rec = EstimateRecord::new("llogl", "mt-flow")
            .param("n", n as f64)
            .param("alpha", alpha)
            .param("delta", delta)
            .param("last_delta_step", steps_diff)
            .with_values(resolutions, values, 2.0);
        rec.verdict = ok;
        out.records.push(rec);
    }
    out.tables.push(table);
    Ok(out)
}
