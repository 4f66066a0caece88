//! Acceptance criteria, one line each. Tolerances are pinned here.

use std::time::{Duration, Instant};

use cma_lab::lab::EstimateRecord;
use cma_lab::runner::{records_jsonl, run_experiment, ExperimentConfig, Outcome};

const ROUNDTRIP_TOL: f64 = 1e-10;
const IDENTITY_TOL: f64 = 1e-8;
const BY_PARTS_TOL: f64 = 1e-8;
const HOMOGENEITY_TOL: f64 = 1e-12;
const DILATION_TOL: f64 = 1e-8;
const DESCENT_TOL: f64 = 1e-9;
const RESIDUAL_TOL: f64 = 1e-6;
const MIN_STEPS: usize = 1000;
const SEMINORM_BAND: f64 = 0.01;
const GAIN_SLACK: f64 = 1e-12;
const SLICE_QUADRATIC_TOL: f64 = 1e-6;
const SLICE_SLACK: f64 = 0.02;
const BRACKET_REL_WIDTH: f64 = 0.2;
const QUASI_SLOPE: f64 = 1.0;
const QUASI_TOL: f64 = 0.1;
const SCALING_TOL: f64 = 0.01;

fn run(text: &str) -> Outcome {
    let cfg = ExperimentConfig::parse(text).unwrap();
    run_experiment(&cfg).unwrap_or_else(|e| panic!("{}: {e}", cfg.experiment))
}

fn p(r: &EstimateRecord, key: &str) -> f64 {
    r.params[key]
}

fn named<'a>(o: &'a Outcome, name: &str) -> Vec<&'a EstimateRecord> {
    o.records.iter().filter(|r| r.name == name).collect()
}

struct Criterion {
    id: usize,
    title: &'static str,
    check: fn(&mut Vec<EstimateRecord>) -> (bool, String),
    budget: Option<Duration>,
}

fn c1(all: &mut Vec<EstimateRecord>) -> (bool, String) {
    let o = run("experiment = radial-roundtrip\nn = 1, 2, 3\nresolutions = 2048\n");
    let err = o.records.iter().map(|r| r.estimate).fold(0.0, f64::max);
    let id = o.records.iter().map(|r| p(r, "identity_error")).fold(0.0, f64::max);
    all.extend(o.records.clone());
    (
        o.records.len() == 3 && err <= ROUNDTRIP_TOL && id <= IDENTITY_TOL,
        format!("max error {err:.2e}, identities {id:.2e}"),
    )
}

fn c2(all: &mut Vec<EstimateRecord>) -> (bool, String) {
    let o = run("experiment = energy-consistency\nn = 1, 2\ncount = 50\nseed = 11\n");
    let parts = o.records.iter().flat_map(|r| r.values.iter().copied()).fold(0.0, f64::max);
    let hom = o.records.iter().map(|r| p(r, "homogeneity_error")).fold(0.0, f64::max);
    let dil = o.records.iter().map(|r| p(r, "dilation_error")).fold(0.0, f64::max);
    all.extend(o.records.clone());
    (
        parts <= BY_PARTS_TOL && hom <= HOMOGENEITY_TOL && dil <= DILATION_TOL,
        format!("by parts {parts:.2e}, homogeneity {hom:.2e}, dilation {dil:.2e}"),
    )
}

fn c3(all: &mut Vec<EstimateRecord>) -> (bool, String) {
    let planar = run("experiment = descent-flow\nbackend = planar\nn = 1\nresolutions = 64\nsteps = 1000\n");
    let radial = run("experiment = descent-flow\nbackend = radial\nn = 2\nresolutions = 400\nsteps = 1000\n");
    let mut ok = true;
    let mut detail = Vec::new();
    for o in [&planar, &radial] {
        let r = &o.records[0];
        let steps = o.traces.iter().map(|t| t.1.rows.len() - 1).min().unwrap_or(0);
        let inc = p(r, "worst_increase");
        let res = p(r, "terminal_residual");
        ok &= steps >= MIN_STEPS && inc <= DESCENT_TOL && res < RESIDUAL_TOL;
        detail.push(format!("{}: {steps} steps, increase {inc:.1e}, residual {res:.1e}", r.family));
        all.extend(o.records.clone());
    }
    (ok, detail.join("; "))
}

fn c4(all: &mut Vec<EstimateRecord>) -> (bool, String) {
    let o = run("experiment = mt-flow\nn = 1, 2\nm_offsets = 0, 5\nalpha = 1\ndelta = 0.1\n");
    let dev = o.records.iter().flat_map(|r| r.values.iter()).map(|t| (t - 1.0).abs()).fold(0.0, f64::max);
    let g = run("experiment = norm-concentration\nn = 1, 2\n");
    let gain = g.records.iter().map(|r| p(r, "max_gain_ratio")).fold(0.0, f64::max);
    all.extend(o.records.clone());
    all.extend(g.records.clone());
    (
        o.records.len() == 4 && dev <= SEMINORM_BAND && gain <= 1.0 + GAIN_SLACK,
        format!("max |norm - 1| {dev:.2e}; max F(tw)/(g(t)F(w)) {gain:.15}"),
    )
}

fn c5(all: &mut Vec<EstimateRecord>) -> (bool, String) {
    let o = run("experiment = slice\ncount = 20\nslack = 0.02\nseed = 5\n");
    let q = named(&o, "slice-quadratic")[0].estimate;
    let rnd = named(&o, "slice-random")[0];
    all.extend(o.records.clone());
    (
        q <= SLICE_QUADRATIC_TOL && rnd.verdict && p(rnd, "slack") == SLICE_SLACK,
        format!("quadratic rel error {q:.1e}; random worst ratio {:.4}, G <= 0 on all", rnd.estimate),
    )
}

fn bracket_ok(r: &EstimateRecord) -> (bool, [f64; 2], f64) {
    let t = p(r, "target");
    let b = r.bracket.unwrap_or([f64::NAN; 2]);
    (b[0] <= t && t <= b[1] && b[1] - b[0] <= BRACKET_REL_WIDTH * t, b, t)
}

fn c6(all: &mut Vec<EstimateRecord>) -> (bool, String) {
    let a = run("experiment = mt-alpha\nn = 1\n");
    let w = run("experiment = weak-bm\nn = 1\n");
    let (oa, ba, ta) = bracket_ok(&a.records[0]);
    let (ow, bw, tw) = bracket_ok(&w.records[0]);
    all.extend(a.records.clone());
    all.extend(w.records.clone());
    (oa && ow, format!("alpha [{:.4}, {:.4}] vs {ta:.4}; weak [{:.4}, {:.4}] vs {tw:.4}", ba[0], ba[1], bw[0], bw[1]))
}

fn c7(all: &mut Vec<EstimateRecord>) -> (bool, String) {
    let o = run("experiment = planar-bm\nresolutions = 64\ncount = 25\nseed = 7\n");
    let r = &o.records[0];
    all.extend(o.records.clone());
    (r.verdict && p(r, "sources") == 25.0, format!("25 sources x 3 deltas, worst lhs/bound {:.4}", r.estimate))
}

fn c8(all: &mut Vec<EstimateRecord>) -> (bool, String) {
    let o = run("experiment = quasi-bm\nn = 2\n");
    let s = &o.records[0].values;
    all.extend(o.records.clone());
    (s.iter().all(|x| (x - QUASI_SLOPE).abs() <= QUASI_TOL), format!("slopes {s:.4?}"))
}

fn c9(all: &mut Vec<EstimateRecord>) -> (bool, String) {
    let o = run("experiment = bmq\nn = 2\nq = 1\n");
    let sched = named(&o, "beta-schedule")[0];
    let crit = named(&o, "bmq-critical")[0];
    let sup = named(&o, "bmq-supercritical")[0];
    let big = named(&o, "bmq-large-q")[0];
    all.extend(o.records.clone());
    (
        sched.verdict && p(sched, "limit") == 2.0 && crit.verdict && sup.verdict && big.verdict,
        format!(
            "limit {}; beta 2 ln I {:.4} bounded; beta {} ln I {:.1} diverging; q = n bounded",
            p(sched, "limit"),
            crit.estimate,
            p(sup, "beta"),
            sup.estimate
        ),
    )
}

fn c10(all: &mut Vec<EstimateRecord>) -> (bool, String) {
    let o = run("experiment = sobolev-t\nn = 1, 2\nradii = 0.5, 1, 2\n");
    let sc = named(&o, "sobolev-scaling");
    let dev = sc.iter().map(|r| r.estimate).fold(0.0, f64::max);
    all.extend(o.records.clone());
    (
        sc.len() == 2 && sc.iter().all(|r| r.verdict) && dev <= SCALING_TOL,
        format!("max dilation-law deviation {dev:.2e}"),
    )
}

const CRITERIA: [Criterion; 10] = [
    Criterion { id: 1, title: "radial solve round trip", check: c1, budget: Some(Duration::from_secs(1)) },
    Criterion { id: 2, title: "energy consistency", check: c2, budget: None },
    Criterion { id: 3, title: "descent flow monotone", check: c3, budget: Some(Duration::from_secs(120)) },
    Criterion { id: 4, title: "MT flow seminorm and gain", check: c4, budget: None },
    Criterion { id: 5, title: "slice mass inequality", check: c5, budget: Some(Duration::from_secs(60)) },
    Criterion { id: 6, title: "n = 1 exponent brackets", check: c6, budget: None },
    Criterion { id: 7, title: "planar Brezis-Merle", check: c7, budget: None },
    Criterion { id: 8, title: "quasi-critical rate", check: c8, budget: None },
    Criterion { id: 9, title: "Orlicz exponents", check: c9, budget: None },
    Criterion { id: 10, title: "Sobolev dilation law", check: c10, budget: None },
];

type Line = (usize, &'static str, bool, String);

fn suite() -> (Vec<Line>, Vec<EstimateRecord>) {
    let mut all = Vec::new();
    let mut lines = Vec::new();
    for c in &CRITERIA {
        let t = Instant::now();
        let (ok, detail) = (c.check)(&mut all);
        let dt = t.elapsed();
        let in_time = c.budget.is_none_or(|b| dt <= b);
        lines.push((c.id, c.title, ok && in_time, format!("{detail} ({:.2}s)", dt.as_secs_f64())));
    }
    (lines, all)
}

#[test]
fn acceptance() {
    let (mut lines, first) = suite();
    let (_, second) = suite();
    let a = records_jsonl(&first).unwrap();
    let b = records_jsonl(&second).unwrap();
    lines.push((11, "byte-identical rerun", a == b && !a.is_empty(), format!("{} bytes of JSON lines", a.len())));
    for (id, title, ok, detail) in &lines {
        println!("[{}] criterion {id:>2} {title}: {detail}", if *ok { "PASS" } else { "FAIL" });
    }
    let failed: Vec<usize> = lines.iter().filter(|l| !l.2).map(|l| l.0).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
