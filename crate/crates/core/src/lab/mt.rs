//! Critical exponents by bisection along the log-cusp family.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::families::LogCuspFamily;
use super::{classify_growth, EstimateRecord, Growth};
use crate::domain::radial::log_sum_exp;
use crate::error::{LabError, Result};
use crate::functionals::{ma_mass, psh_seminorm};

/// Budget of a bisection over the log-cusp family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaBudget {
    /// Increasing cut-off depths `L`.
    pub depths: Vec<f64>,
    /// Grid ratios, coarse to fine.
    pub growths: Vec<f64>,
    pub bisection_depth: usize,
    /// Initial bracket as multiples of `2πn`-scale guesses.
    pub alpha_lo: f64,
    pub alpha_hi: f64,
    pub width: f64,
}

impl AlphaBudget {
    pub fn default_for(lo: f64, hi: f64) -> Self {
        Self {
            depths: (1..=10).map(|k| 8.0 * k as f64).collect(),
            growths: vec![1.04, 1.02],
            bisection_depth: 12,
            alpha_lo: lo,
            alpha_hi: hi,
            width: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.depths.len() < 4 || self.depths.windows(2).any(|w| w[1] <= w[0]) {
            return Err(LabError::Parameter("need at least 4 increasing depths".into()));
        }
        if self.growths.is_empty() || self.growths.iter().any(|g| !(*g > 1.0)) {
            return Err(LabError::Parameter("grid ratios must exceed 1".into()));
        }
        if !(self.alpha_lo > 0.0 && self.alpha_hi > self.alpha_lo) {
            return Err(LabError::Parameter("initial bracket must satisfy 0 < lo < hi".into()));
        }
        Ok(())
    }
}

/// One member of a family reduced to what exponential integrals need:
/// `ln` of the quadrature weights and the normalized depth `x ≥ 0`.
#[derive(Debug, Clone)]
pub(crate) struct Sample {
    pub log_w: Vec<f64>,
    pub x: Vec<f64>,
    pub nodes: usize,
}

impl Sample {
    pub fn new(weights: &[f64], values: &[f64], scale: f64) -> Self {
        let (log_w, x) =
            weights.iter().zip(values).filter(|(w, _)| **w > 0.0).map(|(w, v)| (w.ln(), (-v / scale).max(0.0))).unzip();
        Self { log_w, x, nodes: weights.len() }
    }

    /// `ln Σ wᵢ exp(α xᵢ^θ)`.
    pub fn log_integral(&self, alpha: f64, theta: f64) -> f64 {
        let t: Vec<f64> = self.log_w.iter().zip(&self.x).map(|(lw, x)| lw + alpha * x.powf(theta)).collect();
        log_sum_exp(&t)
    }
}

/// Growth verdict of `α ↦ ln ∫exp(α x^θ)` along a family.
pub(crate) fn verdict(samples: &[Sample], alpha: f64, theta: f64) -> Growth {
    let logs: Vec<f64> = samples.iter().map(|s| s.log_integral(alpha, theta)).collect();
    classify_growth(&logs)
}

/// Bracket for the threshold between bounded and diverging family
/// integrals: `[largest accepted, smallest rejected]`. The two ends are
/// bisected separately, so values classified as undetermined near the
/// threshold shrink the bracket from neither side. `None` when the
/// initial ends are not classified as bounded and diverging.
pub(crate) fn bisect(samples: &[Sample], theta: f64, lo: f64, hi: f64, depth: usize, width: f64) -> Option<[f64; 2]> {
    if verdict(samples, lo, theta) != Growth::Bounded || verdict(samples, hi, theta) != Growth::Diverging {
        return None;
    }
    // `upper_if(g)` decides whether the threshold lies above a value
    // classified `g`
    let side = |upper_if: &dyn Fn(Growth) -> bool| {
        let (mut a, mut b) = (lo, hi);
        for _ in 0..depth {
            if b - a <= width {
                break;
            }
            let mid = 0.5 * (a + b);
            if upper_if(verdict(samples, mid, theta)) {
                a = mid;
            } else {
                b = mid;
            }
        }
        (a, b)
    };
    let (accepted, _) = side(&|g| g == Growth::Bounded);
    let (_, rejected) = side(&|g| g != Growth::Diverging);
    Some([accepted, rejected])
}

/// Log-cusp samples normalized by the seminorm (`mass = false`) or by
/// `M^{1/n}` (`mass = true`).
pub(crate) fn cusp_samples(n: usize, depths: &[f64], growth: f64, by_mass: bool) -> Result<Vec<Sample>> {
    depths
        .par_iter()
        .map(|&l| {
            let fam = LogCuspFamily::new(n, 1.0, 1.0 / (2.0 * PI), l, 1.0)?;
            let u = fam.generate(growth)?.profile;
            let scale = if by_mass { ma_mass(&u)?.powf(1.0 / n as f64) } else { psh_seminorm(&u)? };
            Ok(Sample::new(&u.ball().trapezoid_weights(), u.values(), scale))
        })
        .collect()
}

/// Brackets per resolution, combined into one record: the estimate is the
/// bracket midpoint, the final bracket the intersection, and the verdict
/// requires every resolution to produce a bracket and the intersection
/// to be non-empty.
pub(crate) fn bracket_record(
    mut rec: EstimateRecord,
    budget: &AlphaBudget,
    theta: f64,
    samples_for: impl Fn(f64) -> Result<Vec<Sample>>,
) -> Result<EstimateRecord> {
    budget.validate()?;
    let mut resolutions = Vec::new();
    let mut mids = Vec::new();
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    let mut ok = true;
    for &g in &budget.growths {
        let samples = samples_for(g)?;
        resolutions.push(samples.last().map_or(0, |s| s.nodes));
        match bisect(&samples, theta, budget.alpha_lo, budget.alpha_hi, budget.bisection_depth, budget.width) {
            Some([a, b]) => {
                mids.push(0.5 * (a + b));
                lo = lo.max(a);
                hi = hi.min(b);
            }
            None => {
                ok = false;
                mids.push(f64::NAN);
            }
        }
    }
    rec = rec.with_values(resolutions, mids, 2.0);
    rec.verdict = ok && lo < hi;
    rec.bracket = Some([lo, hi]);
    if rec.verdict {
        rec.estimate = 0.5 * (lo + hi);
    }
    Ok(rec)
}

/// Bracket for the largest `α` with `sup ∫exp(α(-u/‖u‖)^{(n+1)/n}) < ∞`
/// along the log-cusp family (scale invariant, so `c` is fixed).
pub fn estimate_mt_alpha(n: usize, budget: &AlphaBudget) -> Result<EstimateRecord> {
    if n == 0 {
        return Err(LabError::Parameter("n must be >= 1".into()));
    }
    let theta = (n as f64 + 1.0) / n as f64;
    let rec = EstimateRecord::new("mt-alpha", "log-cusp").param("n", n as f64);
    bracket_record(rec, budget, theta, |g| cusp_samples(n, &budget.depths, g, false))
}

/// `α_n = 4πn/(n+1)^{1/n}`, the exponent balance on the log-cusp family:
/// `sup(-u) ≈ cL` against `E ≈ (4π)ⁿ/(n+1)·(c/2)^{n+1}·2L`.
pub fn log_cusp_alpha(n: usize) -> f64 {
    let nf = n as f64;
    4.0 * PI * nf / (nf + 1.0).powf(1.0 / nf)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balance_constants() {
        assert!((log_cusp_alpha(1) - 2.0 * PI).abs() < 1e-12);
        assert!((log_cusp_alpha(2) - 8.0 * PI / 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn sample_integral_of_constant() {
        let s = Sample::new(&[0.5, 0.5], &[0.0, 0.0], 1.0);
        assert!((s.log_integral(3.0, 2.0) - 0.0).abs() < 1e-15);
    }
}
