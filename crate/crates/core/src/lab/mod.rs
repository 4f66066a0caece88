//! Test families and estimators for the constants of the energy
//! inequalities: Sobolev `T_{p,Ω}`, Moser-Trudinger `α`, Brezis-Merle
//! thresholds, the quasi-BM blow-up rate and the exponents of the
//! Orlicz-class estimate.

pub mod bm;
pub mod families;
pub mod mt;
pub mod norm;
pub mod sobolev;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub use bm::{
    beta_iteration_schedule, bm_profile, orlicz_delta_threshold, orlicz_growth, parse_rational, BetaSchedule, BmMode,
};
pub use families::{make_log_cusp, BmqFamily, BumpSource, LogCusp, LogCuspFamily, PowerMixture};
pub use mt::{estimate_mt_alpha, log_cusp_alpha, AlphaBudget};
pub use norm::{g_llogl_check, llogl_value, norm_concentration_check, LlogLReport, NormCheck};
pub use sobolev::{estimate_sobolev_t, SobolevBudget, SobolevEstimate, SobolevLevel};

/// Computational backend of an estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    #[default]
    Radial,
    Planar,
}

/// One estimate with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    pub estimate: f64,
    pub family: String,
    /// Strictly increasing resolutions (node counts).
    pub resolutions: Vec<usize>,
    /// Estimate at each resolution.
    pub values: Vec<f64>,
    pub extrapolated: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub bracket: Option<[f64; 2]>,
    pub verdict: bool,
}

impl EstimateRecord {
    pub fn new(name: &str, family: &str) -> Self {
        Self {
            name: name.into(),
            params: BTreeMap::new(),
            estimate: f64::NAN,
            family: family.into(),
            resolutions: Vec::new(),
            values: Vec::new(),
            extrapolated: f64::NAN,
            bracket: None,
            verdict: false,
        }
    }

    pub fn param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.into(), value);
        self
    }

    /// Fills resolutions, values, the estimate (finest value) and the
    /// Richardson extrapolation of the two finest ones.
    pub fn with_values(mut self, resolutions: Vec<usize>, values: Vec<f64>, order: f64) -> Self {
        let k = values.len();
        self.estimate = values.last().copied().unwrap_or(f64::NAN);
        self.extrapolated = if k >= 2 {
            let ratio = resolutions[k - 1] as f64 / resolutions[k - 2] as f64;
            richardson(values[k - 2], values[k - 1], ratio, order)
        } else {
            self.estimate
        };
        self.resolutions = resolutions;
        self.values = values;
        self
    }

    pub fn to_json_line(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// `fine + (fine - coarse)/(r^p - 1)` for refinement ratio `r` and order
/// `p`.
pub fn richardson(coarse: f64, fine: f64, ratio: f64, order: f64) -> f64 {
    let d = ratio.powf(order) - 1.0;
    if d.abs() < 1e-12 {
        return fine;
    }
    fine + (fine - coarse) / d
}

/// Verdict of a family integral as the family parameter increases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Growth {
    /// Grew by a factor `≥ 2` over each of the last three increments.
    Diverging,
    /// Last relative increment below 1%.
    Bounded,
    Undetermined,
}

/// Factor per increment that counts as divergence.
pub const DIVERGENCE_FACTOR: f64 = 2.0;
/// Relative increment below which the family counts as bounded.
pub const BOUNDED_INCREMENT: f64 = 0.01;

/// Classifies `ln I(L_k)` for increasing `L_k`.
pub fn classify_growth(log_values: &[f64]) -> Growth {
    let k = log_values.len();
    if k >= 4 {
        let tail = &log_values[k - 4..];
        if tail.windows(2).all(|w| w[1] - w[0] >= DIVERGENCE_FACTOR.ln()) {
            return Growth::Diverging;
        }
    }
    if k >= 2 {
        let d = log_values[k - 1] - log_values[k - 2];
        if d.exp_m1().abs() < BOUNDED_INCREMENT {
            return Growth::Bounded;
        }
    }
    Growth::Undetermined
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn richardson_removes_leading_error() {
        // f(h) = 1 + h², halving h
        let coarse = 1.0 + 0.01;
        let fine = 1.0 + 0.0025;
        assert!((richardson(coarse, fine, 2.0, 2.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn growth_classes() {
        let lin: Vec<f64> = (0..6).map(|k| k as f64).collect();
        assert_eq!(classify_growth(&lin), Growth::Diverging);
        let flat = [1.0, 1.5, 1.7, 1.705];
        assert_eq!(classify_growth(&flat), Growth::Bounded);
        let slow = [0.0, 0.1, 0.2, 0.3];
        assert_eq!(classify_growth(&slow), Growth::Undetermined);
        // a single small jump does not count as divergence
        let late = [0.0, 0.0, 0.0, 5.0];
        assert_eq!(classify_growth(&late), Growth::Undetermined);
    }

    #[test]
    fn slope_of_line() {
        let x = [0.0, 1.0, 2.0];
        let y = [1.0, 3.0, 5.0];
        assert!((fit_slope(&x, &y) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn record_json_roundtrip() {
        let r = EstimateRecord::new("x", "fam").param("n", 2.0).with_values(vec![10, 20], vec![1.01, 1.0025], 2.0);
        assert!((r.extrapolated - 1.0).abs() < 1e-12);
        let line = r.to_json_line().unwrap();
        let back: EstimateRecord = serde_json::from_str(&line).unwrap();
        assert_eq!(back, r);
    }
}
