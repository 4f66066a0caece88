//! Scalar functionals of a potential: Monge-Ampère energy, semi-norm and
//! mass, `L^p` norms, the Moser-Trudinger integral, the Sobolev ratio and
//! the auxiliary functionals driving the two flows.

pub mod potential;
pub mod scalar;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use potential::{Measure, Potential};
pub use scalar::{cutoff_antiderivative, cutoff_f, eta, mt_series, norm_gain, CompensatedSum, SeriesValue};

use crate::domain::radial::{kappa, radial_weight, RadialProfile};
use crate::error::{LabError, Result};

/// Relative agreement required between the direct and integrated-by-parts
/// radial energies.
pub const ENERGY_CROSSCHECK_TOL: f64 = 1e-8;

/// Normalisation of `(dd^c u)ⁿ = κ_n det(u_{ij̄}) dμ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConventionConstants {
    pub n: usize,
    pub kappa_n: f64,
}

impl ConventionConstants {
    pub fn new(n: usize) -> Self {
        Self { n, kappa_n: kappa(n) }
    }
}

/// `∫(-u) det(u_{ij̄}) dμ`, the κ-free pairing used by the flows.
pub fn raw_pairing<P: Potential>(u: &P) -> Result<f64> {
    let det = u.raw_det()?;
    let vol = u.domain().nodal_volumes();
    Ok(u.values().iter().zip(&det).zip(&vol).map(|((x, d), w)| -x * d * w).sum())
}

/// Monge-Ampère energy `E(u) = (n+1)⁻¹ ∫(-u)(dd^c u)ⁿ`.
///
/// For radial profiles the integrated-by-parts form
/// `κ_n c_n/(n(n+1)) ∫ ρⁿ (v')^{n+1} dρ` is evaluated as well and must
/// agree to [`ENERGY_CROSSCHECK_TOL`].
pub fn ma_energy<P: Potential + EnergyCrossCheck>(u: &P) -> Result<f64> {
    u.check_admissible()?;
    let n = u.dim();
    let direct = kappa(n) * raw_pairing(u)? / (n as f64 + 1.0);
    if let Some(alt) = u.energy_by_parts() {
        if (direct - alt).abs() > ENERGY_CROSSCHECK_TOL * direct.abs().max(f64::MIN_POSITIVE) {
            return Err(LabError::Inadmissible(format!(
                "energy quadratures disagree: direct {direct:e}, by parts {alt:e}"
            )));
        }
    }
    Ok(direct)
}

/// Optional second energy quadrature.
pub trait EnergyCrossCheck {
    fn energy_by_parts(&self) -> Option<f64> {
        None
    }
}

impl EnergyCrossCheck for crate::domain::planar::GridField {}

impl EnergyCrossCheck for RadialProfile {
    fn energy_by_parts(&self) -> Option<f64> {
        Some(energy_by_parts(self))
    }
}

/// `κ_n c_n/(n(n+1)) ∫ ρⁿ (v')^{n+1} dρ`, midpoint rule on the cells.
pub fn energy_by_parts(u: &RadialProfile) -> f64 {
    let n = u.n();
    let rho = u.ball().rho();
    let mid = u.ball().midpoints();
    let s: f64 = u
        .slopes()
        .iter()
        .zip(&mid)
        .zip(rho.windows(2))
        .map(|((d, r), w)| r.powi(n as i32) * d.powi(n as i32 + 1) * (w[1] - w[0]))
        .sum();
    kappa(n) * radial_weight(n) * s / (n as f64 * (n as f64 + 1.0))
}

/// `‖u‖ = E(u)^{1/(n+1)}`.
pub fn psh_seminorm<P: Potential + EnergyCrossCheck>(u: &P) -> Result<f64> {
    Ok(ma_energy(u)?.powf(1.0 / (u.dim() as f64 + 1.0)))
}

/// Monge-Ampère mass `M(u) = ∫ κ_n det(u_{ij̄}) dμ`.
pub fn ma_mass<P: Potential>(u: &P) -> Result<f64> {
    u.check_admissible()?;
    let det = u.raw_det()?;
    let vol = u.domain().nodal_volumes();
    Ok(kappa(u.dim()) * det.iter().zip(&vol).map(|(d, w)| d * w).sum::<f64>())
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(LabError::Parameter(format!("exponent must be positive, got {p}")));
    }
    Ok(())
}

/// `(∫|u|^p dμ)^{1/p}`.
pub fn lp_norm<P: Potential>(u: &P, p: f64) -> Result<f64> {
    check_p(p)?;
    Ok(lp_norm_values(u.values(), &u.domain().quadrature_weights(), p))
}

pub(crate) fn lp_norm_values(values: &[f64], weights: &[f64], p: f64) -> f64 {
    let s: f64 = values.iter().zip(weights).map(|(x, w)| w * x.abs().powf(p)).sum();
    s.powf(1.0 / p)
}

/// `ln ∫ exp(α (-u/‖u‖)^θ) dμ`.
pub fn log_mt_integral<P: Potential + EnergyCrossCheck>(u: &P, alpha: f64, theta: f64) -> Result<f64> {
    if !(alpha > 0.0) || !(theta > 0.0) {
        return Err(LabError::Parameter(format!("alpha and theta must be positive, got {alpha}, {theta}")));
    }
    let norm = psh_seminorm(u)?;
    if !(norm > 0.0) {
        return Err(LabError::Degenerate("Moser-Trudinger integral of a zero-energy potential".into()));
    }
    let exponent: Vec<f64> = u.values().iter().map(|x| alpha * (-x / norm).max(0.0).powf(theta)).collect();
    Ok(log_integral_exp(&u.domain().quadrature_weights(), &exponent))
}

/// `∫ exp(α (-u/‖u‖)^θ) dμ`; `θ = (n+1)/n` is the strong form, `θ = 1`
/// the weak one.
pub fn mt_integral<P: Potential + EnergyCrossCheck>(u: &P, alpha: f64, theta: f64) -> Result<f64> {
    Ok(log_mt_integral(u, alpha, theta)?.exp())
}

/// `ln Σ wᵢ exp(aᵢ)` over positive weights.
pub fn log_integral_exp(weights: &[f64], exponent: &[f64]) -> f64 {
    let terms: Vec<f64> = weights.iter().zip(exponent).filter(|(w, _)| **w > 0.0).map(|(w, a)| w.ln() + a).collect();
    crate::domain::radial::log_sum_exp(&terms)
}

/// `E(u) / ‖u‖_{L^{p+1}}^{n+1}` for one candidate.
pub fn sobolev_ratio<P: Potential + EnergyCrossCheck>(u: &P, p: f64) -> Result<f64> {
    check_p(p)?;
    let n = u.dim() as f64;
    let e = ma_energy(u)?;
    let l = lp_norm(u, p + 1.0)?;
    if !(l > 0.0) {
        return Err(LabError::Degenerate("Sobolev ratio of the zero potential".into()));
    }
    Ok(e / l.powf(n + 1.0))
}

/// Parameters of the cut-off Sobolev functional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SobolevParams {
    pub lambda: f64,
    pub p: f64,
    /// Cut-off level `M > 1`.
    pub cap: f64,
    /// Non-degeneracy shift `δ ≥ 0`.
    pub delta: f64,
}

impl SobolevParams {
    pub fn validate(&self) -> Result<()> {
        check_p(self.p)?;
        if !(self.cap > 1.0) {
            return Err(LabError::Parameter(format!("cut-off M must exceed 1, got {}", self.cap)));
        }
        if !(self.delta >= 0.0) {
            return Err(LabError::Parameter(format!("delta must be >= 0, got {}", self.delta)));
        }
        if !(self.lambda >= 0.0) {
            return Err(LabError::Parameter(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        Ok(())
    }

    /// `f_δ(t) = f(t) + δ`.
    pub fn f_delta(&self, t: f64) -> f64 {
        cutoff_f(t, self.cap, self.p) + self.delta
    }

    /// `F_δ(s) = ∫₀^{|s|} f_δ`.
    pub fn big_f_delta(&self, s: f64) -> f64 {
        cutoff_antiderivative(s, self.cap, self.p) + self.delta * s.abs()
    }
}

/// Value of `J_δ` together with `β_δ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JDelta {
    pub value: f64,
    pub beta: f64,
    /// `(p+1) ∫ F_δ(u) dμ`.
    pub mass_term: f64,
}

/// `J_δ(u) = ∫(-u) det dμ - λ[(p+1)∫F_δ(u)dμ]^{(n+1)/(p+1)}` and
/// `β_δ(u) = [(p+1)∫F_δ(u)dμ]^{(n-p)/(p+1)}` (raw determinant).
pub fn j_delta<P: Potential>(u: &P, params: &SobolevParams) -> Result<JDelta> {
    params.validate()?;
    let pairing = raw_pairing(u)?;
    Ok(j_delta_from_pairing(u, params, pairing))
}

pub(crate) fn j_delta_from_pairing<P: Potential>(u: &P, params: &SobolevParams, pairing: f64) -> JDelta {
    let n = u.dim() as f64;
    let p = params.p;
    let vol = u.domain().nodal_volumes();
    let big: f64 = u.values().iter().zip(&vol).map(|(x, w)| w * params.big_f_delta(*x)).sum();
    let mass_term = (p + 1.0) * big;
    let value = pairing - params.lambda * mass_term.powf((n + 1.0) / (p + 1.0));
    let beta = mass_term.powf((n - p) / (p + 1.0));
    JDelta { value, beta, mass_term }
}

/// `E_Ψ(u) = ∫(-u)Ψ dμ - λ[∫|u|^{p+1}dμ]^{(n+1)/(p+1)}` on raw nodal
/// values; the argument need not be plurisubharmonic.
pub fn e_psi_values<M: Measure>(values: &[f64], psi: &[f64], domain: &M, lambda: f64, p: f64) -> Result<f64> {
    check_p(p)?;
    let m = domain.nodes();
    for len in [values.len(), psi.len()] {
        if len != m {
            return Err(LabError::ShapeMismatch { expected: m, got: len });
        }
    }
    let n = domain.dim() as f64;
    let vol = domain.nodal_volumes();
    let lin: f64 = values.iter().zip(psi).zip(&vol).map(|((x, s), w)| -x * s * w).sum();
    let pow: f64 = values.iter().zip(&vol).map(|(x, w)| w * x.abs().powf(p + 1.0)).sum();
    Ok(lin - lambda * pow.powf((n + 1.0) / (p + 1.0)))
}

pub fn e_psi<P: Potential>(u: &P, psi: &[f64], lambda: f64, p: f64) -> Result<f64> {
    e_psi_values(u.values(), psi, u.domain(), lambda, p)
}

/// `t ↦ E_Ψ(u₁ + t(u₂ - u₁))`.
pub fn e_psi_path<'a, M: Measure>(
    u1: &'a [f64],
    u2: &'a [f64],
    psi: &'a [f64],
    domain: &'a M,
    lambda: f64,
    p: f64,
) -> impl Fn(f64) -> Result<f64> + 'a {
    move |t| {
        let v: Vec<f64> = u1.iter().zip(u2).map(|(a, b)| a + t * (b - a)).collect();
        e_psi_values(&v, psi, domain, lambda, p)
    }
}

/// Parameters of the truncated Moser-Trudinger functional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MtParams {
    pub m: usize,
    pub alpha: f64,
    pub delta: f64,
}

impl MtParams {
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.m < n {
            return Err(LabError::Parameter(format!("truncation order m={} below n={n}", self.m)));
        }
        if !(self.alpha > 0.0) || !(self.delta >= 0.0) {
            return Err(LabError::Parameter("alpha must be > 0 and delta >= 0".into()));
        }
        Ok(())
    }
}

/// The normalised argument `-u/η(‖u‖)` at each node, and `‖u‖`.
pub fn mt_argument<P: Potential + EnergyCrossCheck>(u: &P) -> Result<(Vec<f64>, f64)> {
    let norm = psh_seminorm(u)?;
    if !(norm > 0.0) {
        return Err(LabError::Degenerate("zero-energy potential".into()));
    }
    let e = eta(norm);
    Ok((u.values().iter().map(|x| (-x / e).max(0.0)).collect(), norm))
}

/// `𝓕_{m,δ,η}(u) = ∫ F_m^δ(-u/η(‖u‖)) dμ`.
pub fn mt_functional<P: Potential + EnergyCrossCheck>(u: &P, params: &MtParams) -> Result<f64> {
    params.validate(u.dim())?;
    let (arg, _) = mt_argument(u)?;
    let vol = u.domain().nodal_volumes();
    let mut acc = CompensatedSum::default();
    for (t, w) in arg.iter().zip(&vol) {
        acc.add(w * mt_series(*t, params.m, u.dim(), params.alpha, params.delta)?.big_f);
    }
    Ok(acc.value())
}

/// `λ = (n+1) E_det(u) / ∫(-u) f_m^δ(-u/η(‖u‖)) dμ` with the κ-free
/// energy `E_det = (n+1)⁻¹∫(-u) det dμ`.
pub fn lambda_mt<P: Potential + EnergyCrossCheck>(u: &P, params: &MtParams) -> Result<f64> {
    params.validate(u.dim())?;
    let (arg, _) = mt_argument(u)?;
    let vol = u.domain().nodal_volumes();
    let mut den = CompensatedSum::default();
    for ((t, x), w) in arg.iter().zip(u.values()).zip(&vol) {
        den.add(-x * w * mt_series(*t, params.m, u.dim(), params.alpha, params.delta)?.small_f);
    }
    let den = den.value();
    if !(den > 0.0) {
        return Err(LabError::Degenerate("vanishing denominator in lambda".into()));
    }
    Ok(raw_pairing(u)? / den)
}

/// `A_f = ∫|f| (log(1+|f|))^q dμ` against explicit quadrature weights.
pub fn lorentz_zygmund_norm(f: &[f64], weights: &[f64], q: f64) -> Result<f64> {
    if !(q > 0.0) {
        return Err(LabError::Parameter(format!("q must be positive, got {q}")));
    }
    if f.len() != weights.len() {
        return Err(LabError::ShapeMismatch { expected: weights.len(), got: f.len() });
    }
    Ok(f.iter().zip(weights).map(|(x, w)| w * x.abs() * x.abs().ln_1p().powf(q)).sum())
}

/// Named functionals of one potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalReport {
    pub energy: f64,
    pub seminorm: f64,
    pub mass: f64,
    pub lp_norms: BTreeMap<String, f64>,
    pub convention: ConventionConstants,
    pub grid_resolution: usize,
}

/// One serialized entry of a [`FunctionalReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalEntry {
    pub name: String,
    pub value: f64,
    pub n: usize,
    pub kappa: f64,
    pub grid_resolution: usize,
}

impl FunctionalReport {
    pub fn evaluate<P: Potential + EnergyCrossCheck>(u: &P, ps: &[f64]) -> Result<Self> {
        let energy = ma_energy(u)?;
        let mut lp_norms = BTreeMap::new();
        for &p in ps {
            lp_norms.insert(format!("L{p}"), lp_norm(u, p)?);
        }
        Ok(Self {
            energy,
            seminorm: energy.powf(1.0 / (u.dim() as f64 + 1.0)),
            mass: ma_mass(u)?,
            lp_norms,
            convention: ConventionConstants::new(u.dim()),
            grid_resolution: u.resolution(),
        })
    }

    pub fn entries(&self) -> Vec<FunctionalEntry> {
        let mut named = vec![
            ("energy".to_string(), self.energy),
            ("seminorm".to_string(), self.seminorm),
            ("mass".to_string(), self.mass),
        ];
        named.extend(self.lp_norms.iter().map(|(k, v)| (k.clone(), *v)));
        named
            .into_iter()
            .map(|(name, value)| FunctionalEntry {
                name,
                value,
                n: self.convention.n,
                kappa: self.convention.kappa_n,
                grid_resolution: self.grid_resolution,
            })
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.entries())?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::planar::{GridField, PlanarGrid};
    use crate::domain::radial::RadialBall;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn quadratic(n: usize, nodes: usize) -> RadialProfile {
        let ball = Arc::new(RadialBall::uniform(n, 1.0, nodes).unwrap());
        RadialProfile::from_fn(ball, |r| r - 1.0).unwrap()
    }

    #[test]
    fn energy_of_quadratic() {
        // exact: the dual-shell quadrature pairs (1-ρ) with ρ^{n-1} and
        // the flux form integrates ρⁿ exactly on cells
        let e1 = ma_energy(&quadratic(1, 2001)).unwrap();
        assert!((e1 - PI).abs() < 1e-6 * PI, "{e1}");
        let e2 = ma_energy(&quadratic(2, 2001)).unwrap();
        assert!((e2 - 16.0 * PI * PI / 9.0).abs() < 1e-6 * e2, "{e2}");
        assert!((psh_seminorm(&quadratic(1, 2001)).unwrap() - PI.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn zero_potential() {
        let ball = Arc::new(RadialBall::uniform(2, 1.0, 33).unwrap());
        let z = RadialProfile::zero(ball);
        assert_eq!(ma_energy(&z).unwrap(), 0.0);
        assert_eq!(psh_seminorm(&z).unwrap(), 0.0);
        assert_eq!(lp_norm(&z, 2.0).unwrap(), 0.0);
        assert!(matches!(mt_integral(&z, 1.0, 1.0), Err(LabError::Degenerate(_))));
        assert!(matches!(sobolev_ratio(&z, 1.0), Err(LabError::Degenerate(_))));
    }

    #[test]
    fn mass_of_quadratic() {
        assert!((ma_mass(&quadratic(1, 101)).unwrap() - 4.0 * PI).abs() < 1e-12);
        assert!((ma_mass(&quadratic(2, 101)).unwrap() - 16.0 * PI * PI).abs() < 1e-10);
    }

    #[test]
    fn homogeneity_of_seminorm() {
        let u = quadratic(2, 257);
        let a = psh_seminorm(&u).unwrap();
        let b = psh_seminorm(&u.scaled(2.0)).unwrap();
        assert!((b - 2.0 * a).abs() < 1e-12 * b);
    }

    #[test]
    fn lp_norms_of_quadratic() {
        let u = quadratic(1, 4001);
        assert!((lp_norm(&u, 2.0).unwrap() - (PI / 3.0).sqrt()).abs() < 1e-6);
        assert!((lp_norm(&u, 1.0).unwrap() - PI / 2.0).abs() < 1e-6);
        assert!(matches!(lp_norm(&u, 0.0), Err(LabError::Parameter(_))));
    }

    #[test]
    fn sobolev_ratio_of_quadratic() {
        let u = quadratic(1, 4001);
        let r = sobolev_ratio(&u, 1.0).unwrap();
        assert!((r - 3.0).abs() < 1e-5, "{r}");
        let r3 = sobolev_ratio(&u.scaled(3.7), 1.0).unwrap();
        assert!((r - r3).abs() < 1e-12 * r);
    }

    #[test]
    fn mt_integral_scale_invariant_and_small_alpha() {
        let u = quadratic(1, 1001);
        let a = mt_integral(&u, 1.0, 2.0).unwrap();
        let b = mt_integral(&u.scaled(3.0), 1.0, 2.0).unwrap();
        assert!((a - b).abs() < 1e-12 * a);
        let tiny = mt_integral(&u, 1e-12, 2.0).unwrap();
        assert!((tiny - PI).abs() < 1e-10);
    }

    #[test]
    fn j_delta_cases() {
        let u = quadratic(1, 2001);
        let params = SobolevParams { lambda: 0.0, p: 2.0, cap: 5.0, delta: 0.0 };
        let j = j_delta(&u, &params).unwrap();
        assert!((j.value - PI / 2.0).abs() < 1e-6);
        // below the cut-off with δ = 0: F(u) = |u|^{p+1}/(p+1)
        let params = SobolevParams { lambda: 0.7, p: 2.0, cap: 5.0, delta: 0.0 };
        let j = j_delta(&u, &params).unwrap();
        let vol = u.ball().dual_volumes();
        let l3: f64 = u.values().iter().zip(&vol).map(|(x, w)| w * x.abs().powi(3)).sum();
        let expected = raw_pairing(&u).unwrap() - 0.7 * l3.powf(2.0 / 3.0);
        assert!((j.value - expected).abs() < 1e-12);
        let z = RadialProfile::zero(u.ball().clone());
        assert_eq!(j_delta(&z, &params).unwrap().value, 0.0);
        let bad = SobolevParams { cap: 1.0, ..params };
        assert!(j_delta(&u, &bad).is_err());
        let bad = SobolevParams { delta: -1.0, ..params };
        assert!(j_delta(&u, &bad).is_err());
    }

    #[test]
    fn e_psi_cases() {
        let u = quadratic(1, 2001);
        let psi = vec![1.0; u.ball().len()];
        assert!((e_psi(&u, &psi, 0.0, 2.0).unwrap() - PI / 2.0).abs() < 1e-6);
        let z = RadialProfile::zero(u.ball().clone());
        assert_eq!(e_psi(&z, &psi, 1.0, 2.0).unwrap(), 0.0);
        assert!(matches!(e_psi(&u, &psi[1..], 1.0, 2.0), Err(LabError::ShapeMismatch { .. })));
    }

    #[test]
    fn lorentz_zygmund_cases() {
        // a disc of unit area
        let ball = RadialBall::uniform(1, 1.0 / PI.sqrt(), 101).unwrap();
        let w = ball.trapezoid_weights();
        let f = vec![std::f64::consts::E - 1.0; w.len()];
        let a = lorentz_zygmund_norm(&f, &w, 2.0).unwrap();
        assert!((a - (std::f64::consts::E - 1.0)).abs() < 1e-12);
        assert_eq!(lorentz_zygmund_norm(&vec![0.0; w.len()], &w, 1.0).unwrap(), 0.0);
        let small_q = lorentz_zygmund_norm(&vec![3.0; w.len()], &w, 1e-12).unwrap();
        assert!((small_q - 3.0).abs() < 1e-9);
    }

    #[test]
    fn planar_energy_of_paraboloid() {
        let grid = Arc::new(PlanarGrid::disc(0.0, 0.0, 1.0, 200).unwrap());
        let u = GridField::potential_from_fn(grid, |x, y| x * x + y * y - 1.0).unwrap();
        // E = ½∫(-u)Δu = 2∫(1-|z|²) = π
        let e = ma_energy(&u).unwrap();
        assert!((e - PI).abs() < 0.02, "{e}");
    }

    #[test]
    fn report_json_fields() {
        let u = quadratic(1, 65);
        let r = FunctionalReport::evaluate(&u, &[2.0]).unwrap();
        let json: serde_json::Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        let first = &json[0];
        for key in ["name", "value", "n", "kappa", "grid_resolution"] {
            assert!(first.get(key).is_some(), "missing {key}");
        }
        assert_eq!(json.as_array().unwrap().len(), 4);
    }
}
