//! Radial test families.
//!
//! Profiles are generated from `g = ρV' = dV/d(ln ρ)`, which must be
//! non-decreasing in `ρ` (the flux is `W = gⁿ`): nodal values are
//! integrated cell by cell with Gauss-Legendre quadrature in `ln ρ` and
//! then mapped into the discrete admissible cone, which only removes
//! round-off level violations.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::domain::radial::{ball_volume, kappa, log_sum_exp, radial_weight, RadialBall, RadialProfile};
use crate::error::{LabError, Result};
use crate::functionals::lorentz_zygmund_norm;
use crate::radial_solver::project_values;

const GL8_X: [f64; 4] =
    [0.183_434_642_495_649_8, 0.525_532_409_916_329, 0.796_666_477_413_626_7, 0.960_289_856_497_536_3];
const GL8_W: [f64; 4] =
    [0.362_683_783_378_362, 0.313_706_645_877_887_3, 0.222_381_034_453_374_5, 0.101_228_536_290_376_3];

/// `∫_a^b g` by 8-point Gauss-Legendre.
pub(crate) fn gauss8(a: f64, b: f64, g: impl Fn(f64) -> f64) -> f64 {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    let mut s = 0.0;
    for (x, w) in GL8_X.iter().zip(GL8_W) {
        s += w * (g(c - h * x) + g(c + h * x));
    }
    s * h
}

/// `C²` smoothstep `x³(10 - 15x + 6x²)` clamped to `[0, 1]`.
pub fn smoothstep(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * x * (10.0 + x * (-15.0 + 6.0 * x))
}

/// `∫₀¹ smoothstep^a`, composite Gauss-Legendre on 64 panels.
pub fn smoothstep_moment(a: f64) -> f64 {
    let panels = 64;
    (0..panels)
        .map(|k| {
            let (x0, x1) = (k as f64 / panels as f64, (k + 1) as f64 / panels as f64);
            gauss8(x0, x1, |x| smoothstep(x).powf(a))
        })
        .sum()
}

/// Admissible profile with `dV/d(ln ρ) = g(ln ρ)` and `V(R²) = 0`. The
/// first cell `[0, ρ₁]` must lie where `g` vanishes.
pub fn profile_from_log_slope(ball: Arc<RadialBall>, g: impl Fn(f64) -> f64) -> Result<RadialProfile> {
    let rho = ball.rho();
    let m = rho.len();
    let mut v = vec![0.0; m];
    for i in (1..m - 1).rev() {
        v[i] = v[i + 1] - gauss8(rho[i].ln(), rho[i + 1].ln(), &g);
    }
    v[0] = v[1];
    project_values(&ball, v)
}

/// Graded grid resolving `[ρ_min, R²]` geometrically with ratio `growth`.
pub fn log_resolved_ball(n: usize, radius: f64, rho_min: f64, growth: f64) -> Result<Arc<RadialBall>> {
    let r2 = radius * radius;
    if !(rho_min > 0.0 && rho_min < r2) || !(growth > 1.0) {
        return Err(LabError::Parameter(format!("bad grid request rho_min={rho_min:e}, growth={growth}")));
    }
    let first = rho_min * (growth - 1.0);
    let nodes = ((r2 / first).ln() / growth.ln()).ceil() as usize + 16;
    Ok(Arc::new(RadialBall::graded(n, radius, nodes, first, growth)?))
}

/// `u ≈ c log|z|` on `B_R`, flattened below `|z| = Re^{-L}` over a
/// transition of width `w` in `ln|z|²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogCuspFamily {
    pub n: usize,
    pub radius: f64,
    /// Slope `c > 0`.
    pub c: f64,
    /// Cut-off depth `L > 0`.
    pub depth: f64,
    /// Mollification width `w > 0`.
    pub width: f64,
}

/// A generated log-cusp profile with closed-form functionals.
#[derive(Debug, Clone)]
pub struct LogCusp {
    pub family: LogCuspFamily,
    pub profile: RadialProfile,
    /// `(2πc)ⁿ`.
    pub mass: f64,
    pub energy: f64,
    /// `sup(-u)`.
    pub depth: f64,
}

impl LogCuspFamily {
    pub fn new(n: usize, radius: f64, c: f64, depth: f64, width: f64) -> Result<Self> {
        for (name, x) in [("radius", radius), ("c", c), ("L", depth), ("w", width)] {
            if !(x > 0.0) || !x.is_finite() {
                return Err(LabError::Parameter(format!("log-cusp {name} must be positive, got {x}")));
            }
        }
        if n == 0 {
            return Err(LabError::Parameter("n must be >= 1".into()));
        }
        Ok(Self { n, radius, c, depth, width })
    }

    fn effective_width(&self) -> f64 {
        self.width.min(self.depth)
    }

    /// `ln ρ_L = ln R² - 2L`.
    fn log_rho_l(&self) -> f64 {
        (self.radius * self.radius).ln() - 2.0 * self.depth
    }

    /// `dV/d(ln ρ)`.
    pub fn log_slope(&self, x: f64) -> f64 {
        let w = self.effective_width();
        let s = smoothstep((x - (self.log_rho_l() - w)) / w);
        0.5 * self.c * s.powf(1.0 / self.n as f64)
    }

    pub fn closed_mass(&self) -> f64 {
        (2.0 * PI * self.c).powi(self.n as i32)
    }

    /// `κ_n c_n/(n(n+1)) (c/2)^{n+1} (2L + w∫σ^{(n+1)/n})`.
    pub fn closed_energy(&self) -> f64 {
        let n = self.n as f64;
        let span = 2.0 * self.depth + self.effective_width() * smoothstep_moment((n + 1.0) / n);
        kappa(self.n) * radial_weight(self.n) / (n * (n + 1.0)) * (0.5 * self.c).powf(n + 1.0) * span
    }

    /// `cL + (c/2) w ∫σ^{1/n}`.
    pub fn closed_depth(&self) -> f64 {
        self.c * self.depth + 0.5 * self.c * self.effective_width() * smoothstep_moment(1.0 / self.n as f64)
    }

    /// Grid reaching `10⁻³` below the flat core, ratio `growth`.
    pub fn ball(&self, growth: f64) -> Result<Arc<RadialBall>> {
        let rho_min = 1e-3 * (self.log_rho_l() - self.effective_width()).exp();
        log_resolved_ball(self.n, self.radius, rho_min, growth)
    }

    pub fn generate(&self, growth: f64) -> Result<LogCusp> {
        let ball = self.ball(growth)?;
        let profile = profile_from_log_slope(ball, |x| self.log_slope(x))?;
        Ok(LogCusp {
            family: *self,
            profile,
            mass: self.closed_mass(),
            energy: self.closed_energy(),
            depth: self.closed_depth(),
        })
    }
}

/// Builds the log-cusp profile with the default grid ratio `1.03`.
pub fn make_log_cusp(params: &LogCuspFamily) -> Result<LogCusp> {
    params.generate(1.03)
}

/// Truncated log cusp `-u = Kφ(t)`, `t = ln(R²/|z|²)`, `φ' = 1` cut off
/// smoothly over `[T, T+w]`, with `K` chosen so that
/// `A_f = ∫ f (log(1+f))^q dμ = 1` for `f` the density of `(dd^c u)ⁿ`.
/// The Monge-Ampère mass sits near `t = T` where `log f ≈ nT`, so
/// `K ≈ (nT)^{-q/n}/(4π)` and `sup(-u) ≈ KT`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BmqFamily {
    pub n: usize,
    pub radius: f64,
    pub q: f64,
    /// Truncation depth `T` in `t`.
    pub depth: f64,
    pub width: f64,
}

impl BmqFamily {
    pub fn new(n: usize, radius: f64, q: f64, depth: f64, width: f64) -> Result<Self> {
        for (name, x) in [("radius", radius), ("q", q), ("T", depth), ("w", width)] {
            if !(x > 0.0) || !x.is_finite() {
                return Err(LabError::Parameter(format!("family {name} must be positive, got {x}")));
            }
        }
        Ok(Self { n, radius, q, depth, width })
    }

    /// `dV/d(ln ρ) = φ'(t)`.
    pub fn log_slope(&self, x: f64) -> f64 {
        let t = (self.radius * self.radius).ln() - x;
        1.0 - smoothstep((t - self.depth) / self.width)
    }

    /// Unnormalized profile on a grid with ratio `growth`.
    pub fn raw_profile(&self, growth: f64) -> Result<RadialProfile> {
        let rho_min = 1e-3 * (self.radius * self.radius) * (-(self.depth + self.width)).exp();
        let ball = log_resolved_ball(self.n, self.radius, rho_min, growth)?;
        profile_from_log_slope(ball, |x| self.log_slope(x))
    }

    /// Profile scaled to `A_f = 1`, with the scale factor.
    pub fn generate(&self, growth: f64) -> Result<(RadialProfile, f64)> {
        let raw = self.raw_profile(growth)?;
        let s = normalize_orlicz(&raw, self.q)?;
        Ok((raw.scaled(s), s))
    }
}

impl BmqFamily {
    fn unit_slope(&self, s: f64) -> f64 {
        1.0 - smoothstep((s - self.depth) / self.width)
    }

    /// `φ(s)` at `K = 1`.
    fn unit_phi(&self, s: f64) -> f64 {
        if s <= self.depth {
            s
        } else {
            self.depth + gauss8(self.depth, s.min(self.depth + self.width), |x| self.unit_slope(x))
        }
    }

    /// `-dM/ds` at `K = 1`, where `M(s) = (4πKφ'(s))ⁿ` is the mass of
    /// `{t > s}`; it vanishes off `[T, T+w]`.
    fn unit_mass_rate(&self, s: f64) -> f64 {
        let x = ((s - self.depth) / self.width).clamp(0.0, 1.0);
        let d2 = 30.0 * x * x * (1.0 - x) * (1.0 - x) / self.width;
        let n = self.n as i32;
        n as f64 * (4.0 * PI).powi(n) * self.unit_slope(s).powi(n - 1) * d2
    }

    /// `ln(nV_nR^{2n})`: `dμ = nV_nR^{2n} e^{-ns} ds`.
    fn log_measure_scale(&self) -> f64 {
        (self.n as f64 * ball_volume(self.n, self.radius)).ln()
    }

    /// Gauss nodes and weights on `[T, T+w]` with `panels` panels.
    fn transition_nodes(&self, panels: usize) -> Vec<(f64, f64)> {
        let h = self.width / panels as f64;
        let mut out = Vec::with_capacity(8 * panels);
        for k in 0..panels {
            let c = self.depth + (k as f64 + 0.5) * h;
            for (x, w) in GL8_X.iter().zip(GL8_W) {
                out.push((c - 0.5 * h * x, 0.5 * h * w));
                out.push((c + 0.5 * h * x, 0.5 * h * w));
            }
        }
        out
    }

    /// `A_f` of the scaled profile `Kφ`, in the logarithmic variable.
    pub fn log_orlicz_mass(&self, k: f64) -> f64 {
        let n = self.n as f64;
        let shift = n * k.ln() - self.log_measure_scale();
        let mut acc = 0.0;
        for (s, w) in self.transition_nodes(32) {
            let r = self.unit_mass_rate(s);
            if r > 0.0 {
                let log_f = shift + r.ln() + n * s;
                let l1p = if log_f > 30.0 { log_f + (-log_f).exp().ln_1p() } else { log_f.exp().ln_1p() };
                acc += w * r * l1p.powf(self.q);
            }
        }
        k.powf(n) * acc
    }

    /// `K` with `A_f = 1`, from the logarithmic variable.
    pub fn log_scale(&self) -> Result<f64> {
        let (mut lo, mut hi) = (-60.0f64, 60.0f64);
        if !(self.log_orlicz_mass(lo.exp()) < 1.0 && self.log_orlicz_mass(hi.exp()) > 1.0) {
            return Err(LabError::Degenerate("Orlicz normalization failed".into()));
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.log_orlicz_mass(mid.exp()) < 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok((0.5 * (lo + hi)).exp())
    }

    /// `ln∫e^{δ(-u)^β}dμ` for `-u = Kφ`, by Gauss panels of width `h` in
    /// `s`, plus the exact contribution of the flat core `s > T+w`.
    /// Returns the value and the number of quadrature nodes.
    pub fn log_exp_integral(&self, k: f64, delta: f64, beta: f64, h: f64) -> (f64, usize) {
        let n = self.n as f64;
        let base = self.log_measure_scale();
        let g = |s: f64| delta * (k * self.unit_phi(s)).powf(beta) - n * s + base;
        let mut terms = Vec::new();
        let mut push_panels = |a: f64, b: f64| {
            let panels = ((b - a) / h).ceil().max(1.0) as usize;
            let hh = (b - a) / panels as f64;
            for j in 0..panels {
                let c = a + (j as f64 + 0.5) * hh;
                for (x, w) in GL8_X.iter().zip(GL8_W) {
                    let lw = (0.5 * hh * w).ln();
                    terms.push(lw + g(c - 0.5 * hh * x));
                    terms.push(lw + g(c + 0.5 * hh * x));
                }
            }
        };
        push_panels(0.0, self.depth);
        push_panels(self.depth, self.depth + self.width);
        let nodes = terms.len();
        let end = self.depth + self.width;
        // ∫_{end}^∞ nV_nR^{2n}e^{-ns} ds = V_nR^{2n}e^{-n·end}
        terms.push(delta * (k * self.unit_phi(end)).powf(beta) - n * end + base - n.ln());
        (log_sum_exp(&terms), nodes)
    }
}

/// `A_f` of the Monge-Ampère density `f = κ_n det` of `u`.
pub fn orlicz_mass(u: &RadialProfile, q: f64) -> Result<f64> {
    let k = kappa(u.n());
    let f: Vec<f64> = u.det().iter().map(|d| k * d.max(0.0)).collect();
    lorentz_zygmund_norm(&f, &u.ball().trapezoid_weights(), q)
}

/// Scale `s` with `A_f(s·u) = 1`; `A_f` is increasing in `s`.
pub fn normalize_orlicz(u: &RadialProfile, q: f64) -> Result<f64> {
    let a = |s: f64| orlicz_mass(&u.scaled(s), q);
    let (mut lo, mut hi) = (1e-6, 1.0);
    while a(hi)? < 1.0 {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(LabError::Degenerate("Orlicz normalization failed".into()));
        }
    }
    while a(lo)? > 1.0 {
        lo *= 0.5;
    }
    for _ in 0..100 {
        let mid = (lo * hi).sqrt();
        if a(mid)? < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo - 1.0 < 1e-13 {
            break;
        }
    }
    Ok((lo * hi).sqrt())
}

/// `V(ρ) = -Σ μ_k (1 - (ρ/R²)^{a_k})`, a cone of smooth admissible
/// profiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerMixture {
    pub exponents: Vec<f64>,
    pub weights: Vec<f64>,
}

impl PowerMixture {
    pub fn new(exponents: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if exponents.len() != weights.len() || exponents.is_empty() {
            return Err(LabError::Parameter("mixture needs matching non-empty lists".into()));
        }
        if exponents.iter().any(|a| !(*a > 0.0)) || weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(LabError::Parameter("mixture exponents must be > 0, weights >= 0".into()));
        }
        if weights.iter().all(|w| *w == 0.0) {
            return Err(LabError::Parameter("mixture weights all vanish".into()));
        }
        Ok(Self { exponents, weights })
    }

    pub fn value(&self, rho: f64, r2: f64) -> f64 {
        let s = rho / r2;
        -self.exponents.iter().zip(&self.weights).map(|(a, w)| w * (1.0 - s.powf(*a))).sum::<f64>()
    }

    pub fn profile(&self, ball: Arc<RadialBall>) -> Result<RadialProfile> {
        let r2 = ball.radius().powi(2);
        let v = ball.rho().iter().map(|r| self.value(*r, r2)).collect();
        project_values(&ball, v)
    }
}

impl PowerMixture {
    /// One to three terms with exponents in `[0.3, 4]` and weights in
    /// `[0.1, 1]`.
    pub fn random<R: Rng>(rng: &mut R) -> Self {
        let k = rng.gen_range(1..=3);
        let exponents = (0..k).map(|_| rng.gen_range(0.3..4.0)).collect();
        let weights = (0..k).map(|_| rng.gen_range(0.1..1.0)).collect();
        Self { exponents, weights }
    }
}

/// Non-negative planar source `Σ aₖ exp(-|x - cₖ|²/(2σₖ²))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BumpSource {
    pub bumps: Vec<[f64; 4]>,
}

impl BumpSource {
    /// One to four bumps centred in `[x0, x1]×[y0, y1]` with amplitudes
    /// in `[0.1, 10]` and widths in `[0.02, 0.3]` times the box width.
    pub fn random<R: Rng>(rng: &mut R, bounds: (f64, f64, f64, f64)) -> Self {
        let (x0, x1, y0, y1) = bounds;
        let k = rng.gen_range(1..=4);
        let bumps = (0..k)
            .map(|_| {
                [
                    rng.gen_range(x0..x1),
                    rng.gen_range(y0..y1),
                    10f64.powf(rng.gen_range(-1.0..1.0)),
                    (x1 - x0) * rng.gen_range(0.02..0.3),
                ]
            })
            .collect();
        Self { bumps }
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        self.bumps.iter().map(|[cx, cy, a, s]| a * (-((x - cx).powi(2) + (y - cy).powi(2)) / (2.0 * s * s)).exp()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::{ma_energy, ma_mass};

    #[test]
    fn smoothstep_moments() {
        assert!((smoothstep_moment(1.0) - 0.5).abs() < 1e-14);
        assert_eq!(smoothstep(-1.0), 0.0);
        assert_eq!(smoothstep(2.0), 1.0);
    }

    #[test]
    fn log_cusp_matches_closed_forms() {
        for n in 1..=2 {
            let fam = LogCuspFamily::new(n, 1.0, 1.0 / (2.0 * std::f64::consts::PI), 6.0, 1.0).unwrap();
            let cusp = fam.generate(1.01).unwrap();
            let m = ma_mass(&cusp.profile).unwrap();
            let e = ma_energy(&cusp.profile).unwrap();
            assert!((m - 1.0).abs() < 2e-2, "n={n} M={m}");
            assert!((e / cusp.energy - 1.0).abs() < 1e-3, "n={n} E={e} vs {}", cusp.energy);
            // the n-th root of the smoothstep is only C^0 at the core
            assert!((cusp.profile.depth() / cusp.depth - 1.0).abs() < 2e-5);
        }
    }

    #[test]
    fn log_cusp_vanishes_with_depth() {
        let mut last = f64::INFINITY;
        for l in [0.1, 0.01] {
            let fam = LogCuspFamily::new(1, 1.0, 1.0, l, 1.0).unwrap();
            let cusp = fam.generate(1.0 + l / 50.0).unwrap();
            let e = ma_energy(&cusp.profile).unwrap();
            assert!(cusp.profile.depth() <= 1.5 * l);
            assert!((e / cusp.energy - 1.0).abs() < 1e-2, "L={l} E={e} vs {}", cusp.energy);
            assert!(e < 0.2 * last);
            last = e;
        }
    }

    #[test]
    fn bmq_normalized() {
        let fam = BmqFamily::new(2, 1.0, 1.0, 10.0, 1.0).unwrap();
        let (u, _) = fam.generate(1.05).unwrap();
        assert!((orlicz_mass(&u, 1.0).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn mixture_is_admissible() {
        let b = Arc::new(RadialBall::uniform(2, 1.0, 101).unwrap());
        let mix = PowerMixture::new(vec![0.5, 1.0, 3.0], vec![1.0, 0.2, 0.7]).unwrap();
        let u = mix.profile(b).unwrap();
        assert!(u.is_admissible());
        assert!((u.values()[0] + 1.9).abs() < 1e-12);
    }
}
