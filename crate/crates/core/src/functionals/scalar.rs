//! Scalar auxiliary functions: the cut-off nonlinearity of the Sobolev
//! functional, the truncated exponential series of the Moser-Trudinger
//! functional and the normalising map `η`.

use crate::error::{LabError, Result};

/// Cut-off nonlinearity: `|t|^p` for `|t| ≤ M`, `e^{-M} t^{-2}` for
/// `|t| ≥ M + e^{-M}`, linear in between.
pub fn cutoff_f(t: f64, cap: f64, p: f64) -> f64 {
    let s = t.abs();
    let gap_end = cap + (-cap).exp();
    if s <= cap {
        s.powf(p)
    } else if s >= gap_end {
        (-cap).exp() / (s * s)
    } else {
        let a = cap.powf(p);
        let b = (-cap).exp() / (gap_end * gap_end);
        a + (b - a) * (s - cap) / (gap_end - cap)
    }
}

/// `∫₀^{|s|} cutoff_f(t) dt`, piecewise closed form.
pub fn cutoff_antiderivative(s: f64, cap: f64, p: f64) -> f64 {
    let s = s.abs();
    if s <= cap {
        return s.powf(p + 1.0) / (p + 1.0);
    }
    let base = cap.powf(p + 1.0) / (p + 1.0);
    let width = (-cap).exp();
    let gap_end = cap + width;
    let a = cap.powf(p);
    let b = width / (gap_end * gap_end);
    if s < gap_end {
        let x = s - cap;
        return base + a * x + 0.5 * (b - a) * x * x / width;
    }
    base + 0.5 * (a + b) * width + width * (1.0 / gap_end - 1.0 / s)
}

/// `η(t) = e^{t-1}`.
pub fn eta(t: f64) -> f64 {
    (t - 1.0).exp()
}

/// `g(t) = t / η(t) = t e^{1-t}`, maximal at `t = 1`.
pub fn norm_gain(t: f64) -> f64 {
    t * (1.0 - t).exp()
}

/// Value of the truncated series and its derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    /// `F_m^δ(t) = Σ_{j=n}^m αʲ t^{jβ}/j! + δt`.
    pub big_f: f64,
    /// `f_m^δ(t) = β Σ_{j=n}^m αʲ t^{jβ-1}/(j-1)! + δ`.
    pub small_f: f64,
}

/// Neumaier-compensated sum.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Truncated exponential series with `β = (n+1)/n`, for `t ≥ 0`.
///
/// Terms are accumulated with compensated summation; when `α t^β > 700`
/// they are formed in log space so that no intermediate overflows before
/// the final value does.
pub fn mt_series(t: f64, m: usize, n: usize, alpha: f64, delta: f64) -> Result<SeriesValue> {
    if n == 0 || m < n {
        return Err(LabError::Parameter(format!("series needs m >= n >= 1, got m={m}, n={n}")));
    }
    if t < 0.0 || !t.is_finite() {
        return Err(LabError::Parameter(format!("series argument must be finite and >= 0, got {t}")));
    }
    let beta = (n as f64 + 1.0) / n as f64;
    if t == 0.0 {
        return Ok(SeriesValue { big_f: 0.0, small_f: delta });
    }
    let x = alpha * t.powf(beta);
    let (big, small) = if x > 700.0 {
        let lx = x.ln();
        let mut lg = log_factorial(n - 1);
        let mut big_terms = Vec::with_capacity(m - n + 1);
        let mut small_terms = Vec::with_capacity(m - n + 1);
        for j in n..=m {
            // ln(x^j / (j-1)!)
            let l_small = j as f64 * lx - lg;
            lg += (j as f64).ln();
            big_terms.push(l_small - (j as f64).ln());
            small_terms.push(l_small);
        }
        let lb = crate::domain::radial::log_sum_exp(&big_terms);
        let ls = crate::domain::radial::log_sum_exp(&small_terms);
        (lb.exp(), beta * (ls - t.ln()).exp())
    } else {
        // term_j = x^j / j!, small term = j·term_j / t
        let mut term = 1.0;
        for j in 1..=n {
            term *= x / j as f64;
        }
        let mut big = CompensatedSum::default();
        let mut small = CompensatedSum::default();
        for j in n..=m {
            if j > n {
                term *= x / j as f64;
            }
            big.add(term);
            small.add(j as f64 * term);
        }
        (big.value(), beta * small.value() / t)
    };
    Ok(SeriesValue { big_f: big + delta * t, small_f: small + delta })
}

fn log_factorial(k: usize) -> f64 {
    (2..=k).map(|j| (j as f64).ln()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Composite Gauss-Legendre (8 nodes) oracle for the antiderivative.
    fn gauss_integral(f: impl Fn(f64) -> f64, a: f64, b: f64, pieces: usize) -> f64 {
        const X: [f64; 4] = [0.1834346424956498, 0.525532409916329, 0.7966664774136267, 0.9602898564975363];
        const W: [f64; 4] = [0.362683783378362, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763];
        let h = (b - a) / pieces as f64;
        let mut s = 0.0;
        for k in 0..pieces {
            let c = a + (k as f64 + 0.5) * h;
            for (x, w) in X.iter().zip(W) {
                s += w * (f(c - 0.5 * h * x) + f(c + 0.5 * h * x));
            }
        }
        0.5 * h * s
    }

    #[test]
    fn cutoff_branches() {
        assert_eq!(cutoff_f(0.0, 2.0, 3.0), 0.0);
        assert_eq!(cutoff_f(0.5, 1.0, 2.0), 0.25);
        let m: f64 = 2.0;
        let t = m + (-m).exp();
        let expected = (-2.0f64).exp() * (2.0 + (-2.0f64).exp()).powi(-2);
        assert!((cutoff_f(t, m, 2.0) - expected).abs() < 1e-15);
        assert!(cutoff_f(-0.5, 1.0, 2.0) == 0.25);
    }

    #[test]
    fn antiderivative_matches_quadrature() {
        let (m, p): (f64, f64) = (1.5, 2.5);
        let w = (-m).exp();
        for s in [0.3, 1.5, 1.5 + 0.3 * w, 1.5 + w, 4.0, 20.0] {
            // integrate branch by branch so the kinks sit on piece edges
            let mut edges = vec![0.0, s.min(m)];
            if s > m {
                edges.push(s.min(m + w));
            }
            if s > m + w {
                edges.push(s);
            }
            let oracle: f64 = edges.windows(2).map(|e| gauss_integral(|t| cutoff_f(t, m, p), e[0], e[1], 64)).sum();
            let got = cutoff_antiderivative(s, m, p);
            assert!((got - oracle).abs() < 1e-12 * oracle.max(1.0), "s={s}: {got} vs {oracle}");
        }
    }

    #[test]
    fn single_term_series() {
        let v = mt_series(1.0, 1, 1, 1.0, 0.0).unwrap();
        assert!((v.big_f - 1.0).abs() < 1e-15);
        assert!((v.small_f - 2.0).abs() < 1e-15);
    }

    #[test]
    fn series_at_zero() {
        let v = mt_series(0.0, 5, 2, 1.3, 0.25).unwrap();
        assert_eq!(v.big_f, 0.0);
        assert_eq!(v.small_f, 0.25);
    }

    #[test]
    fn series_below_exponential() {
        // n = 2, β = 3/2, t = 2, α = 1: F_m ↑ exp(x) - 1 - x with x = 2^{3/2}
        let x = 2f64.powf(1.5);
        let limit = x.exp() - 1.0 - x;
        let mut prev = 0.0;
        for m in 2..=60 {
            let v = mt_series(2.0, m, 2, 1.0, 0.0).unwrap().big_f;
            assert!(v >= prev && v <= x.exp());
            prev = v;
        }
        assert!((prev - limit).abs() < 1e-12 * limit);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let (n, m, a, d) = (2, 9, 0.7, 0.1);
        let t = 1.7;
        let h = 1e-6;
        let fd =
            (mt_series(t + h, m, n, a, d).unwrap().big_f - mt_series(t - h, m, n, a, d).unwrap().big_f) / (2.0 * h);
        assert!((fd - mt_series(t, m, n, a, d).unwrap().small_f).abs() < 1e-7 * fd);
    }

    #[test]
    fn log_space_branch_agrees() {
        // x just above 700 through both branches at comparable arguments
        let (n, m) = (1, 1200);
        let t_lo = (699.0f64).sqrt();
        let t_hi = (701.0f64).sqrt();
        let lo = mt_series(t_lo, m, n, 1.0, 0.0).unwrap();
        let hi = mt_series(t_hi, m, n, 1.0, 0.0).unwrap();
        let ratio = hi.big_f / lo.big_f;
        assert!((ratio.ln() - 2.0).abs() < 1e-6, "{}", ratio.ln());
    }

    #[test]
    fn bad_order_rejected() {
        assert!(mt_series(1.0, 1, 2, 1.0, 0.0).is_err());
    }

    #[test]
    fn gain_peaks_at_one() {
        assert_eq!(norm_gain(1.0), 1.0);
        assert!(norm_gain(2.0) < 1.0 && norm_gain(0.5) < 1.0);
        assert_eq!(eta(1.0), 1.0);
    }
}
