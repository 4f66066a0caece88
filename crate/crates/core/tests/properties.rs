//! Invariants under random inputs.

use std::sync::Arc;

use cma_lab::domain::radial::{RadialBall, RadialProfile};
use cma_lab::functionals::{energy_by_parts, ma_energy, ma_mass, mt_functional, norm_gain, psh_seminorm, MtParams};
use cma_lab::lab::{beta_iteration_schedule, classify_growth, parse_rational, Growth, PowerMixture};
use cma_lab::radial_solver::{isotonic_regression, radial_ma_apply, radial_ma_solve};
use cma_lab::runner::ExperimentConfig;
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

fn mixture() -> impl Strategy<Value = PowerMixture> {
    prop::collection::vec((0.3f64..4.0, 0.1f64..1.0), 1..4).prop_map(|t| {
        let (a, w): (Vec<f64>, Vec<f64>) = t.into_iter().unzip();
        PowerMixture::new(a, w).unwrap()
    })
}

fn ball(n: usize, nodes: usize) -> Arc<RadialBall> {
    Arc::new(RadialBall::uniform(n, 1.0, nodes).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn energy_is_homogeneous(m in mixture(), n in 1usize..=3, t in 0.1f64..10.0) {
        let u = m.profile(ball(n, 128)).unwrap();
        let e = ma_energy(&u).unwrap();
        let et = ma_energy(&u.scaled(t)).unwrap();
        prop_assert!((et / (t.powi(n as i32 + 1) * e) - 1.0).abs() < 1e-12);
        prop_assert!((ma_mass(&u.scaled(t)).unwrap() / (t.powi(n as i32) * ma_mass(&u).unwrap()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn energy_forms_agree(m in mixture(), n in 1usize..=3) {
        let u = m.profile(ball(n, 200)).unwrap();
        let direct = ma_energy(&u).unwrap();
        prop_assert!((direct - energy_by_parts(&u)).abs() <= 1e-8 * direct);
    }

    #[test]
    fn energy_is_dilation_invariant(m in mixture(), n in 1usize..=3, s in 0.2f64..5.0) {
        let b = ball(n, 128);
        let u = m.profile(b.clone()).unwrap();
        let d = RadialProfile::raw(Arc::new(b.dilated(s).unwrap()), u.values().to_vec()).unwrap();
        prop_assert!((ma_energy(&d).unwrap() / ma_energy(&u).unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn solve_inverts_apply(m in mixture(), n in 1usize..=3) {
        let u = m.profile(ball(n, 256)).unwrap();
        let back = radial_ma_solve(&radial_ma_apply(&u).unwrap()).unwrap();
        let err = back.values().iter().zip(u.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(err <= 1e-8 * u.depth());
    }

    #[test]
    fn gain_inequality(m in mixture(), n in 1usize..=2, t in 0.05f64..6.0) {
        let u = m.profile(ball(n, 128)).unwrap();
        let w = u.scaled(1.0 / psh_seminorm(&u).unwrap());
        let p = MtParams { m: n + 2, alpha: 2.0, delta: 0.1 };
        let lhs = mt_functional(&w.scaled(t), &p).unwrap();
        prop_assert!(lhs <= norm_gain(t) * mt_functional(&w, &p).unwrap() * (1.0 + 1e-12));
    }

    #[test]
    fn isotonic_regression_is_monotone_projection(
        y in prop::collection::vec(-10.0f64..10.0, 1..40),
        seed in prop::collection::vec(0.1f64..3.0, 40),
    ) {
        let w = &seed[..y.len()];
        let z = isotonic_regression(&y, w);
        prop_assert_eq!(z.len(), y.len());
        prop_assert!(z.windows(2).all(|p| p[0] <= p[1] + 1e-12));
        // weighted mean is preserved
        let sy: f64 = y.iter().zip(w).map(|(a, b)| a * b).sum();
        let sz: f64 = z.iter().zip(w).map(|(a, b)| a * b).sum();
        prop_assert!((sy - sz).abs() < 1e-9 * (1.0 + sy.abs()));
        // idempotent
        prop_assert_eq!(isotonic_regression(&z, w), z);
    }

    #[test]
    fn beta_schedule_closed_form(num in 0i64..12, den in 1i64..12, n in 1usize..5, k in 0usize..12) {
        let q = BigRational::new(BigInt::from(num), BigInt::from(den));
        let s = beta_iteration_schedule(&q, n, k).unwrap();
        // β_k = Σ_{j≤k} (q/n)^j
        let r = &q / BigRational::from_integer(BigInt::from(n));
        let mut sum = BigRational::from_integer(BigInt::from(0));
        let mut pw = BigRational::from_integer(BigInt::from(1));
        for j in 0..=k {
            sum += &pw;
            prop_assert_eq!(&s.betas[j], &sum);
            pw *= &r;
        }
        prop_assert_eq!(s.diverges, num >= den * n as i64);
    }

    #[test]
    fn rationals_round_trip(num in -1000i64..1000, den in 1i64..1000) {
        let q = BigRational::new(BigInt::from(num), BigInt::from(den));
        prop_assert_eq!(parse_rational(&q.to_string()).unwrap(), q);
    }

    #[test]
    fn geometric_growth_classifies(rate in 1.0f64..5.0, c in -5.0f64..5.0) {
        let diverging: Vec<f64> = (0..6).map(|k| c + rate * k as f64).collect();
        prop_assert_eq!(classify_growth(&diverging), Growth::Diverging);
        let bounded: Vec<f64> = (0..6).map(|k| c - (-(k as f64) * 2.0).exp()).collect();
        prop_assert_eq!(classify_growth(&bounded), Growth::Bounded);
    }

    #[test]
    fn config_set_then_read(p in -1e6f64..1e6, seed in any::<u64>(), dims in prop::collection::vec(1usize..6, 1..4)) {
        let list: Vec<String> = dims.iter().map(|d| d.to_string()).collect();
        let text = format!("experiment = bmq\np = {p:?}\nseed = {seed}\nn = {}\n", list.join(", "));
        let cfg = ExperimentConfig::parse(&text).unwrap();
        prop_assert_eq!(cfg.f64_or("p", 0.0).unwrap(), p);
        prop_assert_eq!(cfg.seed, seed);
        prop_assert_eq!(cfg.n, dims);
    }
}
