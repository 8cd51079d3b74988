use num_complex::Complex64;
use proptest::prelude::*;

use authsim::attacks::{exponent_attack, llr_attack};
use authsim::detectors::{decide, llr_statistic, modulus_statistic, CombinedRule, DecisionRule, LlrRule};
use authsim::ocnn::{distance, FeatureVector, OcnnModel, OcnnVariant};
use authsim::stats::{wilson_interval, NoncentralChi2, RateEstimate, Z_95};
use authsim::{AttackStrategy, ComplexVector, Hypothesis, SystemParams};

fn complex() -> impl Strategy<Value = Complex64> {
    (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(r, i)| Complex64::new(r, i))
}

fn vectors(n: usize) -> impl Strategy<Value = ComplexVector> {
    prop::collection::vec(complex(), n).prop_map(|v| ComplexVector::new(v).unwrap())
}

fn pair_with_sigma() -> impl Strategy<Value = (ComplexVector, ComplexVector, Vec<f64>)> {
    (1usize..7).prop_flat_map(|n| (vectors(n), vectors(n), prop::collection::vec(0.01..2.0f64, n)))
}

proptest! {
    #[test]
    fn psi_is_nonnegative_and_zero_on_identity((a, b, s) in pair_with_sigma()) {
        prop_assert!(llr_statistic(&a, &b, &s).unwrap() >= 0.0);
        prop_assert_eq!(llr_statistic(&a, &a, &s).unwrap(), 0.0);
        prop_assert_eq!(modulus_statistic(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn gamma_is_antisymmetric((a, b, _s) in pair_with_sigma()) {
        let ab = modulus_statistic(&a, &b).unwrap();
        let ba = modulus_statistic(&b, &a).unwrap();
        prop_assert!((ab + ba).abs() < 1e-12);
    }

    #[test]
    fn gamma_ignores_phase(
        (a, b, _s) in pair_with_sigma(),
        phases in prop::collection::vec(-3.2..3.2f64, 6),
    ) {
        let rotated: ComplexVector = a.iter().zip(&phases).map(|(z, p)| z * Complex64::from_polar(1.0, *p)).collect();
        let g0 = modulus_statistic(&a, &b).unwrap();
        let g1 = modulus_statistic(&rotated, &b).unwrap();
        prop_assert!((g0 - g1).abs() < 1e-10);
    }

    #[test]
    fn psi_invariant_under_common_rotation((a, b, s) in pair_with_sigma(), phi in -3.2..3.2f64) {
        let r = Complex64::from_polar(1.0, phi);
        let ra: ComplexVector = a.iter().map(|z| z * r).collect();
        let rb: ComplexVector = b.iter().map(|z| z * r).collect();
        let p0 = llr_statistic(&a, &b, &s).unwrap();
        let p1 = llr_statistic(&ra, &rb, &s).unwrap();
        prop_assert!((p0 - p1).abs() <= 1e-10 * p0.max(1.0));
    }

    #[test]
    fn infinite_epsilon_matches_llr_rule(psi in 0.0..100.0f64, gamma in -50.0..50.0f64, theta in 0.01..100.0f64) {
        let llr = DecisionRule::Llr(LlrRule::new(theta, vec![1.0]).unwrap());
        let comb = DecisionRule::Combined(CombinedRule::new(theta, f64::INFINITY, vec![1.0]).unwrap());
        prop_assert_eq!(decide(psi, gamma, &llr), decide(psi, gamma, &comb));
    }

    #[test]
    fn accept_region_grows_with_thresholds(
        psi in 0.0..50.0f64,
        gamma in -10.0..10.0f64,
        theta in 0.01..50.0f64,
        eps in 0.0..10.0f64,
        dt in 0.0..10.0f64,
        de in 0.0..10.0f64,
    ) {
        let small = DecisionRule::Combined(CombinedRule::new(theta, eps, vec![1.0]).unwrap());
        let large = DecisionRule::Combined(CombinedRule::new(theta + dt, eps + de, vec![1.0]).unwrap());
        if decide(psi, gamma, &small) == Hypothesis::H0 {
            prop_assert_eq!(decide(psi, gamma, &large), Hypothesis::H0);
        }
    }

    #[test]
    fn exponent_minus_one_is_modulus_attack(ae in vectors(4), rho in 0.05..1.0f64) {
        let p = SystemParams::uniform(4, 1.0, 0.01, 0.01, rho);
        let g = AttackStrategy::modulus().forge(&ae, &ae, &p).unwrap();
        for (gn, an) in g.iter().zip(ae.iter()) {
            prop_assert!((gn - an / rho).norm() <= 1e-12 * (1.0 + an.norm() / rho));
        }
    }

    #[test]
    fn exponent_attack_shrinks_with_x(ae in vectors(3), rho in 0.05..0.99f64, x in -1.0..0.9f64, dx in 0.01..0.1f64) {
        let lo = exponent_attack(&ae, rho, x).unwrap();
        let hi = exponent_attack(&ae, rho, (x + dx).min(1.0)).unwrap();
        for (l, h) in lo.iter().zip(hi.iter()) {
            prop_assert!(h.norm() <= l.norm() + 1e-12);
        }
    }

    #[test]
    fn llr_attack_is_linear(ae in vectors(3), eb in vectors(3), a in -4.0..4.0f64, rho_eb in 0.0..1.0f64) {
        let mut p = SystemParams::uniform(3, 1.0, 0.01, 0.01, 0.4);
        p.rho_eb = rho_eb;
        p.rho_ab = 0.2;
        p.sigma2_ae = 0.05;
        let g = llr_attack(&ae, &eb, &p).unwrap();
        let ga = llr_attack(&ae.scale(a), &eb.scale(a), &p).unwrap();
        for (x, y) in g.iter().zip(ga.iter()) {
            prop_assert!((x * a - y).norm() < 1e-10);
        }
    }

    #[test]
    fn chi2_cdf_is_monotone_and_inverts(dof in 1u32..13, lambda in 0.0..20.0f64, p in 0.01..0.9999f64) {
        let d = NoncentralChi2::new(dof, lambda).unwrap();
        let x = d.quantile(p).unwrap();
        prop_assert!((d.cdf(x) - p).abs() < 1e-8);
        prop_assert!(d.cdf(x * 0.9) <= d.cdf(x) + 1e-15);
        prop_assert!(d.cdf(x * 1.1) >= d.cdf(x) - 1e-15);
    }

    #[test]
    fn rate_estimate_inside_interval(trials in 1u64..100_000, frac in 0.0..1.0f64) {
        let events = ((trials as f64) * frac) as u64;
        let r = RateEstimate::from_counts(events, trials);
        prop_assert!(r.ci_low <= r.estimate && r.estimate <= r.ci_high);
        let (lo, hi) = wilson_interval(events, trials, Z_95);
        prop_assert!(0.0 <= lo && lo <= hi && hi <= 1.0);
    }
}

/// Straightforward score: full sorts, no caching.
fn brute_force_score(training: &[FeatureVector], x: &FeatureVector, j: usize, k: usize) -> f64 {
    let mut near: Vec<(f64, usize)> = training.iter().enumerate().map(|(i, t)| (distance(x, t).unwrap(), i)).collect();
    near.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let dxy: f64 = near[..j].iter().map(|p| p.0).sum::<f64>() / j as f64;
    let mut dyz = 0.0;
    for &(_, y) in &near[..j] {
        let mut d: Vec<f64> = (0..training.len())
            .filter(|&z| z != y)
            .map(|z| distance(&training[y], &training[z]).unwrap())
            .collect();
        d.sort_by(|a, b| a.total_cmp(b));
        dyz += d[..k].iter().sum::<f64>() / k as f64;
    }
    dyz /= j as f64;
    if dyz == 0.0 {
        if dxy == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        dxy / dyz
    }
}

fn small_training() -> impl Strategy<Value = (Vec<FeatureVector>, FeatureVector, usize, usize)> {
    (3usize..=10, 1usize..=3).prop_flat_map(|(n, half_dim)| {
        let dim = 2 * half_dim;
        let point = prop::collection::vec(-2.0..2.0f64, dim).prop_map(|v| FeatureVector::new(v).unwrap());
        (prop::collection::vec(point.clone(), n), point, 1..n, 1..n)
    })
}

proptest! {
    #[test]
    fn ocnn_matches_brute_force((training, x, j, k) in small_training()) {
        let model = OcnnModel::new(OcnnVariant::JK, j, k, 1.0, training.clone()).unwrap();
        let fast = model.score(&x).unwrap();
        let slow = brute_force_score(&training, &x, j, k);
        prop_assert!((fast - slow).abs() <= 1e-9 * slow.max(1.0) || fast == slow);
    }

    #[test]
    fn ocnn_score_is_isometry_invariant(
        (training, x, j, k) in small_training(),
        phi in -3.2..3.2f64,
        shift in prop::collection::vec(-5.0..5.0f64, 6),
    ) {
        // Rotate every (re, im) pair by the same angle, then translate.
        let (c, s) = (phi.cos(), phi.sin());
        let map = |v: &FeatureVector| {
            let a = v.as_slice();
            let out: Vec<f64> = (0..a.len())
                .map(|i| {
                    let (re, im) = (a[i - i % 2], a[i - i % 2 + 1]);
                    let r = if i % 2 == 0 { c * re - s * im } else { s * re + c * im };
                    r + shift[i]
                })
                .collect();
            FeatureVector::new(out).unwrap()
        };
        let m0 = OcnnModel::new(OcnnVariant::JK, j, k, 1.0, training.clone()).unwrap();
        let m1 = OcnnModel::new(OcnnVariant::JK, j, k, 1.0, training.iter().map(map).collect()).unwrap();
        let s0 = m0.score(&x).unwrap();
        let s1 = m1.score(&map(&x)).unwrap();
        prop_assert!((s0 - s1).abs() <= 1e-7 * s0.max(1.0) || (s0.is_infinite() && s1.is_infinite()));
    }

    #[test]
    fn ocnn_acceptance_monotone_in_threshold((training, x, j, k) in small_training(), t in 0.01..5.0f64, dt in 0.0..5.0f64) {
        let m = OcnnModel::new(OcnnVariant::JK, j, k, t, training).unwrap();
        if m.accepts(&x).unwrap() {
            prop_assert!(m.with_theta_d(t + dt).unwrap().accepts(&x).unwrap());
        }
    }
}
