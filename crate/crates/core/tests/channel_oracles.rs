//! Monte Carlo statistics checked against closed forms of the model.

use authsim::channel::{self, snr_db_to_variance};
use authsim::detectors::{calibrate_llr_threshold, BobModel};
use authsim::montecarlo::attack_pool;
use authsim::rng::StreamKey;
use authsim::stats::{central_chi2_cdf, RateEstimate};
use authsim::{AttackStrategy, SystemParams};

const TRIALS: u64 = 200_000;

fn within(estimate: f64, truth: f64, se: f64) -> bool {
    (estimate - truth).abs() <= 5.0 * se
}

#[test]
fn h0_difference_has_model_variance() {
    let p = SystemParams::uniform(2, 0.8, snr_db_to_variance(15.0), snr_db_to_variance(20.0), 0.1);
    let key = StreamKey::new(11);
    let mut sum = [0.0; 2];
    let mut sum_sq = [0.0; 2];
    for i in 0..TRIALS {
        let mut s = key.trial(i);
        let h = channel::draw_channel(&p, &mut s);
        let reference = channel::setup_estimate(&h, &p, &mut s).unwrap();
        let obs = channel::legit_observation(&h, &p, &mut s).unwrap();
        for n in 0..2 {
            let d = (obs[n] - reference[n]).norm_sqr();
            sum[n] += d;
            sum_sq[n] += d * d;
        }
    }
    // |d|^2 is exponential with mean (1 - alpha)^2 + sigma2_n, since h and
    // the noise are independent.
    let v = p.h0_variance()[0] + (1.0 - 0.8f64).powi(2);
    for n in 0..2 {
        let mean = sum[n] / TRIALS as f64;
        let se = ((sum_sq[n] / TRIALS as f64 - mean * mean) / TRIALS as f64).sqrt();
        assert!(within(mean, v, se), "channel {n}: {mean} vs {v}");
    }
}

#[test]
fn eve_estimate_has_requested_correlation() {
    let p = SystemParams::uniform(1, 1.0, 0.0, 0.0, 0.8);
    let key = StreamKey::new(12);
    let (mut cross, mut ae_pow, mut h_pow) = (0.0, 0.0, 0.0);
    for i in 0..TRIALS {
        let mut s = key.trial(i);
        let h = channel::draw_channel(&p, &mut s);
        let (ae, _) = channel::eve_observations(&h, &p, &mut s).unwrap();
        cross += (ae[0] * h[0].conj()).re;
        ae_pow += ae[0].norm_sqr();
        h_pow += h[0].norm_sqr();
    }
    let rho = cross / (ae_pow * h_pow).sqrt();
    assert!((rho - 0.8).abs() < 0.01, "{rho}");
}

#[test]
fn llr_attack_equals_unit_exponent_with_default_correlations() {
    let p = SystemParams::uniform(3, 1.0, 0.03, 0.01, 0.4);
    let key = StreamKey::new(13);
    for i in 0..100 {
        let mut s = key.trial(i);
        let h = channel::draw_channel(&p, &mut s);
        let (ae, eb) = channel::eve_observations(&h, &p, &mut s).unwrap();
        let a = AttackStrategy::Llr.forge(&ae, &eb, &p).unwrap();
        let b = AttackStrategy::Exponent { x: 1.0 }.forge(&ae, &eb, &p).unwrap();
        assert_eq!(a, b);
    }
}

/// With `alpha = 1` and the LLR attack, each entry of `obs - ref` is
/// `CN(0, 1 - rho^2 + sigma2_i + sigma2_ii)`, so the missed-detection
/// probability is a central chi-square CDF with `2N` degrees of freedom.
fn exact_llr_pmd(p: &SystemParams, theta: f64) -> f64 {
    let s2 = p.sigma2_i + p.sigma2_ii;
    let v = 1.0 - p.rho_ae * p.rho_ae + s2;
    central_chi2_cdf(theta * s2 / v, 2 * p.n_channels as u32)
}

#[test]
fn llr_missed_detection_matches_closed_form() {
    let cases = [
        (4, 0.1, 0.0),
        (1, 0.1, snr_db_to_variance(20.0)),
        (1, 0.8, snr_db_to_variance(20.0)),
        (3, 0.8, snr_db_to_variance(20.0)),
    ];
    for (n, rho, s2ii) in cases {
        let p = SystemParams::uniform(n, 1.0, snr_db_to_variance(15.0), s2ii, rho);
        let theta = calibrate_llr_threshold(1e-4, 0.0, n).unwrap();
        let pool = attack_pool(&p, &BobModel::default(), &AttackStrategy::Llr, TRIALS, StreamKey::new(14), 1).unwrap();
        let md = pool.psi.iter().filter(|&&x| x <= theta).count() as u64;
        let r = RateEstimate::from_counts(md, TRIALS);
        let exact = exact_llr_pmd(&p, theta);
        assert!(
            r.ci_low - 1e-3 <= exact && exact <= r.ci_high + 1e-3,
            "N={n} rho={rho}: simulated {} vs exact {exact}",
            r.estimate
        );
    }
}
