use std::str::FromStr;

use crate::attacks::{optimize_attack_exponent, AttackStrategy, ExponentSearch};
use crate::channel::{self, snr_db_to_variance};
use crate::detectors::{calibrate_llr_threshold, optimize_thresholds, DecisionRule};
use crate::error::{Error, Result};
use crate::montecarlo::{self, count_trials};
use crate::ocnn::{featurize, tune, OcnnModel, OcnnVariant};
use crate::rng::{tag, StreamKey};
use crate::stats::{NoncentralChi2, RateEstimate};

use super::{AttackSpec, Calibration, DetectorSpec, ErrorRates, EveKnowledge, LlrCalibration, Scenario};

/// Estimate false-alarm and missed-detection rates for `s`.
///
/// H0 trial `i` always draws from the same stream for a given seed, and
/// so does H1 trial `i`, whatever the detector or the number of workers.
pub fn run_scenario(s: &Scenario, workers: usize) -> Result<ErrorRates> {
    run(s, workers).map_err(|e| Error::Scenario {
        name: s.name.clone(),
        source: Box::new(e),
    })
}

fn run(s: &Scenario, workers: usize) -> Result<ErrorRates> {
    if workers == 0 {
        return Err(Error::param("workers", "need at least one worker"));
    }
    s.validate()?;
    match s.detector {
        DetectorSpec::Llr { calibration } => run_llr(s, calibration, workers),
        DetectorSpec::Combined => run_combined(s, workers),
        DetectorSpec::Ocnn { variant } => run_ocnn(s, variant, workers),
    }
}

fn resolve_attack(s: &Scenario, matched: AttackStrategy) -> AttackStrategy {
    match s.attack {
        AttackSpec::Matched => matched,
        AttackSpec::Fixed(a) => a,
    }
}

enum LlrThreshold {
    Fixed(f64),
    PerTrial,
}

/// Threshold such that at most `floor(target * n)` of `psi` exceed it.
fn empirical_threshold(psi: &[f64], target_pfa: f64) -> f64 {
    let mut sorted = psi.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let allowed = ((target_pfa * sorted.len() as f64).floor() as usize).min(sorted.len() - 1);
    sorted[sorted.len() - 1 - allowed]
}

fn run_llr(s: &Scenario, calibration: LlrCalibration, workers: usize) -> Result<ErrorRates> {
    let p = &s.params;
    let bob = s.options.bob;
    let sigma2 = bob.sigma2(p);
    let n = p.n_channels;
    let key = StreamKey::new(s.seed);
    let attack = resolve_attack(s, AttackStrategy::Llr);
    let flat = p.alpha.iter().all(|&a| a == 1.0);
    let dof = 2 * n as u32;

    let pilot = || -> Result<montecarlo::StatPool> {
        let budget = s.options.calibration_trials;
        if s.target_pfa * (budget as f64) < 100.0 {
            return Err(Error::Calibration(format!(
                "pilot pool of {budget} trials gives fewer than 100 expected false alarms"
            )));
        }
        montecarlo::legit_pool(p, &bob, budget, key.child(tag::PILOT), workers)
    };

    let (applied, threshold) = match calibration {
        LlrCalibration::Central => (calibration, LlrThreshold::Fixed(calibrate_llr_threshold(s.target_pfa, 0.0, n)?)),
        LlrCalibration::Analytic if flat => (calibration, LlrThreshold::Fixed(calibrate_llr_threshold(s.target_pfa, 0.0, n)?)),
        LlrCalibration::Analytic => (calibration, LlrThreshold::PerTrial),
        LlrCalibration::MonteCarlo => {
            let pool = pilot()?;
            (calibration, LlrThreshold::Fixed(empirical_threshold(&pool.psi, s.target_pfa)))
        }
        LlrCalibration::Auto if flat => (
            LlrCalibration::Analytic,
            LlrThreshold::Fixed(calibrate_llr_threshold(s.target_pfa, 0.0, n)?),
        ),
        LlrCalibration::Auto => {
            let pool = pilot()?;
            let mut rejected = 0u64;
            for (&psi, &mu) in pool.psi.iter().zip(&pool.mu) {
                rejected += (NoncentralChi2::new(dof, mu)?.cdf(psi) > 1.0 - s.target_pfa) as u64;
            }
            let fa = rejected as f64 / pool.len() as f64;
            if fa >= 0.5 * s.target_pfa && fa <= 2.0 * s.target_pfa {
                (LlrCalibration::Analytic, LlrThreshold::PerTrial)
            } else {
                (LlrCalibration::MonteCarlo, LlrThreshold::Fixed(empirical_threshold(&pool.psi, s.target_pfa)))
            }
        }
    };

    let accept = |psi: f64, mu: f64| -> Result<bool> {
        Ok(match threshold {
            LlrThreshold::Fixed(theta) => psi <= theta,
            LlrThreshold::PerTrial => NoncentralChi2::new(dof, mu)?.cdf(psi) <= 1.0 - s.target_pfa,
        })
    };

    attack.validate(p)?;
    let h0 = key.child(tag::EVAL_H0);
    let h1 = key.child(tag::EVAL_H1);
    let fa = count_trials(s.trials_h0, workers, |i| {
        let t = montecarlo::legit_trial(p, &bob, &sigma2, &mut h0.trial(i))?;
        Ok(!accept(t.psi, t.mu)?)
    })?;
    let md = count_trials(s.trials_h1, workers, |i| {
        let t = montecarlo::attack_trial(p, &bob, &sigma2, &attack, &mut h1.trial(i))?;
        accept(t.psi, t.mu)
    })?;

    Ok(ErrorRates {
        scenario: s.name.clone(),
        axis_value: None,
        detector: s.detector.to_string(),
        attack: attack.to_string(),
        pfa: RateEstimate::from_counts(fa, s.trials_h0),
        pmd: RateEstimate::from_counts(md, s.trials_h1),
        calibration: Calibration::Llr {
            mode: applied,
            theta: match threshold {
                LlrThreshold::Fixed(t) => Some(t),
                LlrThreshold::PerTrial => None,
            },
        },
    })
}

/// Eve's exponent search against the combined rule she expects Bob to
/// use: the one tuned against her `x = 1` attack.
pub fn matched_exponent(s: &Scenario, workers: usize) -> Result<ExponentSearch> {
    let p = &s.params;
    let o = &s.options;
    let key = StreamKey::new(s.seed);
    let eve_params = match o.eve {
        EveKnowledge::AssumesFlat => p.with_alpha(1.0),
        EveKnowledge::KnowsAlpha => p.clone(),
    };
    let eve_rule = optimize_thresholds(
        &eve_params,
        &o.bob,
        s.target_pfa,
        &AttackStrategy::Exponent { x: 1.0 },
        o.calibration_trials,
        key.child(tag::EVE_THRESHOLDS),
        workers,
    )?
    .rule;
    optimize_attack_exponent(
        &eve_params,
        &o.bob,
        &eve_rule,
        o.grid_step,
        o.exponent_trials,
        key.child(tag::EXPONENT_POOL),
        workers,
    )
}

fn run_combined(s: &Scenario, workers: usize) -> Result<ErrorRates> {
    let p = &s.params;
    let o = &s.options;
    let key = StreamKey::new(s.seed);

    let attack = match s.attack {
        AttackSpec::Fixed(a) => a,
        AttackSpec::Matched => AttackStrategy::Exponent {
            x: matched_exponent(s, workers)?.best,
        },
    };

    let optimum = optimize_thresholds(
        p,
        &o.bob,
        s.target_pfa,
        &attack,
        o.calibration_trials,
        key.child(tag::BOB_THRESHOLDS),
        workers,
    )?;
    let rule = DecisionRule::Combined(optimum.rule.clone());
    let sigma2 = o.bob.sigma2(p);
    let h0 = key.child(tag::EVAL_H0);
    let h1 = key.child(tag::EVAL_H1);
    let accept = |psi: f64, gamma: f64| crate::detectors::decide(psi, gamma, &rule) == channel::Hypothesis::H0;
    let fa = count_trials(s.trials_h0, workers, |i| {
        let t = montecarlo::legit_trial(p, &o.bob, &sigma2, &mut h0.trial(i))?;
        Ok(!accept(t.psi, t.gamma))
    })?;
    let md = count_trials(s.trials_h1, workers, |i| {
        let t = montecarlo::attack_trial(p, &o.bob, &sigma2, &attack, &mut h1.trial(i))?;
        Ok(accept(t.psi, t.gamma))
    })?;

    Ok(ErrorRates {
        scenario: s.name.clone(),
        axis_value: None,
        detector: s.detector.to_string(),
        attack: attack.to_string(),
        pfa: RateEstimate::from_counts(fa, s.trials_h0),
        pmd: RateEstimate::from_counts(md, s.trials_h1),
        calibration: Calibration::Combined {
            theta: optimum.rule.theta,
            epsilon: optimum.rule.epsilon,
        },
    })
}

/// Draw channel realization `realization` of `s`, its training set of
/// Phase-I estimates, and tune the scenario's classifier on it.
///
/// Returns the true channel alongside the model.
pub fn train_ocnn(s: &Scenario, realization: u64) -> Result<(crate::stats::ComplexVector, OcnnModel)> {
    let variant = match s.detector {
        DetectorSpec::Ocnn { variant } => variant,
        other => return Err(Error::param("detector", format!("{other} is not a classifier"))),
    };
    s.validate()?;
    let p = &s.params;
    let key = StreamKey::new(s.seed);
    let h = channel::draw_channel(p, &mut key.child(tag::REALIZATION).trial(realization));
    let family = key.child(tag::TRAINING).child(realization);
    let training = (0..s.options.training_size as u64)
        .map(|i| channel::setup_estimate(&h, p, &mut family.trial(i)).map(|e| featurize(&e)))
        .collect::<Result<Vec<_>>>()?;
    let model = tune(training, variant, s.target_pfa, s.options.folds)?;
    Ok((h, model))
}

fn run_ocnn(s: &Scenario, _variant: OcnnVariant, workers: usize) -> Result<ErrorRates> {
    let p = &s.params;
    let key = StreamKey::new(s.seed);
    let attack = resolve_attack(s, AttackStrategy::Llr);
    attack.validate(p)?;
    let trained = (0..s.options.realizations)
        .map(|r| train_ocnn(s, r))
        .collect::<Result<Vec<_>>>()?;
    let realizations = trained.len() as u64;
    let h0 = key.child(tag::EVAL_H0);
    let h1 = key.child(tag::EVAL_H1);

    let fa = count_trials(s.trials_h0, workers, |i| {
        let (h, model) = &trained[(i % realizations) as usize];
        let obs = channel::legit_observation(h, p, &mut h0.trial(i))?;
        Ok(!model.accepts_slice(featurize(&obs).as_slice()))
    })?;
    let md = count_trials(s.trials_h1, workers, |i| {
        let (h, model) = &trained[(i % realizations) as usize];
        let mut stream = h1.trial(i);
        let (ae, eb) = channel::eve_observations(h, p, &mut stream)?;
        let g = attack.forge(&ae, &eb, p)?;
        let obs = channel::forged_observation(&g, p, &mut stream)?;
        Ok(model.accepts_slice(featurize(&obs).as_slice()))
    })?;

    Ok(ErrorRates {
        scenario: s.name.clone(),
        axis_value: None,
        detector: s.detector.to_string(),
        attack: attack.to_string(),
        pfa: RateEstimate::from_counts(fa, s.trials_h0),
        pmd: RateEstimate::from_counts(md, s.trials_h1),
        calibration: Calibration::Ocnn {
            models: trained.iter().map(|(_, m)| (m.j(), m.k(), m.theta_d())).collect(),
        },
    })
}

/// Parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    NChannels,
    Alpha,
    RhoAe,
    TargetPfa,
    /// Setup-phase SNR in dB.
    Snr,
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "n_channels" => Ok(SweepAxis::NChannels),
            "alpha" => Ok(SweepAxis::Alpha),
            "rho_ae" => Ok(SweepAxis::RhoAe),
            "target_pfa" => Ok(SweepAxis::TargetPfa),
            "snr" => Ok(SweepAxis::Snr),
            other => Err(Error::UnknownAxis(other.to_string())),
        }
    }
}

impl SweepAxis {
    /// Copy of `base` with the axis set to `value`.
    pub fn apply(&self, base: &Scenario, value: f64) -> Result<Scenario> {
        let mut s = base.clone();
        match self {
            SweepAxis::NChannels => {
                if !(value >= 1.0 && value.fract() == 0.0) {
                    return Err(Error::param("n_channels", format!("{value} is not a positive integer")));
                }
                s.params = s.params.with_n_channels(value as usize)?;
            }
            SweepAxis::Alpha => s.params = s.params.with_alpha(value),
            SweepAxis::RhoAe => s.params.rho_ae = value,
            SweepAxis::TargetPfa => s.target_pfa = value,
            SweepAxis::Snr => s.params.sigma2_i = snr_db_to_variance(value),
        }
        Ok(s)
    }
}

/// Run `base` once per value of `axis`. Every point reuses the base seed,
/// so the points are compared on common random numbers.
pub fn sweep(base: &Scenario, axis: &str, values: &[f64], workers: usize) -> Result<Vec<ErrorRates>> {
    let axis: SweepAxis = axis.parse()?;
    values
        .iter()
        .map(|&v| {
            let mut rates = run_scenario(&axis.apply(base, v)?, workers)?;
            rates.axis_value = Some(v);
            Ok(rates)
        })
        .collect()
}
