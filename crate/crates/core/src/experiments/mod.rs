//! Scenarios, the Monte Carlo engine that evaluates them, and the registry
//! of named studies.

mod engine;
mod registry;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::attacks::AttackStrategy;
use crate::channel::SystemParams;
use crate::detectors::BobModel;
use crate::error::{Error, Result};
use crate::ocnn::{OcnnVariant, DEFAULT_FOLDS};
use crate::stats::RateEstimate;

pub use engine::{matched_exponent, run_scenario, sweep, train_ocnn, SweepAxis};
pub use registry::{study, Study, STUDY_NAMES};

/// Smallest trial count accepted for either hypothesis.
pub const MIN_TRIALS: u64 = 1_000;

/// How the LLR threshold is set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum LlrCalibration {
    /// Per-trial noncentral chi-square threshold from the trial's `mu`.
    Analytic,
    /// Central chi-square threshold, ignoring `mu`.
    Central,
    /// Empirical quantile of `Psi` on an H0 pilot pool.
    MonteCarlo,
    /// Analytic when every `alpha` is one; otherwise analytic if it meets
    /// the target within a factor of two on the pilot pool, Monte Carlo if not.
    #[default]
    Auto,
}

impl fmt::Display for LlrCalibration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LlrCalibration::Analytic => "analytic",
            LlrCalibration::Central => "central",
            LlrCalibration::MonteCarlo => "montecarlo",
            LlrCalibration::Auto => "auto",
        })
    }
}

impl FromStr for LlrCalibration {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(LlrCalibration::Analytic),
            "central" => Ok(LlrCalibration::Central),
            "montecarlo" | "mc" => Ok(LlrCalibration::MonteCarlo),
            "auto" => Ok(LlrCalibration::Auto),
            other => Err(Error::param("calibration", format!("unknown mode `{other}`"))),
        }
    }
}

/// Bob's detector, before calibration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DetectorSpec {
    Llr { calibration: LlrCalibration },
    /// Joint `(theta, epsilon)` chosen by Monte Carlo search.
    Combined,
    Ocnn { variant: OcnnVariant },
}

impl DetectorSpec {
    pub fn llr() -> Self {
        DetectorSpec::Llr {
            calibration: LlrCalibration::Auto,
        }
    }
}

impl fmt::Display for DetectorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DetectorSpec::Llr { .. } => f.write_str("LLR"),
            DetectorSpec::Combined => f.write_str("comb"),
            DetectorSpec::Ocnn { variant } => write!(f, "{variant}"),
        }
    }
}

impl FromStr for DetectorSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "llr" => Ok(DetectorSpec::llr()),
            "comb" | "combined" => Ok(DetectorSpec::Combined),
            _ => s
                .parse()
                .map(|variant| DetectorSpec::Ocnn { variant })
                .map_err(|_| Error::param("detector", format!("unknown detector `{s}`"))),
        }
    }
}

/// Eve's strategy, before it is resolved against the detector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AttackSpec {
    /// The attack paired with each detector: the LLR attack for the
    /// LLR test and the classifiers, the optimized exponent attack for the
    /// combined test.
    Matched,
    Fixed(AttackStrategy),
}

impl fmt::Display for AttackSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttackSpec::Matched => f.write_str("matched"),
            AttackSpec::Fixed(a) => write!(f, "{a}"),
        }
    }
}

impl FromStr for AttackSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::param("attack", format!("unknown attack `{s}`"));
        match s {
            "matched" => Ok(AttackSpec::Matched),
            "llr" => Ok(AttackSpec::Fixed(AttackStrategy::Llr)),
            "modulus" => Ok(AttackSpec::Fixed(AttackStrategy::modulus())),
            _ => {
                let x = s.strip_prefix("exponent:").ok_or_else(bad)?;
                let x: f64 = x.parse().map_err(|_| bad())?;
                Ok(AttackSpec::Fixed(AttackStrategy::exponent(x)?))
            }
        }
    }
}

/// What Eve plugs in for `alpha` when choosing her exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum EveKnowledge {
    /// Eve assumes a time-invariant channel.
    #[default]
    AssumesFlat,
    /// Eve searches at the scenario's true `alpha`.
    KnowsAlpha,
}

/// Knobs that rarely change between scenarios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioOptions {
    pub bob: BobModel,
    /// Pool size per hypothesis for threshold searches and pilot calibration.
    pub calibration_trials: u64,
    /// Trials per grid point in the exponent search.
    pub exponent_trials: u64,
    pub grid_step: f64,
    pub eve: EveKnowledge,
    /// Independent channel realizations for the classifiers, each with its
    /// own training set.
    pub realizations: u64,
    pub training_size: usize,
    pub folds: usize,
}

impl Default for ScenarioOptions {
    fn default() -> Self {
        ScenarioOptions {
            bob: BobModel::default(),
            calibration_trials: 1_000_000,
            exponent_trials: 100_000,
            grid_step: 0.1,
            eve: EveKnowledge::default(),
            realizations: 1,
            training_size: 1_000,
            folds: DEFAULT_FOLDS,
        }
    }
}

/// A fully specified Monte Carlo experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub params: SystemParams,
    pub detector: DetectorSpec,
    pub attack: AttackSpec,
    pub target_pfa: f64,
    pub trials_h0: u64,
    pub trials_h1: u64,
    pub seed: u64,
    pub options: ScenarioOptions,
}

/// False-alarm target of the statistical tests.
pub const DEFAULT_TARGET_PFA: f64 = 1e-4;
/// False-alarm target of classifier tuning.
pub const DEFAULT_OCNN_TARGET_PFA: f64 = 1e-3;

impl Scenario {
    /// Matched attack, the detector's default target and full budgets.
    pub fn new(name: impl Into<String>, params: SystemParams, detector: DetectorSpec) -> Self {
        let target_pfa = match detector {
            DetectorSpec::Ocnn { .. } => DEFAULT_OCNN_TARGET_PFA,
            _ => DEFAULT_TARGET_PFA,
        };
        Scenario {
            name: name.into(),
            params,
            detector,
            attack: AttackSpec::Matched,
            target_pfa,
            trials_h0: 10_000_000,
            trials_h1: 1_000_000,
            seed: 1,
            options: ScenarioOptions::default(),
        }
    }

    pub fn with_trials(mut self, trials_h0: u64, trials_h1: u64) -> Self {
        self.trials_h0 = trials_h0;
        self.trials_h1 = trials_h1;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_attack(mut self, attack: AttackSpec) -> Self {
        self.attack = attack;
        self
    }

    pub fn with_target_pfa(mut self, target_pfa: f64) -> Self {
        self.target_pfa = target_pfa;
        self
    }

    pub fn with_options(mut self, options: ScenarioOptions) -> Self {
        self.options = options;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.target_pfa > 0.0 && self.target_pfa < 1.0) {
            return Err(Error::ProbabilityOutOfRange(self.target_pfa));
        }
        for (name, t) in [("trials_h0", self.trials_h0), ("trials_h1", self.trials_h1)] {
            if t < MIN_TRIALS {
                return Err(Error::param(name, format!("{t} is below the minimum of {MIN_TRIALS}")));
            }
        }
        let o = &self.options;
        if o.realizations == 0 {
            return Err(Error::param("realizations", "need at least one"));
        }
        if o.exponent_trials == 0 || o.calibration_trials == 0 {
            return Err(Error::param("calibration_trials", "budgets must be positive"));
        }
        if let DetectorSpec::Ocnn { .. } = self.detector {
            if o.training_size < 10 * o.folds {
                return Err(Error::param(
                    "training_size",
                    format!("{} is too small for {} folds", o.training_size, o.folds),
                ));
            }
        }
        if let AttackSpec::Fixed(a) = self.attack {
            a.validate(&self.params)?;
        }
        Ok(())
    }
}

/// What the engine settled on before evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Calibration {
    /// `theta` is absent when thresholds are set per trial.
    Llr { mode: LlrCalibration, theta: Option<f64> },
    Combined { theta: f64, epsilon: f64 },
    /// `(j, k, theta_d)` per channel realization.
    Ocnn { models: Vec<(usize, usize, f64)> },
}

/// Estimated error rates of one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRates {
    pub scenario: String,
    /// Value of the swept parameter, if any.
    pub axis_value: Option<f64>,
    pub detector: String,
    /// The attack actually applied, e.g. `exponent:0.9`.
    pub attack: String,
    pub pfa: RateEstimate,
    pub pmd: RateEstimate,
    pub calibration: Calibration,
}

impl ErrorRates {
    pub fn trials_h0(&self) -> u64 {
        self.pfa.trials
    }

    pub fn trials_h1(&self) -> u64 {
        self.pmd.trials
    }

    /// Set when either rate saw no events and is reported as `1 / trials`.
    pub fn zero_event(&self) -> bool {
        self.pfa.zero_event || self.pmd.zero_event
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_strings_roundtrip() {
        for d in ["LLR", "comb", "11NN", "1KNN", "J1NN", "JKNN"] {
            assert_eq!(d.parse::<DetectorSpec>().unwrap().to_string(), d);
        }
        assert!("svm".parse::<DetectorSpec>().is_err());
        for a in ["matched", "llr", "exponent:0.6", "exponent:-1"] {
            assert_eq!(a.parse::<AttackSpec>().unwrap().to_string(), a);
        }
        assert!("exponent:1.5".parse::<AttackSpec>().is_err());
        for c in ["analytic", "central", "montecarlo", "auto"] {
            assert_eq!(c.parse::<LlrCalibration>().unwrap().to_string(), c);
        }
    }

    #[test]
    fn scenario_validation() {
        let s = Scenario::new("t", SystemParams::default(), DetectorSpec::llr()).with_trials(1_000, 1_000);
        assert!(s.validate().is_ok());
        assert!(s.clone().with_trials(999, 1_000).validate().is_err());
        assert!(s.clone().with_target_pfa(0.0).validate().is_err());
        let mut o = Scenario::new("o", SystemParams::default(), DetectorSpec::Ocnn { variant: OcnnVariant::OneK });
        assert_eq!(o.target_pfa, DEFAULT_OCNN_TARGET_PFA);
        o.options.training_size = 50;
        assert!(o.validate().is_err());
    }
}
