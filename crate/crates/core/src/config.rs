//! Line-oriented `key = value` run configuration.
//!
//! `#` starts a comment. Every key may appear once. Parameter keys either
//! build an inline scenario or, when `scenario` names a registered study,
//! select the study entries whose parameters they match.

use std::collections::HashSet;
use std::path::PathBuf;
use std::str::FromStr;

use crate::channel::{snr_db_to_variance, SystemParams};
use crate::detectors::{ReferenceMode, Sigma2Mode};
use crate::error::{Error, Result};
use crate::experiments::{
    study, AttackSpec, DetectorSpec, EveKnowledge, LlrCalibration, Scenario, ScenarioOptions, SweepAxis, MIN_TRIALS,
};
use crate::report::Format;

/// Seed used when neither the configuration nor the environment sets one.
pub const DEFAULT_SEED: u64 = 1;

/// Parameter keys that were set explicitly.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamOverrides {
    pub n_channels: Option<usize>,
    pub alpha: Option<f64>,
    pub sigma2_i: Option<f64>,
    pub sigma2_ii: Option<f64>,
    pub rho_ae: Option<f64>,
    pub rho_eb: Option<f64>,
    pub rho_ab: Option<f64>,
    pub sigma2_ae: Option<f64>,
    pub sigma2_eb: Option<f64>,
}

impl ParamOverrides {
    /// Defaults: one sub-carrier, `alpha = 1`, 15 dB / 20 dB SNRs,
    /// `rho_ae = 0.1`.
    pub fn apply(&self, base: &SystemParams) -> Result<SystemParams> {
        let mut p = match self.n_channels {
            Some(n) => base.with_n_channels(n)?,
            None => base.clone(),
        };
        if let Some(a) = self.alpha {
            p = p.with_alpha(a);
        }
        let set = |dst: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *dst = v;
            }
        };
        set(&mut p.sigma2_i, self.sigma2_i);
        set(&mut p.sigma2_ii, self.sigma2_ii);
        set(&mut p.rho_ae, self.rho_ae);
        set(&mut p.rho_eb, self.rho_eb);
        set(&mut p.rho_ab, self.rho_ab);
        set(&mut p.sigma2_ae, self.sigma2_ae);
        set(&mut p.sigma2_eb, self.sigma2_eb);
        p.validate()?;
        Ok(p)
    }

    fn matches(&self, p: &SystemParams) -> bool {
        let eq = |v: Option<f64>, x: f64| v.is_none_or(|v| v == x);
        self.n_channels.is_none_or(|n| n == p.n_channels)
            && self.alpha.is_none_or(|a| p.alpha.iter().all(|x| *x == a))
            && eq(self.sigma2_i, p.sigma2_i)
            && eq(self.sigma2_ii, p.sigma2_ii)
            && eq(self.rho_ae, p.rho_ae)
            && eq(self.rho_eb, p.rho_eb)
            && eq(self.rho_ab, p.rho_ab)
            && eq(self.sigma2_ae, p.sigma2_ae)
            && eq(self.sigma2_eb, p.sigma2_eb)
    }
}

/// A validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Registered study to run.
    pub scenario: Option<String>,
    /// Name of an inline scenario.
    pub name: String,
    pub params: ParamOverrides,
    pub detector: Option<DetectorSpec>,
    pub attack: Option<AttackSpec>,
    pub target_pfa: Option<f64>,
    pub seed: Option<u64>,
    pub trials_h0: Option<u64>,
    pub trials_h1: Option<u64>,
    pub jobs: usize,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub axis: Option<SweepAxis>,
    pub axis_name: Option<String>,
    pub values: Vec<f64>,
    pub calibration: Option<LlrCalibration>,
    pub options: OptionOverrides,
}

/// Scenario options that were set explicitly.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OptionOverrides {
    pub sigma2_mode: Option<Sigma2Mode>,
    pub reference: Option<ReferenceMode>,
    pub eve: Option<EveKnowledge>,
    pub calibration_trials: Option<u64>,
    pub exponent_trials: Option<u64>,
    pub grid_step: Option<f64>,
    pub realizations: Option<u64>,
    pub training_size: Option<usize>,
    pub folds: Option<usize>,
}

impl OptionOverrides {
    pub fn apply(&self, o: &mut ScenarioOptions) {
        fn set<T: Copy>(dst: &mut T, v: Option<T>) {
            if let Some(v) = v {
                *dst = v;
            }
        }
        set(&mut o.bob.sigma2, self.sigma2_mode);
        set(&mut o.bob.reference, self.reference);
        set(&mut o.eve, self.eve);
        set(&mut o.calibration_trials, self.calibration_trials);
        set(&mut o.exponent_trials, self.exponent_trials);
        set(&mut o.grid_step, self.grid_step);
        set(&mut o.realizations, self.realizations);
        set(&mut o.training_size, self.training_size);
        set(&mut o.folds, self.folds);
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            scenario: None,
            name: "inline".into(),
            params: ParamOverrides::default(),
            detector: None,
            attack: None,
            target_pfa: None,
            seed: None,
            trials_h0: None,
            trials_h1: None,
            jobs: 1,
            out: None,
            format: Format::Csv,
            axis: None,
            axis_name: None,
            values: Vec::new(),
            calibration: None,
            options: OptionOverrides::default(),
        }
    }
}

impl RunConfig {
    /// Seed from the configuration, then `AUTHSIM_SEED`, then the default.
    pub fn resolved_seed(&self) -> Result<u64> {
        if let Some(s) = self.seed {
            return Ok(s);
        }
        match std::env::var("AUTHSIM_SEED") {
            Ok(v) => v.trim().parse().map_err(|_| Error::Config {
                line: 0,
                key: "AUTHSIM_SEED".into(),
                reason: format!("`{v}` is not an unsigned integer"),
            }),
            Err(_) => Ok(DEFAULT_SEED),
        }
    }

    /// Parameters of an inline scenario.
    pub fn inline_params(&self) -> Result<SystemParams> {
        let base = SystemParams::uniform(1, 1.0, snr_db_to_variance(15.0), snr_db_to_variance(20.0), 0.1);
        self.params.apply(&base)
    }

    /// The scenarios this configuration describes, with budgets, seed and
    /// options applied.
    pub fn scenarios(&self) -> Result<Vec<Scenario>> {
        let seed = self.resolved_seed()?;
        let mut out = match &self.scenario {
            Some(name) => {
                let st = study(name)?;
                let picked: Vec<Scenario> = st
                    .scenarios
                    .into_iter()
                    .filter(|s| self.params.matches(&s.params))
                    .filter(|s| self.detector.is_none_or(|d| d.to_string() == s.detector.to_string()))
                    .collect();
                if picked.is_empty() {
                    return Err(Error::Config {
                        line: 0,
                        key: "scenario".into(),
                        reason: format!("no entry of `{name}` matches the given parameters"),
                    });
                }
                picked
            }
            None => {
                let detector = self.detector.unwrap_or(DetectorSpec::llr());
                vec![Scenario::new(self.name.clone(), self.inline_params()?, detector)]
            }
        };
        for s in &mut out {
            s.seed = seed;
            self.options.apply(&mut s.options);
            if let Some(c) = self.calibration {
                if let DetectorSpec::Llr { calibration } = &mut s.detector {
                    *calibration = c;
                }
            }
            if let Some(a) = self.attack {
                s.attack = a;
            }
            if let Some(t) = self.target_pfa {
                s.target_pfa = t;
            }
            if let Some(t) = self.trials_h0 {
                s.trials_h0 = t;
            }
            if let Some(t) = self.trials_h1 {
                s.trials_h1 = t;
            }
            s.validate()?;
        }
        Ok(out)
    }
}

fn bad(line: usize, key: &str, reason: impl Into<String>) -> Error {
    Error::Config {
        line,
        key: key.to_string(),
        reason: reason.into(),
    }
}

fn number<T: FromStr>(line: usize, key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| bad(line, key, format!("`{v}` is not a valid number")))
}

fn in_range(line: usize, key: &str, v: &str, lo: f64, hi: f64) -> Result<f64> {
    let x: f64 = number(line, key, v)?;
    if !(lo..=hi).contains(&x) {
        return Err(bad(line, key, format!("{x} outside [{lo}, {hi}]")));
    }
    Ok(x)
}

fn variance(line: usize, key: &str, v: &str) -> Result<f64> {
    let x: f64 = number(line, key, v)?;
    if !(x.is_finite() && x >= 0.0) {
        return Err(bad(line, key, format!("variance must be finite and non-negative, got {x}")));
    }
    Ok(x)
}

fn trials(line: usize, key: &str, v: &str) -> Result<u64> {
    let t: u64 = number(line, key, v)?;
    if t < MIN_TRIALS {
        return Err(bad(line, key, format!("{t} is below the minimum of {MIN_TRIALS}")));
    }
    Ok(t)
}

fn positive<T: FromStr + PartialOrd + Default + Copy + std::fmt::Display>(line: usize, key: &str, v: &str) -> Result<T> {
    let x: T = number(line, key, v)?;
    if x <= T::default() {
        return Err(bad(line, key, format!("must be positive, got {x}")));
    }
    Ok(x)
}

fn with_line<T>(line: usize, key: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| bad(line, key, e.to_string()))
}

/// Parse and validate a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    let mut seen: HashSet<String> = HashSet::new();
    let mut snr_keys: [Option<usize>; 2] = [None, None];
    let mut variance_keys: [Option<usize>; 2] = [None, None];

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| bad(line, content, "expected `key = value`"))?;
        let (key, value) = (key.trim(), value.trim());
        if !seen.insert(key.to_string()) {
            return Err(bad(line, key, "duplicate key"));
        }
        if value.is_empty() {
            return Err(bad(line, key, "missing value"));
        }
        let p = &mut cfg.params;
        let o = &mut cfg.options;
        match key {
            "scenario" => {
                with_line(line, key, study(value))?;
                cfg.scenario = Some(value.to_string());
            }
            "name" => cfg.name = value.to_string(),
            "seed" => cfg.seed = Some(number(line, key, value)?),
            "trials_h0" => cfg.trials_h0 = Some(trials(line, key, value)?),
            "trials_h1" => cfg.trials_h1 = Some(trials(line, key, value)?),
            "jobs" => cfg.jobs = positive(line, key, value)?,
            "out" => cfg.out = Some(PathBuf::from(value)),
            "format" => cfg.format = with_line(line, key, value.parse())?,
            "n_channels" => p.n_channels = Some(positive(line, key, value)?),
            "alpha" => p.alpha = Some(in_range(line, key, value, 0.0, 1.0)?),
            "rho_ae" => p.rho_ae = Some(in_range(line, key, value, 0.0, 1.0)?),
            "rho_eb" => p.rho_eb = Some(in_range(line, key, value, 0.0, 1.0)?),
            "rho_ab" => p.rho_ab = Some(in_range(line, key, value, 0.0, 1.0)?),
            "sigma2_i" => {
                variance_keys[0] = Some(line);
                p.sigma2_i = Some(variance(line, key, value)?);
            }
            "sigma2_ii" => {
                variance_keys[1] = Some(line);
                p.sigma2_ii = Some(variance(line, key, value)?);
            }
            "snr_i_db" => {
                snr_keys[0] = Some(line);
                p.sigma2_i = Some(snr_db_to_variance(in_range(line, key, value, f64::NEG_INFINITY, f64::INFINITY)?));
            }
            "snr_ii_db" => {
                snr_keys[1] = Some(line);
                p.sigma2_ii = Some(snr_db_to_variance(in_range(line, key, value, f64::NEG_INFINITY, f64::INFINITY)?));
            }
            "sigma2_ae" => p.sigma2_ae = Some(variance(line, key, value)?),
            "sigma2_eb" => p.sigma2_eb = Some(variance(line, key, value)?),
            "detector" => cfg.detector = Some(with_line(line, key, value.parse())?),
            "attack" => cfg.attack = Some(with_line(line, key, value.parse())?),
            "calibration" => cfg.calibration = Some(with_line(line, key, value.parse())?),
            "target_pfa" => {
                let t: f64 = number(line, key, value)?;
                if !(t > 0.0 && t < 1.0) {
                    return Err(bad(line, key, format!("{t} outside (0, 1)")));
                }
                cfg.target_pfa = Some(t);
            }
            "sigma2_mode" => {
                o.sigma2_mode = Some(match value {
                    "true_alpha" => Sigma2Mode::TrueAlpha,
                    "alpha_unaware" => Sigma2Mode::AlphaUnaware,
                    _ => return Err(bad(line, key, "expected `true_alpha` or `alpha_unaware`")),
                })
            }
            "reference" => {
                o.reference = Some(match value {
                    "genie" => ReferenceMode::Genie,
                    "plugin" => ReferenceMode::PlugIn,
                    _ => return Err(bad(line, key, "expected `genie` or `plugin`")),
                })
            }
            "eve" => {
                o.eve = Some(match value {
                    "flat" => EveKnowledge::AssumesFlat,
                    "actual" => EveKnowledge::KnowsAlpha,
                    _ => return Err(bad(line, key, "expected `flat` or `actual`")),
                })
            }
            "calibration_trials" => o.calibration_trials = Some(positive(line, key, value)?),
            "exponent_trials" => o.exponent_trials = Some(positive(line, key, value)?),
            "grid_step" => {
                let step: f64 = positive(line, key, value)?;
                with_line(line, key, crate::attacks::exponent_grid(step))?;
                o.grid_step = Some(step);
            }
            "realizations" => o.realizations = Some(positive(line, key, value)?),
            "training_size" => o.training_size = Some(positive(line, key, value)?),
            "folds" => {
                let g: usize = positive(line, key, value)?;
                if g < 2 {
                    return Err(bad(line, key, "need at least two folds"));
                }
                o.folds = Some(g);
            }
            "axis" => {
                cfg.axis = Some(with_line(line, key, value.parse())?);
                cfg.axis_name = Some(value.to_string());
            }
            "values" => {
                cfg.values = value
                    .split(',')
                    .map(|v| number::<f64>(line, key, v.trim()))
                    .collect::<Result<Vec<_>>>()?;
            }
            _ => return Err(bad(line, key, "unknown key")),
        }
    }

    for (i, name) in [(0, "snr_i_db"), (1, "snr_ii_db")] {
        if let (Some(line), Some(_)) = (snr_keys[i], variance_keys[i]) {
            return Err(bad(line, name, "conflicts with the matching sigma2 key"));
        }
    }
    if !cfg.values.is_empty() && cfg.axis.is_none() {
        return Err(bad(0, "values", "`values` needs an `axis`"));
    }
    if cfg.scenario.is_none() {
        let params = with_line(0, "n_channels", cfg.inline_params())?;
        if let Some(AttackSpec::Fixed(a)) = cfg.attack {
            with_line(0, "attack", a.validate(&params))?;
        }
    }
    Ok(cfg)
}
