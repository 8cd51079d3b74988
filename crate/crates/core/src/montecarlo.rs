//! Trial generation shared by the threshold search, the exponent search and
//! the scenario engine.
//!
//! Trial `i` of a family always draws from `key.trial(i)`. Work is cut into
//! fixed-size chunks and results are concatenated (or summed) in chunk
//! order, so outputs are identical for any worker count.

use std::ops::Range;

use rayon::prelude::*;

use crate::attacks::AttackStrategy;
use crate::channel::{self, SystemParams};
use crate::detectors::{gamma_unchecked, mu_unchecked, psi_unchecked, BobModel, ReferenceMode};
use crate::error::Result;
use crate::rng::{RandomStream, StreamKey};
use crate::stats::ComplexVector;

pub const CHUNK: u64 = 1 << 13;

/// Per-trial `(Psi, Gamma, mu)` triples, stored column-wise.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StatPool {
    pub psi: Vec<f64>,
    pub gamma: Vec<f64>,
    /// H0 noncentrality of the trial's channel, for per-realization thresholds.
    pub mu: Vec<f64>,
}

impl StatPool {
    pub fn len(&self) -> usize {
        self.psi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psi.is_empty()
    }

    fn with_capacity(n: usize) -> Self {
        StatPool {
            psi: Vec::with_capacity(n),
            gamma: Vec::with_capacity(n),
            mu: Vec::with_capacity(n),
        }
    }

    fn push(&mut self, s: TrialStats) {
        self.psi.push(s.psi);
        self.gamma.push(s.gamma);
        self.mu.push(s.mu);
    }

    fn extend(&mut self, other: StatPool) {
        self.psi.extend(other.psi);
        self.gamma.extend(other.gamma);
        self.mu.extend(other.mu);
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialStats {
    pub psi: f64,
    pub gamma: f64,
    pub mu: f64,
}

/// Run `f` over `[0, trials)` in chunk order, on `workers` threads.
pub fn par_chunks<T, F>(trials: u64, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(Range<u64>) -> T + Sync + Send,
{
    let chunks: Vec<Range<u64>> = (0..trials.div_ceil(CHUNK))
        .map(|c| c * CHUNK..((c + 1) * CHUNK).min(trials))
        .collect();
    if workers <= 1 {
        return chunks.into_iter().map(f).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(|| chunks.into_par_iter().map(&f).collect()),
        Err(_) => chunks.into_iter().map(f).collect(),
    }
}

/// Count trials for which `f` returns true.
pub fn count_trials<F>(trials: u64, workers: usize, f: F) -> Result<u64>
where
    F: Fn(u64) -> Result<bool> + Sync + Send,
{
    let parts = par_chunks(trials, workers, |range| -> Result<u64> {
        let mut n = 0;
        for i in range {
            n += f(i)? as u64;
        }
        Ok(n)
    });
    parts.into_iter().sum()
}

fn reference_mu(bob: &BobModel, params: &SystemParams, h: &ComplexVector, h_hat: &ComplexVector, sigma2: &[f64]) -> f64 {
    match bob.reference {
        ReferenceMode::Genie => mu_unchecked(&params.alpha, h, sigma2),
        ReferenceMode::PlugIn => mu_unchecked(&params.alpha, h_hat, sigma2),
    }
}

/// Statistics of one legitimate trial.
pub fn legit_trial(params: &SystemParams, bob: &BobModel, sigma2: &[f64], stream: &mut RandomStream) -> Result<TrialStats> {
    let h = channel::draw_channel(params, stream);
    let h_hat = channel::setup_estimate(&h, params, stream)?;
    let obs = channel::legit_observation(&h, params, stream)?;
    Ok(TrialStats {
        psi: psi_unchecked(&obs, &h_hat, sigma2),
        gamma: gamma_unchecked(&obs, &h_hat),
        mu: reference_mu(bob, params, &h, &h_hat, sigma2),
    })
}

/// Statistics of one forged trial.
pub fn attack_trial(
    params: &SystemParams,
    bob: &BobModel,
    sigma2: &[f64],
    attack: &AttackStrategy,
    stream: &mut RandomStream,
) -> Result<TrialStats> {
    let h = channel::draw_channel(params, stream);
    let h_hat = channel::setup_estimate(&h, params, stream)?;
    let (ae, eb) = channel::eve_observations(&h, params, stream)?;
    let g = attack.forge(&ae, &eb, params)?;
    let obs = channel::forged_observation(&g, params, stream)?;
    Ok(TrialStats {
        psi: psi_unchecked(&obs, &h_hat, sigma2),
        gamma: gamma_unchecked(&obs, &h_hat),
        mu: reference_mu(bob, params, &h, &h_hat, sigma2),
    })
}

fn pool<F>(trials: u64, workers: usize, trial: F) -> Result<StatPool>
where
    F: Fn(u64) -> Result<TrialStats> + Sync + Send,
{
    let parts = par_chunks(trials, workers, |range| -> Result<StatPool> {
        let mut p = StatPool::with_capacity((range.end - range.start) as usize);
        for i in range {
            p.push(trial(i)?);
        }
        Ok(p)
    });
    let mut out = StatPool::with_capacity(trials as usize);
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

/// `trials` H0 draws from family `key`.
pub fn legit_pool(params: &SystemParams, bob: &BobModel, trials: u64, key: StreamKey, workers: usize) -> Result<StatPool> {
    params.validate()?;
    let sigma2 = bob.sigma2(params);
    pool(trials, workers, |i| legit_trial(params, bob, &sigma2, &mut key.trial(i)))
}

/// `trials` H1 draws from family `key`, forged with `attack`.
pub fn attack_pool(
    params: &SystemParams,
    bob: &BobModel,
    attack: &AttackStrategy,
    trials: u64,
    key: StreamKey,
    workers: usize,
) -> Result<StatPool> {
    params.validate()?;
    attack.validate(params)?;
    let sigma2 = bob.sigma2(params);
    pool(trials, workers, |i| attack_trial(params, bob, &sigma2, attack, &mut key.trial(i)))
}
