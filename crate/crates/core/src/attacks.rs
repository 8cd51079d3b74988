//! Eve's forgery strategies and the search for the best combined-attack
//! exponent.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::channel::{self, SystemParams};
use crate::detectors::{decide, gamma_unchecked, psi_unchecked, BobModel, CombinedRule, DecisionRule};
use crate::error::{Error, Result};
use crate::montecarlo::par_chunks;
use crate::rng::StreamKey;
use crate::stats::{check_len, ComplexVector, RateEstimate};
use crate::channel::Hypothesis;

/// How Eve builds the forged vector `g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AttackStrategy {
    /// ML estimate of the Alice–Bob channel from both of Eve's observations.
    Llr,
    /// `g = rho_ae^x ĥ_AE` with `x` in `[-1, 1]`. `x = -1` is the modulus
    /// attack, `x = 1` matches the LLR attack when Eve only has `ĥ_AE`.
    Exponent { x: f64 },
}

impl AttackStrategy {
    pub fn exponent(x: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&x) {
            return Err(Error::param("x", format!("exponent {x} outside [-1, 1]")));
        }
        Ok(AttackStrategy::Exponent { x })
    }

    pub fn modulus() -> Self {
        AttackStrategy::Exponent { x: -1.0 }
    }

    /// Check that the strategy can be applied under `params`.
    pub fn validate(&self, params: &SystemParams) -> Result<()> {
        match *self {
            AttackStrategy::Llr => llr_coefficients(params).map(|_| ()),
            AttackStrategy::Exponent { x } => {
                if !(-1.0..=1.0).contains(&x) {
                    return Err(Error::param("x", format!("exponent {x} outside [-1, 1]")));
                }
                if params.rho_ae == 0.0 && x < 0.0 {
                    return Err(Error::ZeroCorrelationExponent { x });
                }
                Ok(())
            }
        }
    }

    pub fn forge(&self, h_ae_hat: &ComplexVector, h_eb_hat: &ComplexVector, params: &SystemParams) -> Result<ComplexVector> {
        match *self {
            AttackStrategy::Llr => llr_attack(h_ae_hat, h_eb_hat, params),
            AttackStrategy::Exponent { x } => exponent_attack(h_ae_hat, params.rho_ae, x),
        }
    }
}

impl fmt::Display for AttackStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttackStrategy::Llr => write!(f, "llr"),
            AttackStrategy::Exponent { x } => write!(f, "exponent:{x}"),
        }
    }
}

/// Per-channel `(C_n, D_n)` weights of the LLR attack.
pub fn llr_coefficients(params: &SystemParams) -> Result<Vec<(f64, f64)>> {
    let (r_ae, r_eb, r_ab) = (params.rho_ae, params.rho_eb, params.rho_ab);
    params
        .lambda
        .iter()
        .enumerate()
        .map(|(n, &l)| {
            let w_ae = 1.0 + params.sigma2_ae / l;
            let w_eb = 1.0 + params.sigma2_eb / l;
            let den = w_ae * w_eb - r_ab * r_ab;
            if !den.is_finite() || den.abs() < 1e-12 {
                return Err(Error::SingularAttack { channel: n });
            }
            let c = (r_eb * w_eb - r_ab * r_ae) / den;
            let d = (r_ae * w_ae - r_ab * r_eb) / den;
            Ok((c, d))
        })
        .collect()
}

/// `g_n = ĥ_EB,n C_n + ĥ_AE,n D_n`.
pub fn llr_attack(h_ae_hat: &ComplexVector, h_eb_hat: &ComplexVector, params: &SystemParams) -> Result<ComplexVector> {
    check_len(params.n_channels, h_ae_hat.len())?;
    check_len(params.n_channels, h_eb_hat.len())?;
    let coeffs = llr_coefficients(params)?;
    Ok(h_ae_hat
        .iter()
        .zip(h_eb_hat.iter())
        .zip(coeffs)
        .map(|((ae, eb), (c, d))| eb * c + ae * d)
        .collect())
}

/// `g_n = rho_ae^x ĥ_AE,n`.
pub fn exponent_attack(h_ae_hat: &ComplexVector, rho_ae: f64, x: f64) -> Result<ComplexVector> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::param("x", format!("exponent {x} outside [-1, 1]")));
    }
    if !(0.0..=1.0).contains(&rho_ae) {
        return Err(Error::param("rho_ae", format!("{rho_ae} outside [0, 1]")));
    }
    if rho_ae == 0.0 && x < 0.0 {
        return Err(Error::ZeroCorrelationExponent { x });
    }
    Ok(h_ae_hat.scale(rho_ae.powf(x)))
}

/// Exponent grid `-1, -1 + step, ..., 1`.
pub fn exponent_grid(step: f64) -> Result<Vec<f64>> {
    let count = 2.0 / step;
    if !(step > 0.0) || (count - count.round()).abs() > 1e-9 {
        return Err(Error::param("grid_step", format!("{step} does not divide 2")));
    }
    let count = count.round() as usize;
    Ok((0..=count)
        .map(|i| {
            let x = -1.0 + i as f64 * step;
            (x * 1e12).round() / 1e12
        })
        .collect())
}

/// Outcome of the exponent search.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentSearch {
    pub best: f64,
    /// Empirical missed-detection rate for each grid value, ascending in `x`.
    pub grid: Vec<(f64, RateEstimate)>,
}

impl ExponentSearch {
    pub fn rate_at(&self, x: f64) -> Option<RateEstimate> {
        self.grid.iter().find(|(v, _)| (v - x).abs() < 1e-9).map(|(_, r)| *r)
    }

    pub fn best_rate(&self) -> RateEstimate {
        self.rate_at(self.best).expect("best is on the grid")
    }
}

/// Find the exponent that maximizes empirical missed detection against
/// `rule`. Every grid value is scored on the same trials (common random
/// numbers); ties go to the value closest to `x = 1`.
pub fn optimize_attack_exponent(
    params: &SystemParams,
    bob: &BobModel,
    rule: &CombinedRule,
    grid_step: f64,
    mc_budget: u64,
    key: StreamKey,
    workers: usize,
) -> Result<ExponentSearch> {
    params.validate()?;
    if mc_budget == 0 {
        return Err(Error::param("mc_budget", "need at least one trial"));
    }
    let grid = exponent_grid(grid_step)?;
    if params.rho_ae == 0.0 {
        return Err(Error::ZeroCorrelationExponent { x: -1.0 });
    }
    let scales: Vec<f64> = grid.iter().map(|x| params.rho_ae.powf(*x)).collect();
    let sigma2 = bob.sigma2(params);
    let decision = DecisionRule::Combined(rule.clone());

    let parts = par_chunks(mc_budget, workers, |range| -> Result<Vec<u64>> {
        let mut hits = vec![0u64; scales.len()];
        let mut obs = vec![channel::zero(); params.n_channels];
        for i in range {
            let mut s = key.trial(i);
            let h = channel::draw_channel(params, &mut s);
            let h_hat = channel::setup_estimate(&h, params, &mut s)?;
            let (ae, _) = channel::eve_observations(&h, params, &mut s)?;
            let noise = channel::forged_observation(&ComplexVector::zeros(params.n_channels), params, &mut s)?;
            for (hit, &scale) in hits.iter_mut().zip(&scales) {
                for ((o, a), w) in obs.iter_mut().zip(ae.iter()).zip(noise.iter()) {
                    *o = a * scale + w;
                }
                let psi = psi_unchecked(&obs, &h_hat, &sigma2);
                let gamma = gamma_unchecked(&obs, &h_hat);
                *hit += (decide(psi, gamma, &decision) == Hypothesis::H0) as u64;
            }
        }
        Ok(hits)
    });
    let mut hits = vec![0u64; grid.len()];
    for part in parts {
        for (h, p) in hits.iter_mut().zip(part?) {
            *h += p;
        }
    }

    let mut best = grid.len() - 1;
    for i in (0..grid.len()).rev() {
        if hits[i] > hits[best] {
            best = i;
        }
    }
    Ok(ExponentSearch {
        best: grid[best],
        grid: grid
            .iter()
            .zip(&hits)
            .map(|(&x, &h)| (x, RateEstimate::from_counts(h, mc_budget)))
            .collect(),
    })
}
