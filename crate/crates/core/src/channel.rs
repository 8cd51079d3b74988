//! The system model: Alice–Bob channel, Bob's setup estimate, Phase-II
//! observations under slowly time-varying fading, and Eve's correlated
//! estimates.
//!
//! All vectors hold one complex gain per sub-carrier. Draws inside each
//! generator are made channel by channel, so the first `n` entries of a
//! vector are the same for any configuration with at least `n` channels
//! driven by the same stream.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::attacks::AttackStrategy;
use crate::error::{Error, Result};
use crate::rng::RandomStream;
use crate::stats::{check_len, check_variance, complex_normal, ComplexVector};

/// Noise variance for an SNR given in dB; `+inf` maps to zero noise.
pub fn snr_db_to_variance(snr_db: f64) -> f64 {
    if snr_db == f64::INFINITY {
        0.0
    } else {
        10f64.powf(-snr_db / 10.0)
    }
}

/// Which transmitter produced a Phase-II packet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Hypothesis {
    /// Alice (legitimate).
    H0,
    /// Eve (forged).
    H1,
}

/// Full parameterization of one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub n_channels: usize,
    /// Time correlation per sub-carrier between setup and observation.
    pub alpha: Vec<f64>,
    pub sigma2_i: f64,
    pub sigma2_ii: f64,
    pub rho_ae: f64,
    pub rho_eb: f64,
    /// Cross-correlation term in Eve's ML coefficients.
    pub rho_ab: f64,
    pub sigma2_ae: f64,
    pub sigma2_eb: f64,
    /// Power delay profile; also the diagonal of the channel covariance.
    pub lambda: Vec<f64>,
}

impl Default for SystemParams {
    fn default() -> Self {
        SystemParams::uniform(1, 1.0, snr_db_to_variance(15.0), snr_db_to_variance(20.0), 0.1)
    }
}

impl SystemParams {
    /// Same `alpha` on every sub-carrier, unit power delay, noiseless Eve,
    /// `rho_eb = rho_ab = 0`.
    pub fn uniform(n_channels: usize, alpha: f64, sigma2_i: f64, sigma2_ii: f64, rho_ae: f64) -> Self {
        SystemParams {
            n_channels,
            alpha: vec![alpha; n_channels],
            sigma2_i,
            sigma2_ii,
            rho_ae,
            rho_eb: 0.0,
            rho_ab: 0.0,
            sigma2_ae: 0.0,
            sigma2_eb: 0.0,
            lambda: vec![1.0; n_channels],
        }
    }

    pub fn snr_i_db(&self) -> f64 {
        -10.0 * self.sigma2_i.log10()
    }

    pub fn snr_ii_db(&self) -> f64 {
        -10.0 * self.sigma2_ii.log10()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_channels;
        if n == 0 {
            return Err(Error::param("n_channels", "need at least one sub-carrier"));
        }
        if self.alpha.len() != n {
            return Err(Error::param("alpha", format!("expected {n} entries, got {}", self.alpha.len())));
        }
        if self.lambda.len() != n {
            return Err(Error::param("lambda", format!("expected {n} entries, got {}", self.lambda.len())));
        }
        if let Some(a) = self.alpha.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return Err(Error::param("alpha", format!("{a} outside [0, 1]")));
        }
        if let Some(l) = self.lambda.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(Error::param("lambda", format!("power delay must be positive, got {l}")));
        }
        for (name, rho) in [("rho_ae", self.rho_ae), ("rho_eb", self.rho_eb), ("rho_ab", self.rho_ab)] {
            if !(0.0..=1.0).contains(&rho) {
                return Err(Error::param(name, format!("{rho} outside [0, 1]")));
            }
        }
        check_variance("sigma2_i", self.sigma2_i)?;
        check_variance("sigma2_ii", self.sigma2_ii)?;
        check_variance("sigma2_ae", self.sigma2_ae)?;
        check_variance("sigma2_eb", self.sigma2_eb)?;
        Ok(())
    }

    /// Per-sub-carrier variance of `ĥ(t) - ĥ_AB` under H0:
    /// `sigma2_i + sigma2_ii + 1 - alpha_n^2`.
    pub fn h0_variance(&self) -> Vec<f64> {
        self.alpha
            .iter()
            .map(|a| self.sigma2_i + self.sigma2_ii + 1.0 - a * a)
            .collect()
    }

    /// Copy with the same `alpha` on every sub-carrier.
    pub fn with_alpha(&self, alpha: f64) -> Self {
        SystemParams {
            alpha: vec![alpha; self.n_channels],
            ..self.clone()
        }
    }

    /// Copy resized to `n` sub-carriers. Per-channel vectors must be uniform.
    pub fn with_n_channels(&self, n: usize) -> Result<Self> {
        let uniform = |v: &[f64], name: &'static str| -> Result<f64> {
            let first = *v.first().ok_or_else(|| Error::param(name, "empty"))?;
            if v.iter().any(|x| *x != first) {
                return Err(Error::param(name, "cannot resize a non-uniform profile"));
            }
            Ok(first)
        };
        let alpha = uniform(&self.alpha, "alpha")?;
        let lambda = uniform(&self.lambda, "lambda")?;
        Ok(SystemParams {
            n_channels: n,
            alpha: vec![alpha; n],
            lambda: vec![lambda; n],
            ..self.clone()
        })
    }
}

/// `h_AB ~ CN(0, diag(lambda))`.
pub fn draw_channel(params: &SystemParams, stream: &mut RandomStream) -> ComplexVector {
    params.lambda.iter().map(|&l| complex_normal(stream, l)).collect()
}

/// Bob's Phase-I reference `ĥ_AB = h_AB + w_I`.
pub fn setup_estimate(h_ab: &ComplexVector, params: &SystemParams, stream: &mut RandomStream) -> Result<ComplexVector> {
    check_len(params.n_channels, h_ab.len())?;
    Ok(h_ab.iter().map(|h| h + complex_normal(stream, params.sigma2_i)).collect())
}

/// A legitimate Phase-II estimate
/// `ĥ(t) = alpha ∘ h_AB + sqrt(1 - alpha²) ∘ w_F + w_II`, with a fresh
/// unit-variance fading innovation `w_F` per call.
pub fn legit_observation(h_ab: &ComplexVector, params: &SystemParams, stream: &mut RandomStream) -> Result<ComplexVector> {
    check_len(params.n_channels, h_ab.len())?;
    if let Some(a) = params.alpha.iter().find(|a| !(0.0..=1.0).contains(*a)) {
        return Err(Error::param("alpha", format!("{a} outside [0, 1]")));
    }
    Ok(h_ab
        .iter()
        .zip(&params.alpha)
        .map(|(h, &a)| {
            let fading = complex_normal(stream, 1.0);
            let noise = complex_normal(stream, params.sigma2_ii);
            h * a + fading * (1.0 - a * a).sqrt() + noise
        })
        .collect())
}

/// Eve's estimates of the Alice–Eve and Eve–Bob channels. The random
/// component `r ~ CN(0, diag(lambda))` is shared by both.
pub fn eve_observations(
    h_ab: &ComplexVector,
    params: &SystemParams,
    stream: &mut RandomStream,
) -> Result<(ComplexVector, ComplexVector)> {
    check_len(params.n_channels, h_ab.len())?;
    let ae_w = (1.0 - params.rho_ae * params.rho_ae).sqrt();
    let eb_w = (1.0 - params.rho_eb * params.rho_eb).sqrt();
    let mut ae = Vec::with_capacity(h_ab.len());
    let mut eb = Vec::with_capacity(h_ab.len());
    for (h, &l) in h_ab.iter().zip(&params.lambda) {
        let r = complex_normal(stream, l);
        let w_ae = complex_normal(stream, params.sigma2_ae);
        let w_eb = complex_normal(stream, params.sigma2_eb);
        ae.push(h * params.rho_ae + r * ae_w + w_ae);
        eb.push(h * params.rho_eb + r * eb_w + w_eb);
    }
    Ok((ComplexVector::from_vec(ae), ComplexVector::from_vec(eb)))
}

/// What Bob sees when Eve transmits a forged vector: `ĥ(t) = g + w_II`.
pub fn forged_observation(g: &ComplexVector, params: &SystemParams, stream: &mut RandomStream) -> Result<ComplexVector> {
    check_len(params.n_channels, g.len())?;
    Ok(g.iter().map(|g| g + complex_normal(stream, params.sigma2_ii)).collect())
}

/// One Monte Carlo draw.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSample {
    pub h_ab: ComplexVector,
    pub h_ab_hat: ComplexVector,
    pub h_ae_hat: ComplexVector,
    pub h_eb_hat: ComplexVector,
    pub observation: ComplexVector,
    pub truth: Hypothesis,
}

impl TrialSample {
    /// Draw a complete trial. Under H1 the observation is built from
    /// `attack` applied to Eve's estimates.
    pub fn draw(
        params: &SystemParams,
        truth: Hypothesis,
        attack: &AttackStrategy,
        stream: &mut RandomStream,
    ) -> Result<TrialSample> {
        params.validate()?;
        let h_ab = draw_channel(params, stream);
        let h_ab_hat = setup_estimate(&h_ab, params, stream)?;
        let (h_ae_hat, h_eb_hat) = eve_observations(&h_ab, params, stream)?;
        let observation = match truth {
            Hypothesis::H0 => legit_observation(&h_ab, params, stream)?,
            Hypothesis::H1 => {
                let g = attack.forge(&h_ae_hat, &h_eb_hat, params)?;
                forged_observation(&g, params, stream)?
            }
        };
        Ok(TrialSample {
            h_ab,
            h_ab_hat,
            h_ae_hat,
            h_eb_hat,
            observation,
            truth,
        })
    }
}

pub(crate) fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}
