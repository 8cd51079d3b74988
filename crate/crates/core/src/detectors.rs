//! Bob's decision machinery: the LLR statistic and its analytic calibration,
//! the modulus statistic, the combined accept rule, and the joint
//! threshold search.

use serde::{Deserialize, Serialize};

use crate::attacks::AttackStrategy;
use crate::channel::{Hypothesis, SystemParams};
use crate::error::{Error, Result};
use crate::montecarlo::{self, StatPool};
use crate::rng::StreamKey;
use crate::stats::{check_len, ComplexVector, NoncentralChi2, RateEstimate};

/// How Bob computes the per-sub-carrier variance used in `Psi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Sigma2Mode {
    /// `sigma2_i + sigma2_ii + 1 - alpha_n^2` with the true `alpha`.
    #[default]
    TrueAlpha,
    /// Bob ignores time variation and uses `sigma2_i + sigma2_ii`.
    AlphaUnaware,
}

/// Which channel the H0 noncentrality is computed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ReferenceMode {
    /// The true realization `h_AB`.
    #[default]
    Genie,
    /// Bob's own reference `ĥ_AB`.
    PlugIn,
}

/// What Bob knows when building his statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct BobModel {
    pub sigma2: Sigma2Mode,
    pub reference: ReferenceMode,
}

impl BobModel {
    pub fn sigma2(&self, params: &SystemParams) -> Vec<f64> {
        match self.sigma2 {
            Sigma2Mode::TrueAlpha => params.h0_variance(),
            Sigma2Mode::AlphaUnaware => vec![params.sigma2_i + params.sigma2_ii; params.n_channels],
        }
    }
}

fn check_sigma2(sigma2: &[f64]) -> Result<()> {
    match sigma2.iter().position(|s| !(s.is_finite() && *s > 0.0)) {
        Some(i) => Err(Error::param("sigma2", format!("entry {i} must be positive, got {}", sigma2[i]))),
        None => Ok(()),
    }
}

/// Threshold test on `Psi` alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlrRule {
    pub theta: f64,
    pub sigma2: Vec<f64>,
}

impl LlrRule {
    pub fn new(theta: f64, sigma2: Vec<f64>) -> Result<Self> {
        if !(theta > 0.0) {
            return Err(Error::param("theta", format!("must be positive, got {theta}")));
        }
        check_sigma2(&sigma2)?;
        Ok(LlrRule { theta, sigma2 })
    }
}

/// Joint test: `Psi <= theta` and `|Gamma| <= epsilon`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinedRule {
    pub theta: f64,
    pub epsilon: f64,
    pub sigma2: Vec<f64>,
}

impl CombinedRule {
    pub fn new(theta: f64, epsilon: f64, sigma2: Vec<f64>) -> Result<Self> {
        if !(theta > 0.0) {
            return Err(Error::param("theta", format!("must be positive, got {theta}")));
        }
        if epsilon.is_nan() || epsilon < 0.0 {
            return Err(Error::param("epsilon", format!("must be >= 0, got {epsilon}")));
        }
        check_sigma2(&sigma2)?;
        Ok(CombinedRule { theta, epsilon, sigma2 })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DecisionRule {
    Llr(LlrRule),
    Combined(CombinedRule),
}

impl From<LlrRule> for DecisionRule {
    fn from(r: LlrRule) -> Self {
        DecisionRule::Llr(r)
    }
}

impl From<CombinedRule> for DecisionRule {
    fn from(r: CombinedRule) -> Self {
        DecisionRule::Combined(r)
    }
}

/// `Psi = 2 sum_n |obs_n - ref_n|^2 / sigma2_n`.
pub fn llr_statistic(obs: &ComplexVector, reference: &ComplexVector, sigma2: &[f64]) -> Result<f64> {
    check_len(obs.len(), reference.len())?;
    check_len(obs.len(), sigma2.len())?;
    check_sigma2(sigma2)?;
    Ok(psi_unchecked(obs, reference, sigma2))
}

// A zero difference contributes nothing even when `sigma2` is zero, so a
// noiseless flat channel yields `Psi = 0` under H0 and `+inf` otherwise.
#[inline]
pub(crate) fn psi_unchecked(obs: &[num_complex::Complex64], reference: &[num_complex::Complex64], sigma2: &[f64]) -> f64 {
    2.0 * obs
        .iter()
        .zip(reference)
        .zip(sigma2)
        .map(|((o, r), s)| {
            let d = (o - r).norm_sqr();
            if d == 0.0 {
                0.0
            } else {
                d / s
            }
        })
        .sum::<f64>()
}

/// `Gamma = sum_n (|ref_n| - |obs_n|)`.
pub fn modulus_statistic(obs: &ComplexVector, reference: &ComplexVector) -> Result<f64> {
    check_len(obs.len(), reference.len())?;
    Ok(gamma_unchecked(obs, reference))
}

#[inline]
pub(crate) fn gamma_unchecked(obs: &[num_complex::Complex64], reference: &[num_complex::Complex64]) -> f64 {
    obs.iter().zip(reference).map(|(o, r)| r.norm() - o.norm()).sum()
}

/// Which noncentrality parameter to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Noncentrality {
    /// H0: `v` carries `(alpha_n - 1) h_n`; the result is `sum |v_n|^2 / sigma2_n`.
    Mu,
    /// H1: `v` carries the forged `g`; the result is `sum |g_n - h_n|^2 / sigma2_n`.
    Beta,
}

pub fn noncentrality(v: &ComplexVector, channel: &ComplexVector, sigma2: &[f64], kind: Noncentrality) -> Result<f64> {
    check_len(v.len(), channel.len())?;
    check_len(v.len(), sigma2.len())?;
    check_sigma2(sigma2)?;
    Ok(match kind {
        Noncentrality::Mu => v.iter().zip(sigma2).map(|(x, s)| x.norm_sqr() / s).sum(),
        Noncentrality::Beta => v
            .iter()
            .zip(channel.iter())
            .zip(sigma2)
            .map(|((g, h), s)| (g - h).norm_sqr() / s)
            .sum(),
    })
}

/// H0 noncentrality `mu` for a channel (true or plug-in) and time correlation.
#[inline]
pub(crate) fn mu_unchecked(alpha: &[f64], channel: &[num_complex::Complex64], sigma2: &[f64]) -> f64 {
    alpha
        .iter()
        .zip(channel)
        .zip(sigma2)
        .map(|((a, h), s)| (h * (a - 1.0)).norm_sqr() / s)
        .sum()
}

/// Analytic LLR threshold: the `1 - target_pfa` quantile of the
/// noncentral chi-square law with `2N` degrees of freedom and noncentrality `mu`.
pub fn calibrate_llr_threshold(target_pfa: f64, mu: f64, n_channels: usize) -> Result<f64> {
    if !(target_pfa > 0.0 && target_pfa < 1.0) {
        return Err(Error::ProbabilityOutOfRange(target_pfa));
    }
    if n_channels == 0 {
        return Err(Error::param("n_channels", "need at least one sub-carrier"));
    }
    NoncentralChi2::new(2 * n_channels as u32, mu)?.quantile(1.0 - target_pfa)
}

/// Accept (H0) or reject (H1). Boundaries are inclusive.
pub fn decide(psi: f64, gamma: f64, rule: &DecisionRule) -> Hypothesis {
    let accept = match rule {
        DecisionRule::Llr(r) => psi <= r.theta,
        DecisionRule::Combined(r) => psi <= r.theta && gamma.abs() <= r.epsilon,
    };
    if accept {
        Hypothesis::H0
    } else {
        Hypothesis::H1
    }
}

/// Number of geometric `epsilon` grid points (before adding `+inf`).
pub const EPSILON_GRID_POINTS: usize = 40;
/// Relative tolerance of the dichotomic `theta` search.
pub const THETA_REL_TOL: f64 = 1e-3;

/// `40` points spanning `[1e-3, 1e2] * sqrt(N)`, followed by `+inf`.
pub fn epsilon_grid(n_channels: usize) -> Vec<f64> {
    let scale = (n_channels as f64).sqrt();
    let (lo, hi) = (1e-3f64.ln(), 1e2f64.ln());
    let mut grid: Vec<f64> = (0..EPSILON_GRID_POINTS)
        .map(|i| scale * (lo + (hi - lo) * i as f64 / (EPSILON_GRID_POINTS - 1) as f64).exp())
        .collect();
    grid.push(f64::INFINITY);
    grid
}

/// Result of the joint threshold search on fixed pools.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdOptimum {
    pub rule: CombinedRule,
    pub pfa: RateEstimate,
    pub pmd: RateEstimate,
    /// `(epsilon, theta, pmd)` for every feasible grid point.
    pub frontier: Vec<(f64, f64, RateEstimate)>,
}

/// Minimize empirical missed detection over `(theta, epsilon)` subject to
/// an empirical false-alarm rate of at most `target_pfa` on `h0`.
///
/// For each `epsilon` on [`epsilon_grid`] the smallest feasible `theta` is
/// located by bisection, then the couple is scored on `h1`. Equal scores
/// keep the larger `epsilon`.
pub fn optimize_thresholds_on_pools(
    h0: &StatPool,
    h1: &StatPool,
    target_pfa: f64,
    sigma2: Vec<f64>,
) -> Result<ThresholdOptimum> {
    if !(target_pfa > 0.0 && target_pfa < 1.0) {
        return Err(Error::ProbabilityOutOfRange(target_pfa));
    }
    if h0.is_empty() || h1.is_empty() {
        return Err(Error::Calibration("empty sample pool".into()));
    }
    let n0 = h0.len();
    let allowed = (target_pfa * n0 as f64).floor() as usize;
    let needed = n0 - allowed;

    let mut order: Vec<usize> = (0..n0).collect();
    order.sort_by(|&a, &b| h0.psi[a].total_cmp(&h0.psi[b]));

    let mut best: Option<(f64, f64, u64)> = None;
    let mut frontier = Vec::new();
    let mut gated = Vec::with_capacity(n0);
    for &eps in epsilon_grid(sigma2.len()).iter().rev() {
        gated.clear();
        gated.extend(order.iter().filter(|&&i| h0.gamma[i].abs() <= eps).map(|&i| h0.psi[i]));
        if gated.len() < needed {
            continue;
        }
        let feasible = |theta: f64| gated.partition_point(|&p| p <= theta) >= needed;
        let mut hi = gated.last().copied().unwrap_or(0.0).max(1e-12) * (1.0 + 1e-12);
        let mut lo = 0.0;
        for _ in 0..400 {
            if hi - lo <= THETA_REL_TOL * hi {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if feasible(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let theta = hi;
        let md = h1
            .psi
            .iter()
            .zip(&h1.gamma)
            .filter(|(p, g)| **p <= theta && g.abs() <= eps)
            .count() as u64;
        frontier.push((eps, theta, RateEstimate::from_counts(md, h1.len() as u64)));
        if best.is_none_or(|(_, _, b)| md < b) {
            best = Some((eps, theta, md));
        }
    }

    let (epsilon, theta, md) = best.ok_or_else(|| {
        Error::Calibration(format!("no (theta, epsilon) couple meets P_FA <= {target_pfa} on {n0} trials"))
    })?;
    let fa = h0
        .psi
        .iter()
        .zip(&h0.gamma)
        .filter(|(p, g)| !(**p <= theta && g.abs() <= epsilon))
        .count() as u64;
    Ok(ThresholdOptimum {
        rule: CombinedRule::new(theta, epsilon, sigma2)?,
        pfa: RateEstimate::from_counts(fa, n0 as u64),
        pmd: RateEstimate::from_counts(md, h1.len() as u64),
        frontier,
    })
}

/// Draw fresh H0 and H1 pools of `mc_budget` trials each and run
/// [`optimize_thresholds_on_pools`].
pub fn optimize_thresholds(
    params: &SystemParams,
    bob: &BobModel,
    target_pfa: f64,
    attack: &AttackStrategy,
    mc_budget: u64,
    key: StreamKey,
    workers: usize,
) -> Result<ThresholdOptimum> {
    params.validate()?;
    if !(target_pfa > 0.0 && target_pfa < 1.0) {
        return Err(Error::ProbabilityOutOfRange(target_pfa));
    }
    if target_pfa * (mc_budget as f64) < 100.0 {
        return Err(Error::Calibration(format!(
            "budget of {mc_budget} trials gives fewer than 100 expected false alarms at P_FA = {target_pfa}"
        )));
    }
    let h0 = montecarlo::legit_pool(params, bob, mc_budget, key.child(crate::rng::tag::H0_POOL), workers)?;
    let h1 = montecarlo::attack_pool(params, bob, attack, mc_budget, key.child(crate::rng::tag::H1_POOL), workers)?;
    optimize_thresholds_on_pools(&h0, &h1, target_pfa, bob.sigma2(params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn cv(v: &[(f64, f64)]) -> ComplexVector {
        ComplexVector::new(v.iter().map(|&(r, i)| Complex64::new(r, i)).collect()).unwrap()
    }

    #[test]
    fn psi_examples() {
        let a = cv(&[(0.3, -1.0), (2.0, 0.5)]);
        assert_eq!(llr_statistic(&a, &a, &[1.0, 1.0]).unwrap(), 0.0);
        // |obs - ref|^2 = 2 with sigma2 = 1
        let psi = llr_statistic(&cv(&[(1.0, 1.0)]), &cv(&[(0.0, 0.0)]), &[1.0]).unwrap();
        assert!((psi - 4.0).abs() < 1e-15);
        let psi = llr_statistic(&cv(&[(1.0, 0.0), (0.0, 2.0)]), &cv(&[(0.0, 0.0), (0.0, 0.0)]), &[1.0, 2.0]).unwrap();
        assert!((psi - 6.0).abs() < 1e-15);
    }

    #[test]
    fn psi_rejects_bad_variance() {
        let a = cv(&[(1.0, 0.0)]);
        assert!(llr_statistic(&a, &a, &[0.0]).is_err());
        assert!(llr_statistic(&a, &a, &[-1.0]).is_err());
        assert!(llr_statistic(&a, &a, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn gamma_examples() {
        let r = cv(&[(2.0, 0.0), (0.0, 3.0)]);
        assert_eq!(modulus_statistic(&r, &r).unwrap(), 0.0);
        let o = cv(&[(0.0, 1.0), (1.0, 0.0)]);
        assert!((modulus_statistic(&o, &r).unwrap() - 3.0).abs() < 1e-15);
        let rotated: ComplexVector = r.iter().zip([0.7, -2.1]).map(|(z, phi)| z * Complex64::from_polar(1.0, phi)).collect();
        assert!(modulus_statistic(&rotated, &r).unwrap().abs() < 1e-14);
    }

    #[test]
    fn noncentrality_examples() {
        let h = cv(&[(2.0, 0.0)]);
        let v = cv(&[(-0.2, 0.0)]);
        let mu = noncentrality(&v, &h, &[1.19], Noncentrality::Mu).unwrap();
        assert!((mu - 0.04 / 1.19).abs() < 1e-15);
        assert!((mu - 0.0336).abs() < 1e-4);
        assert_eq!(noncentrality(&h, &h, &[1.0], Noncentrality::Beta).unwrap(), 0.0);
        assert_eq!(mu_unchecked(&[1.0], &h, &[1.0]), 0.0);
        assert!(noncentrality(&h, &cv(&[(1.0, 0.0), (1.0, 0.0)]), &[1.0], Noncentrality::Beta).is_err());
    }

    #[test]
    fn analytic_threshold() {
        let t = calibrate_llr_threshold(1e-4, 0.0, 1).unwrap();
        assert!((t - 18.4207).abs() < 1e-4);
        let d = NoncentralChi2::new(2, 0.0).unwrap();
        assert!((d.cdf(t) - (1.0 - 1e-4)).abs() < 1e-9);
        let t3 = calibrate_llr_threshold(1e-4, 0.0, 3).unwrap();
        assert!(calibrate_llr_threshold(1e-4, 0.5, 3).unwrap() > t3);
        assert!(calibrate_llr_threshold(0.0, 0.0, 3).is_err());
        assert!(calibrate_llr_threshold(1.0, 0.0, 3).is_err());
    }

    #[test]
    fn decide_boundaries() {
        let llr = DecisionRule::Llr(LlrRule::new(2.0, vec![1.0]).unwrap());
        let comb = DecisionRule::Combined(CombinedRule::new(2.0, 0.5, vec![1.0]).unwrap());
        assert_eq!(decide(0.0, 0.0, &comb), Hypothesis::H0);
        assert_eq!(decide(2.0, 0.5, &comb), Hypothesis::H0);
        assert_eq!(decide(2.0, -0.5, &comb), Hypothesis::H0);
        assert_eq!(decide(2.0 + 1e-12, 0.0, &comb), Hypothesis::H1);
        assert_eq!(decide(1.0, 0.6, &comb), Hypothesis::H1);
        assert_eq!(decide(1.0, 0.6, &llr), Hypothesis::H0);
    }

    #[test]
    fn rule_validation() {
        assert!(LlrRule::new(0.0, vec![1.0]).is_err());
        assert!(LlrRule::new(1.0, vec![0.0]).is_err());
        assert!(CombinedRule::new(1.0, -0.1, vec![1.0]).is_err());
        assert!(CombinedRule::new(1.0, f64::INFINITY, vec![1.0]).is_ok());
    }

    #[test]
    fn epsilon_grid_shape() {
        let g = epsilon_grid(4);
        assert_eq!(g.len(), 41);
        assert!((g[0] - 2e-3).abs() < 1e-15);
        assert!((g[39] - 200.0).abs() < 1e-9);
        assert!(g[40].is_infinite());
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn pool_search_picks_gate_when_it_helps() {
        // H0 concentrated at small |Gamma|, H1 with large |Gamma| but small Psi.
        let h0 = StatPool {
            psi: (0..1000).map(|i| i as f64 / 100.0).collect(),
            gamma: (0..1000).map(|i| ((i % 7) as f64 - 3.0) * 0.01).collect(),
            mu: vec![0.0; 1000],
        };
        let h1 = StatPool {
            psi: vec![0.5; 200],
            gamma: vec![5.0; 200],
            mu: vec![0.0; 200],
        };
        let opt = optimize_thresholds_on_pools(&h0, &h1, 0.1, vec![1.0]).unwrap();
        assert_eq!(opt.pmd.events, 0);
        assert!(opt.pfa.raw() <= 0.1);
        assert!(opt.rule.epsilon < 5.0);
    }

    #[test]
    fn pool_search_degenerate_noiseless() {
        let h0 = StatPool { psi: vec![0.0; 1000], gamma: vec![0.0; 1000], mu: vec![0.0; 1000] };
        let h1 = StatPool { psi: vec![3.0; 10], gamma: vec![1.0; 10], mu: vec![0.0; 10] };
        let opt = optimize_thresholds_on_pools(&h0, &h1, 0.1, vec![1.0]).unwrap();
        assert!(opt.rule.theta > 0.0 && opt.rule.theta < 1e-6);
        assert_eq!(opt.pfa.events, 0);
        assert_eq!(opt.pmd.events, 0);
    }
}
