use serde::{Deserialize, Serialize};

/// Two-sided 95% standard normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `events` successes in `trials` draws.
pub fn wilson_interval(events: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = events as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if events == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if events == trials { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// An error-rate estimate with its 95% Wilson interval.
///
/// When no event was observed the rate is reported as the upper bound
/// `1 / trials` and `zero_event` is set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub events: u64,
    pub trials: u64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub zero_event: bool,
}

impl RateEstimate {
    pub fn from_counts(events: u64, trials: u64) -> Self {
        let (ci_low, ci_high) = wilson_interval(events, trials, Z_95);
        let zero_event = events == 0 && trials > 0;
        let estimate = if trials == 0 {
            0.0
        } else if zero_event {
            1.0 / trials as f64
        } else {
            events as f64 / trials as f64
        };
        RateEstimate {
            events,
            trials,
            estimate,
            ci_low,
            ci_high,
            zero_event,
        }
    }

    /// Plain `events / trials`, zero for zero events.
    pub fn raw(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.events as f64 / self.trials as f64
        }
    }

    /// Binomial standard error of the raw estimate.
    pub fn std_error(&self) -> f64 {
        if self.trials == 0 {
            return 0.0;
        }
        let p = self.raw();
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }

    /// True when the two 95% intervals intersect.
    pub fn overlaps(&self, other: &RateEstimate) -> bool {
        self.ci_low <= other.ci_high && other.ci_low <= self.ci_high
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_reference_values() {
        // 10 of 100: standard textbook value (0.0552, 0.1744).
        let (lo, hi) = wilson_interval(10, 100, Z_95);
        assert!((lo - 0.05523).abs() < 1e-4, "{lo}");
        assert!((hi - 0.17437).abs() < 1e-4, "{hi}");
    }

    #[test]
    fn zero_event_convention() {
        let r = RateEstimate::from_counts(0, 1_000_000);
        assert!(r.zero_event);
        assert_eq!(r.estimate, 1e-6);
        assert!(r.ci_low == 0.0 && r.ci_high > r.estimate);
    }

    #[test]
    fn estimate_inside_interval() {
        for (e, n) in [(0, 10), (1, 10), (5, 10), (10, 10), (3, 1_000_000)] {
            let r = RateEstimate::from_counts(e, n);
            assert!(r.ci_low <= r.estimate && r.estimate <= r.ci_high, "{e}/{n}");
        }
    }
}
