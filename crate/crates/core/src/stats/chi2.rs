use super::gamma::{ln_gamma, regularized_lower_gamma};
use crate::error::{Error, Result};

/// Poisson mass left out of the mixture before the series is cut.
const TAIL_BOUND: f64 = 1e-14;

/// Noncentral chi-square law with `dof` degrees of freedom and
/// noncentrality `lambda` (the sum of squared means of the unit-variance
/// Gaussians).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoncentralChi2 {
    dof: u32,
    lambda: f64,
}

/// CDF of the central chi-square law.
pub fn central_chi2_cdf(x: f64, dof: u32) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    regularized_lower_gamma(0.5 * dof as f64, 0.5 * x)
}

impl NoncentralChi2 {
    pub fn new(dof: u32, lambda: f64) -> Result<Self> {
        if dof == 0 {
            return Err(Error::param("dof", "degrees of freedom must be >= 1"));
        }
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(Error::param("lambda", format!("noncentrality must be finite and >= 0, got {lambda}")));
        }
        Ok(NoncentralChi2 { dof, lambda })
    }

    pub fn dof(&self) -> u32 {
        self.dof
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `P[X <= x]` as a Poisson(lambda/2) mixture of central chi-square CDFs
    /// with `dof + 2j` degrees of freedom.
    ///
    /// The mixture is summed outward from the Poisson mode. Neighbouring
    /// central CDFs are linked by `P(a+1, y) = P(a, y) - y^a e^-y / Γ(a+1)`,
    /// so only one incomplete-gamma evaluation is needed per call.
    pub fn cdf(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        if x <= 0.0 {
            return 0.0;
        }
        if x.is_infinite() {
            return 1.0;
        }
        let a0 = 0.5 * self.dof as f64;
        let y = 0.5 * x;
        let m = 0.5 * self.lambda;
        if m == 0.0 {
            return regularized_lower_gamma(a0, y);
        }

        let mode = m.floor();
        let mode_j = mode as u64;
        let ln_y = y.ln();
        let w_mode = (-m + mode * m.ln() - ln_gamma(mode + 1.0)).exp();
        let a_mode = a0 + mode;
        let p_mode = regularized_lower_gamma(a_mode, y);
        // t(a) = y^a e^-y / Γ(a + 1)
        let t_mode = (a_mode * ln_y - y - ln_gamma(a_mode + 1.0)).exp();

        let mut sum = w_mode * p_mode;

        // Downward from the mode: weights shrink geometrically once below it.
        let (mut w, mut p, mut t) = (w_mode, p_mode, t_mode);
        let mut j = mode_j;
        while j > 0 {
            // t(a - 1) = t(a) * a / y, P(a - 1) = P(a) + t(a - 1)
            let a = a0 + j as f64;
            t *= a / y;
            p = (p + t).min(1.0);
            w *= j as f64 / m;
            j -= 1;
            sum += w * p;
            if w < 1e-17 {
                break;
            }
        }

        // Upward: stop once the remaining Poisson mass times the current
        // (decreasing) central CDF is below the tail bound.
        let (mut w, mut p, mut t) = (w_mode, p_mode, t_mode);
        let mut j = mode_j;
        loop {
            let a = a0 + j as f64;
            p = (p - t).max(0.0);
            t *= y / (a + 1.0);
            w *= m / (j + 1) as f64;
            j += 1;
            sum += w * p;
            let jf = j as f64;
            if jf + 1.0 > m {
                let ratio = m / (jf + 1.0);
                let tail = w * ratio / (1.0 - ratio).max(1e-300);
                if tail * p < TAIL_BOUND || tail < TAIL_BOUND {
                    break;
                }
            }
            if j > mode_j + 100_000 {
                break;
            }
        }
        sum.clamp(0.0, 1.0)
    }

    /// Inverse CDF: the `x` with `cdf(x) = p`, found by bisection on the
    /// bracket `[0, dof + lambda + 20 sqrt(2 dof + 4 lambda) + 50]`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::ProbabilityOutOfRange(p));
        }
        let k = self.dof as f64;
        let mut lo = 0.0;
        let mut hi = k + self.lambda + 20.0 * (2.0 * k + 4.0 * self.lambda).sqrt() + 50.0;
        while self.cdf(hi) < p {
            lo = hi;
            hi *= 2.0;
            if !hi.is_finite() {
                return Err(Error::Calibration(format!("no quantile bracket for p = {p}")));
            }
        }
        for _ in 0..300 {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-14 * hi.max(1.0) {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_dof_central_closed_form() {
        let d = NoncentralChi2::new(2, 0.0).unwrap();
        for &x in &[0.1, 1.0, 5.0, 18.4207, 40.0] {
            let exact = -(-x / 2.0f64).exp_m1();
            assert!((d.cdf(x) - exact).abs() <= 1e-10, "x={x}");
        }
        assert!((d.cdf(18.4207) - 0.9999).abs() < 1e-6);
    }

    #[test]
    fn support_boundary() {
        for (dof, lambda) in [(1, 0.0), (2, 1.0), (6, 30.0)] {
            let d = NoncentralChi2::new(dof, lambda).unwrap();
            assert_eq!(d.cdf(0.0), 0.0);
            assert_eq!(d.cdf(-3.0), 0.0);
        }
    }

    #[test]
    fn two_dof_quantile() {
        let d = NoncentralChi2::new(2, 0.0).unwrap();
        let q = d.quantile(1.0 - 1e-4).unwrap();
        assert!((q - (-2.0 * 1e-4f64.ln())).abs() < 1e-8, "{q}");
        assert!((q - 18.4207).abs() < 1e-4);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(NoncentralChi2::new(0, 1.0).is_err());
        assert!(NoncentralChi2::new(2, -1.0).is_err());
        assert!(NoncentralChi2::new(2, f64::NAN).is_err());
        let d = NoncentralChi2::new(2, 1.0).unwrap();
        for p in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(d.quantile(p).is_err());
        }
    }

    #[test]
    fn roundtrip_six_dof() {
        let d = NoncentralChi2::new(6, 2.0).unwrap();
        for &x in &[1.0, 5.0, 30.0] {
            let back = d.quantile(d.cdf(x)).unwrap();
            assert!((back - x).abs() <= 1e-8, "x={x} back={back}");
        }
    }

    /// Independent route: numerically integrate the Bessel-form density
    /// f(x) = 1/2 e^{-(x+λ)/2} (x/λ)^{k/4-1/2} I_{k/2-1}(sqrt(λ x))
    /// with I_ν from its power series.
    fn density_oracle(x: f64, k: f64, lambda: f64) -> f64 {
        let nu = k / 2.0 - 1.0;
        let z = (lambda * x).sqrt();
        let mut term = (z / 2.0).powf(nu) / super::ln_gamma(nu + 1.0).exp();
        let mut bessel = term;
        for m in 1..400 {
            let mf = m as f64;
            term *= (z * z / 4.0) / (mf * (mf + nu));
            bessel += term;
            if term < 1e-18 * bessel {
                break;
            }
        }
        0.5 * (-(x + lambda) / 2.0).exp() * (x / lambda).powf(k / 4.0 - 0.5) * bessel
    }

    #[test]
    fn cdf_matches_density_quadrature() {
        for &(k, lambda, x) in &[(4.0, 5.0, 6.0), (6.0, 2.0, 10.0), (2.0, 12.0, 20.0)] {
            // Composite Simpson on [0, x]; the integrand is smooth for k >= 2.
            let n = 20_000;
            let h = x / n as f64;
            let f = |t: f64| if t == 0.0 { if k == 2.0 { 0.5 * (-lambda / 2.0f64).exp() } else { 0.0 } } else { density_oracle(t, k, lambda) };
            let mut s = f(0.0) + f(x);
            for i in 1..n {
                s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            let integral = s * h / 3.0;
            let d = NoncentralChi2::new(k as u32, lambda).unwrap();
            assert!((d.cdf(x) - integral).abs() < 1e-9, "k={k} λ={lambda} x={x}: {} vs {integral}", d.cdf(x));
        }
    }

    #[test]
    fn large_noncentrality_is_normalized() {
        let d = NoncentralChi2::new(12, 400.0).unwrap();
        assert!(d.cdf(1e4) > 1.0 - 1e-12);
        let med = d.quantile(0.5).unwrap();
        // Mean is 412; the median sits just below it.
        assert!((med - 411.0).abs() < 3.0, "{med}");
    }
}
