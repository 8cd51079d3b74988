//! Random sampling and the distribution family behind analytic calibration.

mod binomial;
mod chi2;
mod gamma;

pub use binomial::{wilson_interval, RateEstimate, Z_95};
pub use chi2::{central_chi2_cdf, NoncentralChi2};
pub use gamma::{ln_gamma, regularized_lower_gamma};

use std::ops::Deref;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng::RandomStream;

/// Channel gains on `N` sub-carriers.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVector(Vec<Complex64>);

impl ComplexVector {
    /// Wrap entries, rejecting an empty or non-finite vector.
    pub fn new(entries: Vec<Complex64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::param("entries", "vector must have at least one entry"));
        }
        if let Some(i) = entries.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::param("entries", format!("entry {i} is not finite")));
        }
        Ok(ComplexVector(entries))
    }

    pub(crate) fn from_vec(entries: Vec<Complex64>) -> Self {
        ComplexVector(entries)
    }

    pub fn zeros(n: usize) -> Self {
        ComplexVector(vec![Complex64::new(0.0, 0.0); n])
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }

    /// Entry-wise sum; lengths must agree.
    pub fn add(&self, other: &ComplexVector) -> Result<ComplexVector> {
        check_len(self.len(), other.len())?;
        Ok(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn scale(&self, factor: f64) -> ComplexVector {
        self.0.iter().map(|z| z * factor).collect()
    }
}

impl Deref for ComplexVector {
    type Target = [Complex64];

    fn deref(&self) -> &[Complex64] {
        &self.0
    }
}

impl FromIterator<Complex64> for ComplexVector {
    fn from_iter<I: IntoIterator<Item = Complex64>>(iter: I) -> Self {
        ComplexVector(iter.into_iter().collect())
    }
}

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, actual })
    }
}

/// One circularly symmetric complex Gaussian draw with total variance
/// `variance` (each of the real and imaginary parts carries half).
#[inline]
pub(crate) fn complex_normal(stream: &mut RandomStream, variance: f64) -> Complex64 {
    let re: f64 = stream.sample(StandardNormal);
    let im: f64 = stream.sample(StandardNormal);
    let s = (0.5 * variance).sqrt();
    Complex64::new(s * re, s * im)
}

pub(crate) fn check_variance(name: &'static str, v: f64) -> Result<()> {
    if !v.is_finite() || v < 0.0 {
        return Err(Error::param(name, format!("variance must be finite and >= 0, got {v}")));
    }
    Ok(())
}

/// Draw `n` i.i.d. CN(0, `variance`) entries.
pub fn sample_complex_gaussian(
    n: usize,
    variance: f64,
    stream: &mut RandomStream,
) -> Result<ComplexVector> {
    if n == 0 {
        return Err(Error::param("n", "need at least one entry"));
    }
    check_variance("variance", variance)?;
    Ok((0..n).map(|_| complex_normal(stream, variance)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamKey;

    #[test]
    fn zero_variance_gives_exact_zeros() {
        let mut s = StreamKey::new(5).stream();
        let v = sample_complex_gaussian(4, 0.0, &mut s).unwrap();
        assert_eq!(v, ComplexVector::zeros(4));
    }

    #[test]
    fn rejects_bad_variance() {
        let mut s = StreamKey::new(5).stream();
        assert!(sample_complex_gaussian(3, -1.0, &mut s).is_err());
        assert!(sample_complex_gaussian(3, f64::NAN, &mut s).is_err());
        assert!(sample_complex_gaussian(3, f64::INFINITY, &mut s).is_err());
        assert!(sample_complex_gaussian(0, 1.0, &mut s).is_err());
    }

    #[test]
    fn sample_mean_is_small() {
        // Per-component standard error is sqrt(1/2)/sqrt(n); 4/sqrt(n) is > 5 SE.
        let n = 100_000;
        let mut s = StreamKey::new(11).stream();
        let v = sample_complex_gaussian(n, 1.0, &mut s).unwrap();
        let mean_re = v.iter().map(|z| z.re).sum::<f64>() / n as f64;
        let mean_im = v.iter().map(|z| z.im).sum::<f64>() / n as f64;
        let bound = 4.0 / (n as f64).sqrt();
        assert!(mean_re.abs() < bound, "{mean_re}");
        assert!(mean_im.abs() < bound, "{mean_im}");
    }

    #[test]
    fn per_entry_variance_matches() {
        // Var of |z|^2 for CN(0,2) is 4, so SE of the mean is 2/sqrt(n) = 0.0063;
        // [1.94, 2.06] is about +-9.5 SE.
        let n = 100_000;
        let mut s = StreamKey::new(12).stream();
        let v = sample_complex_gaussian(n, 2.0, &mut s).unwrap();
        let var = v.iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64;
        assert!((1.94..=2.06).contains(&var), "{var}");
    }

    #[test]
    fn fourth_moment_of_real_part() {
        // Real parts are N(0, v/2): E[x^4] = 3 (v/2)^2, Var[x^4] = 105 (v/2)^4 - 9 (v/2)^4.
        let n = 1_000_000;
        let variance = 2.0;
        let half = variance / 2.0;
        let mut s = StreamKey::new(13).stream();
        let v = sample_complex_gaussian(n, variance, &mut s).unwrap();
        let m4 = v.iter().map(|z| z.re.powi(4)).sum::<f64>() / n as f64;
        let expected = 3.0 * half * half;
        let se = (96.0 * half.powi(4) / n as f64).sqrt();
        assert!((m4 - expected).abs() < 5.0 * se, "m4={m4} expected={expected} se={se}");
    }

    #[test]
    fn complex_vector_validation() {
        assert!(ComplexVector::new(vec![]).is_err());
        assert!(ComplexVector::new(vec![Complex64::new(f64::NAN, 0.0)]).is_err());
        let v = ComplexVector::new(vec![Complex64::new(1.0, 2.0)]).unwrap();
        assert_eq!(v.len(), 1);
        assert!(v.add(&ComplexVector::zeros(2)).is_err());
    }
}
