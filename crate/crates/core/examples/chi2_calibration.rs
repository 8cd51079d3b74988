//! Analytic LLR thresholds from the noncentral chi-square law.
//!
//! `cargo run --release --example chi2_calibration [target_pfa]`

use authsim::detectors::calibrate_llr_threshold;
use authsim::stats::NoncentralChi2;

fn main() -> authsim::Result<()> {
    let target: f64 = std::env::args().nth(1).map_or(Ok(1e-4), |a| a.parse()).expect("target_pfa must be a number");

    println!("{:>3} {:>10} {:>12} {:>12}", "N", "mu", "theta", "check");
    for n in 1..=6 {
        for mu in [0.0, 0.5, 2.0] {
            let theta = calibrate_llr_threshold(target, mu, n)?;
            let d = NoncentralChi2::new(2 * n as u32, mu)?;
            println!("{n:>3} {mu:>10} {theta:>12.6} {:>12.3e}", 1.0 - d.cdf(theta));
        }
    }
    Ok(())
}
