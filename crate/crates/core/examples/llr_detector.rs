//! LLR test error rates under each threshold calibration.
//!
//! `cargo run --release --example llr_detector [alpha] [n_channels]`

use authsim::channel::snr_db_to_variance;
use authsim::experiments::{DetectorSpec, LlrCalibration};
use authsim::{run_scenario, Scenario, SystemParams};

fn main() -> authsim::Result<()> {
    let mut args = std::env::args().skip(1);
    let alpha: f64 = args.next().map_or(Ok(0.9), |a| a.parse()).expect("alpha must be a number");
    let n: usize = args.next().map_or(Ok(3), |a| a.parse()).expect("n_channels must be an integer");
    let p = SystemParams::uniform(n, alpha, snr_db_to_variance(15.0), snr_db_to_variance(20.0), 0.1);

    for calibration in [LlrCalibration::Auto, LlrCalibration::Analytic, LlrCalibration::Central, LlrCalibration::MonteCarlo] {
        let s = Scenario::new(format!("llr/{calibration}"), p.clone(), DetectorSpec::Llr { calibration })
            .with_target_pfa(1e-3)
            .with_trials(200_000, 100_000);
        let r = run_scenario(&s, 1)?;
        println!(
            "{:<10} FA {:.3e}  MD {:.4}  {:?}",
            calibration.to_string(),
            r.pfa.estimate,
            r.pmd.estimate,
            r.calibration
        );
    }
    Ok(())
}
