//! Missed detection versus the number of sub-carriers for the LLR and
//! combined tests, paired seeds across points.
//!
//! `cargo run --release --example fig2_sweep [alpha]`

use authsim::experiments::{study, ScenarioOptions};
use authsim::report::{emit_report, Format};
use authsim::sweep;

fn main() -> authsim::Result<()> {
    let alpha: f64 = std::env::args().nth(1).map_or(Ok(0.9), |a| a.parse()).expect("alpha must be a number");
    let fig2 = study("fig2")?;
    let mut rows = Vec::new();
    for det in ["LLR", "comb"] {
        let base = fig2
            .scenarios
            .iter()
            .find(|s| s.name == format!("fig2/alpha={alpha}/N=1/{det}"))
            .expect("alpha is one of 1, 0.9, 0.8")
            .clone()
            .with_trials(10_000, 50_000)
            .with_options(ScenarioOptions {
                calibration_trials: 200_000,
                exponent_trials: 20_000,
                ..ScenarioOptions::default()
            })
            .with_target_pfa(1e-3);
        rows.extend(sweep(&base, "n_channels", &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0], 1)?);
    }
    print!("{}", emit_report(&rows, Format::Csv)?);
    Ok(())
}
