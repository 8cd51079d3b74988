//! Error rates for one row of a comparison table at a reduced budget.
//!
//! `cargo run --release --example error_tables [study] [alpha]`

use authsim::experiments::{study, ScenarioOptions};
use authsim::report::{emit_report, Format};
use authsim::run_scenario;

fn main() -> authsim::Result<()> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "table3".into());
    let alpha = args.next().unwrap_or_else(|| "1".into());
    let prefix = format!("{name}/alpha={alpha}/");

    let mut rows = Vec::new();
    for s in study(&name)?.scenarios.into_iter().filter(|s| s.name.starts_with(&prefix)) {
        let s = s.with_trials(20_000, 20_000).with_options(ScenarioOptions {
            calibration_trials: 200_000,
            exponent_trials: 20_000,
            training_size: 500,
            ..ScenarioOptions::default()
        });
        let s = if s.target_pfa < 1e-3 { s.with_target_pfa(1e-3) } else { s };
        rows.push(run_scenario(&s, 1)?);
    }
    print!("{}", emit_report(&rows, Format::Csv)?);
    Ok(())
}
