//! Eve's best exponent against the combined test, as in the table1 study.
//!
//! `cargo run --release --example attack_exponent [alpha] [n_channels] [rho_ae]`

use authsim::channel::snr_db_to_variance;
use authsim::experiments::{matched_exponent, DetectorSpec, EveKnowledge, ScenarioOptions};
use authsim::{Scenario, SystemParams};

fn main() -> authsim::Result<()> {
    let mut args = std::env::args().skip(1);
    let mut next = |default: f64| args.next().map_or(Ok(default), |a| a.parse::<f64>()).expect("arguments must be numbers");
    let (alpha, n, rho) = (next(0.9), next(6.0) as usize, next(0.1));
    let p = SystemParams::uniform(n, alpha, snr_db_to_variance(15.0), snr_db_to_variance(20.0), rho);
    let s = Scenario::new("exponent", p, DetectorSpec::Combined).with_options(ScenarioOptions {
        eve: EveKnowledge::KnowsAlpha,
        calibration_trials: 200_000,
        exponent_trials: 50_000,
        ..ScenarioOptions::default()
    });

    let search = matched_exponent(&s, 1)?;
    for (x, r) in &search.grid {
        let mark = if *x == search.best { "  <- best" } else { "" };
        println!("x = {x:>4.1}  MD {:.4} +- {:.4}{mark}", r.raw(), 2.0 * r.std_error());
    }
    Ok(())
}
