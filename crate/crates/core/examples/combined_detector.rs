//! Joint (theta, epsilon) search for the combined test against a fixed attack.
//!
//! `cargo run --release --example combined_detector [exponent]`

use authsim::channel::snr_db_to_variance;
use authsim::detectors::optimize_thresholds;
use authsim::{AttackStrategy, BobModel, StreamKey, SystemParams};

fn main() -> authsim::Result<()> {
    let x: f64 = std::env::args().nth(1).map_or(Ok(1.0), |a| a.parse()).expect("exponent must be a number");
    let p = SystemParams::uniform(3, 0.9, snr_db_to_variance(15.0), snr_db_to_variance(20.0), 0.1);
    let attack = AttackStrategy::exponent(x)?;

    let opt = optimize_thresholds(&p, &BobModel::default(), 1e-3, &attack, 200_000, StreamKey::new(1), 1)?;
    println!("attack {attack}");
    println!("theta {:.4}  epsilon {:.4}", opt.rule.theta, opt.rule.epsilon);
    println!("FA {:.3e}  MD {:.4}", opt.pfa.estimate, opt.pmd.estimate);
    println!("\n{:>10} {:>10} {:>8}", "epsilon", "theta", "MD");
    for (eps, theta, md) in opt.frontier.iter().step_by(4) {
        println!("{eps:>10.4} {theta:>10.4} {:>8.4}", md.estimate);
    }
    Ok(())
}
