//! One trial of the fading model under each hypothesis.
//!
//! `cargo run --release --example channel_model [seed]`

use authsim::channel::{snr_db_to_variance, TrialSample};
use authsim::detectors::{llr_statistic, modulus_statistic};
use authsim::{AttackStrategy, Hypothesis, StreamKey, SystemParams};

fn main() -> authsim::Result<()> {
    let seed: u64 = std::env::args().nth(1).map_or(Ok(1), |a| a.parse()).expect("seed must be an integer");
    let p = SystemParams::uniform(3, 0.9, snr_db_to_variance(15.0), snr_db_to_variance(20.0), 0.5);
    let sigma2 = p.h0_variance();
    println!("H0 per-entry variance of obs - ref: {:.4}", sigma2[0]);

    let key = StreamKey::new(seed);
    for (i, truth) in [Hypothesis::H0, Hypothesis::H1].into_iter().enumerate() {
        let t = TrialSample::draw(&p, truth, &AttackStrategy::Llr, &mut key.trial(i as u64))?;
        println!("\n{truth:?}");
        for (n, (r, o)) in t.h_ab_hat.iter().zip(t.observation.iter()).enumerate() {
            println!("  n={n} ref {r:.3}  obs {o:.3}");
        }
        let psi = llr_statistic(&t.observation, &t.h_ab_hat, &sigma2)?;
        let gamma = modulus_statistic(&t.observation, &t.h_ab_hat)?;
        println!("  Psi = {psi:.3}  Gamma = {gamma:.3}");
    }
    Ok(())
}
