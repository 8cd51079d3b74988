//! Train a one-class nearest-neighbour classifier, save it, reload it and
//! score a legitimate and a forged estimate.
//!
//! `cargo run --release --example ocnn_classifier [variant]`

use authsim::channel::{self, snr_db_to_variance};
use authsim::experiments::{train_ocnn, DetectorSpec, ScenarioOptions};
use authsim::ocnn::featurize;
use authsim::{AttackStrategy, OcnnModel, OcnnVariant, Scenario, StreamKey, SystemParams};

fn main() -> authsim::Result<()> {
    let variant: OcnnVariant = std::env::args().nth(1).map_or(Ok(OcnnVariant::OneK), |a| a.parse())?;
    let p = SystemParams::uniform(2, 1.0, snr_db_to_variance(15.0), snr_db_to_variance(20.0), 0.8);
    let s = Scenario::new("ocnn", p.clone(), DetectorSpec::Ocnn { variant })
        .with_target_pfa(1e-2)
        .with_options(ScenarioOptions {
            training_size: 500,
            ..ScenarioOptions::default()
        });

    let (h, model) = train_ocnn(&s, 0)?;
    println!("{variant}: j = {}, k = {}, theta_d = {:.4}", model.j(), model.k(), model.theta_d());

    let doc = model.to_document();
    let model = OcnnModel::from_document(&doc)?;
    println!("model document: {} lines", doc.lines().count());

    let mut stream = StreamKey::new(42).stream();
    let legit = channel::legit_observation(&h, &p, &mut stream)?;
    let (ae, eb) = channel::eve_observations(&h, &p, &mut stream)?;
    let forged = channel::forged_observation(&AttackStrategy::Llr.forge(&ae, &eb, &p)?, &p, &mut stream)?;
    for (label, obs) in [("legitimate", legit), ("forged", forged)] {
        let f = featurize(&obs);
        println!("{label:<10} score {:.4} accepted {}", model.score(&f)?, model.accepts(&f)?);
    }
    Ok(())
}
