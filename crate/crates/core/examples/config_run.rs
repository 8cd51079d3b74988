//! Drive a run from configuration text, as the command-line tool does.
//!
//! `cargo run --release --example config_run [config-file]`

use authsim::config::parse_config;
use authsim::report::emit_report;
use authsim::run_scenario;

const DEFAULT: &str = "\
scenario = table2
alpha = 1
n_channels = 2
detector = llr
trials_h0 = 100000
trials_h1 = 100000
format = json
";

fn main() -> authsim::Result<()> {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path).expect("readable config file"),
        None => DEFAULT.to_string(),
    };
    let cfg = parse_config(&text)?;
    let results = cfg
        .scenarios()?
        .iter()
        .map(|s| run_scenario(s, cfg.jobs))
        .collect::<authsim::Result<Vec<_>>>()?;
    print!("{}", emit_report(&results, cfg.format)?);
    Ok(())
}
