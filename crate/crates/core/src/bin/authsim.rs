//! Batch front-end: `authsim run|sweep|list-scenarios|tune-ocnn`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use authsim::config::{parse_config, RunConfig};
use authsim::experiments::{run_scenario, study, sweep, train_ocnn, STUDY_NAMES};
use authsim::report::{emit_report, write_report, Format};
use authsim::Error;

#[derive(Parser)]
#[command(name = "authsim", version, about = "Monte Carlo evaluation of channel-based authentication")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every scenario the configuration selects.
    Run(Common),
    /// Run the configured scenario once per `values` entry along `axis`.
    Sweep(Common),
    /// List the registered studies.
    ListScenarios,
    /// Train a classifier on the configured scenario and write the model.
    TuneOcnn(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials_h0: Option<u64>,
    #[arg(long)]
    trials_h1: Option<u64>,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    format: Option<String>,
}

fn config_error(e: impl std::fmt::Display) -> Error {
    Error::Config {
        line: 0,
        key: "--config".into(),
        reason: e.to_string(),
    }
}

fn load(c: &Common) -> Result<RunConfig, Error> {
    let mut cfg = match &c.config {
        Some(path) => parse_config(&std::fs::read_to_string(path).map_err(config_error)?)?,
        None => RunConfig::default(),
    };
    if c.seed.is_some() {
        cfg.seed = c.seed;
    }
    if c.trials_h0.is_some() {
        cfg.trials_h0 = c.trials_h0;
    }
    if c.trials_h1.is_some() {
        cfg.trials_h1 = c.trials_h1;
    }
    if let Some(j) = c.jobs {
        if j == 0 {
            return Err(config_error("--jobs must be positive"));
        }
        cfg.jobs = j;
    }
    if c.out.is_some() {
        cfg.out = c.out.clone();
    }
    if let Some(f) = &c.format {
        cfg.format = f.parse::<Format>().map_err(config_error)?;
    }
    Ok(cfg)
}

fn emit(cfg: &RunConfig, document: &str) -> Result<(), Error> {
    match &cfg.out {
        Some(path) => write_report(document, path),
        None => {
            print!("{document}");
            Ok(())
        }
    }
}

fn execute(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::ListScenarios => {
            for name in STUDY_NAMES {
                let s = study(name)?;
                println!("{:<8} {:>3} scenarios  {}", s.name, s.scenarios.len(), s.description);
            }
            Ok(())
        }
        Command::Run(c) => {
            let cfg = load(&c)?;
            let mut results = Vec::new();
            for s in cfg.scenarios()? {
                results.push(run_scenario(&s, cfg.jobs)?);
            }
            emit(&cfg, &emit_report(&results, cfg.format)?)
        }
        Command::Sweep(c) => {
            let cfg = load(&c)?;
            let axis = cfg.axis_name.clone().ok_or_else(|| config_error("sweep needs `axis` and `values`"))?;
            let mut results = Vec::new();
            for s in cfg.scenarios()? {
                results.extend(sweep(&s, &axis, &cfg.values, cfg.jobs)?);
            }
            if results.is_empty() {
                return Err(config_error("`values` is empty"));
            }
            emit(&cfg, &emit_report(&results, cfg.format)?)
        }
        Command::TuneOcnn(c) => {
            let cfg = load(&c)?;
            let scenarios = cfg.scenarios()?;
            let [s] = scenarios.as_slice() else {
                return Err(config_error("tune-ocnn needs exactly one scenario"));
            };
            let (_, model) = train_ocnn(s, 0)?;
            emit(&cfg, &model.to_document())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let cause = match &e {
                Error::Scenario { source, .. } => source.as_ref(),
                other => other,
            };
            let code = match cause {
                _ if e.is_calibration() => 3,
                Error::Config { .. }
                | Error::UnknownScenario(_)
                | Error::UnknownAxis(_)
                | Error::InvalidParameter { .. }
                | Error::ProbabilityOutOfRange(_) => 2,
                _ => 1,
            };
            ExitCode::from(code)
        }
    }
}
