use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cma_lab::runner::{emit_report, run_experiment, write_artifacts, ExperimentConfig, REGISTRY};
use cma_lab::LabError;

#[derive(Parser)]
#[command(name = "cma-lab", version, about = "Complex Monge-Ampere energy laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        /// Overrides the `experiment` key of the config.
        #[arg(long)]
        experiment: Option<String>,
        /// Directory for records.jsonl, summaries and CSV tables.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the registered experiments.
    List,
}

fn run(config: PathBuf, experiment: Option<String>, out: Option<PathBuf>) -> Result<bool, LabError> {
    let mut cfg = ExperimentConfig::from_path(&config)?;
    if let Some(e) = experiment {
        cfg.experiment = e;
    }
    if cfg.experiment.is_empty() {
        return Err(LabError::Usage("no experiment given (config key `experiment` or --experiment)".into()));
    }
    let outcome = run_experiment(&cfg)?;
    print!("{}", emit_report(&outcome.records));
    if let Some(dir) = out.or(cfg.out_dir.clone()) {
        write_artifacts(&outcome, &dir)?;
    }
    Ok(outcome.passed())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match cli.command {
        Command::List => {
            for e in REGISTRY {
                println!("{:<20} {}", e.name, e.summary);
            }
            ExitCode::SUCCESS
        }
        Command::Run { config, experiment, out } => match run(config, experiment, out) {
            Ok(true) => ExitCode::SUCCESS,
            Ok(false) => ExitCode::from(1),
            Err(e @ (LabError::Usage(_) | LabError::Parameter(_) | LabError::Capability(_))) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        },
    }
}
