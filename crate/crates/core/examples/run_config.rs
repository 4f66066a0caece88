//! Runs an experiment from a config string and writes its artifacts to a
//! temporary directory.

use cma_lab::runner::{emit_report, run_experiment, write_artifacts, ExperimentConfig};

fn main() -> cma_lab::Result<()> {
    let cfg = ExperimentConfig::parse("experiment = radial-roundtrip\nn = 1, 2\nseed = 3\n")?;
    let outcome = run_experiment(&cfg)?;
    print!("{}", emit_report(&outcome.records));
    let dir = std::env::temp_dir().join("cma-lab-example");
    write_artifacts(&outcome, &dir)?;
    println!("artifacts in {}", dir.display());
    Ok(())
}
