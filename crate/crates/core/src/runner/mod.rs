//! Config-driven experiment runs and their reports.

pub mod config;
pub mod experiments;

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::domain::io::fmt;
use crate::error::{LabError, Result};
use crate::flow::FlowTrace;
use crate::functionals::ConventionConstants;
use crate::lab::EstimateRecord;

pub use config::ExperimentConfig;
pub use experiments::{find, Experiment, REGISTRY};

/// A CSV table produced by an experiment.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Records, flow traces and tables of one run.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub records: Vec<EstimateRecord>,
    pub traces: Vec<(String, FlowTrace)>,
    pub tables: Vec<Table>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.records.iter().all(|r| r.verdict)
    }

    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| !r.verdict).count()
    }
}

/// Runs the experiment named in `cfg`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Outcome> {
    let exp = find(&cfg.experiment)
        .ok_or_else(|| LabError::Usage(format!("unknown experiment {:?}; see `cma-lab list`", cfg.experiment)))?;
    (exp.run)(cfg)
}

fn sorted(records: &[EstimateRecord]) -> Vec<&EstimateRecord> {
    let mut v: Vec<&EstimateRecord> = records.iter().collect();
    v.sort_by(|a, b| {
        a.name.cmp(&b.name).then_with(|| {
            let ka: Vec<(&String, u64)> = a.params.iter().map(|(k, x)| (k, x.to_bits())).collect();
            let kb: Vec<(&String, u64)> = b.params.iter().map(|(k, x)| (k, x.to_bits())).collect();
            ka.cmp(&kb)
        })
    });
    v
}

/// JSON lines of the records, sorted by name and parameters.
pub fn records_jsonl(records: &[EstimateRecord]) -> Result<String> {
    let mut s = String::new();
    for r in sorted(records) {
        s.push_str(&r.to_json_line()?);
        s.push('\n');
    }
    Ok(s)
}

/// Plain-text summary with the normalisation constants in the header and
/// the failure count in the footer.
pub fn emit_report(records: &[EstimateRecord]) -> String {
    let mut s = String::new();
    let mut dims: Vec<usize> =
        records.iter().filter_map(|r| r.params.get("n")).map(|n| *n as usize).filter(|n| *n > 0).collect();
    dims.sort_unstable();
    dims.dedup();
    let consts: Vec<String> = dims
        .iter()
        .map(|&n| {
            let c = ConventionConstants::new(n);
            format!("kappa_{n} = {}", c.kappa_n)
        })
        .collect();
    let _ = writeln!(s, "# (dd^c u)^n = kappa_n det(u_ij) dmu; {}", consts.join(", "));
    if records.is_empty() {
        let _ = writeln!(s, "no records");
        return s;
    }
    let _ = writeln!(s, "{:<20} {:<6} {:>22} {:>22}  params", "name", "pass", "estimate", "extrapolated");
    for r in sorted(records) {
        let params: Vec<String> = r.params.iter().map(|(k, v)| format!("{k}={}", fmt(*v))).collect();
        let _ = writeln!(
            s,
            "{:<20} {:<6} {:>22} {:>22}  {}{}",
            r.name,
            if r.verdict { "PASS" } else { "FAIL" },
            fmt(r.estimate),
            fmt(r.extrapolated),
            params.join(" "),
            r.bracket.map_or(String::new(), |[a, b]| format!(" bracket=[{}, {}]", fmt(a), fmt(b))),
        );
    }
    let failed = records.iter().filter(|r| !r.verdict).count();
    let _ = writeln!(s, "{} records, {} failed", records.len(), failed);
    s
}

/// Writes `records.jsonl`, `summary.txt`, `summary.json` and one CSV per
/// trace and table into `dir`.
pub fn write_artifacts(outcome: &Outcome, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("records.jsonl"), records_jsonl(&outcome.records)?)?;
    fs::write(dir.join("summary.txt"), emit_report(&outcome.records))?;
    let summary = serde_json::json!({
        "records": outcome.records.len(),
        "failed": outcome.failures(),
        "passed": outcome.passed(),
    });
    fs::write(dir.join("summary.json"), format!("{summary}\n"))?;
    for (name, trace) in &outcome.traces {
        trace.write_csv(fs::File::create(dir.join(format!("trace-{name}.csv")))?)?;
    }
    for t in &outcome.tables {
        t.write_csv(fs::File::create(dir.join(format!("table-{}.csv", t.name)))?)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_is_sorted_and_counts_failures() {
        let mut a = EstimateRecord::new("b", "f").param("n", 2.0).with_values(vec![1], vec![1.0], 2.0);
        a.verdict = true;
        let b = EstimateRecord::new("a", "f").param("n", 1.0).with_values(vec![1], vec![2.0], 2.0);
        let s = emit_report(&[a.clone(), b.clone()]);
        assert!(s.find("\na ").unwrap() < s.find("\nb ").unwrap());
        assert!(s.contains("kappa_1 = 4") && s.contains("kappa_2 = 32"));
        assert!(s.trim_end().ends_with("2 records, 1 failed"));
        assert_eq!(records_jsonl(&[a.clone(), b.clone()]).unwrap(), records_jsonl(&[b, a]).unwrap());
        assert!(emit_report(&[]).contains("no records"));
    }

    #[test]
    fn unknown_experiment_is_usage_error() {
        assert!(matches!(run_experiment(&ExperimentConfig::new("nope")), Err(LabError::Usage(_))));
    }
}
