//! Exit codes and artifacts of the `cma-lab` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cma_lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cma-lab")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn list_names_every_experiment() {
    let out = cma_lab(&["list"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for e in cma_lab::runner::REGISTRY {
        assert!(text.contains(e.name), "{}", e.name);
    }
}

#[test]
fn passing_run_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "rt.conf", "experiment = radial-roundtrip\nn = 1, 2\nresolutions = 256, 512\n");
    let out_dir = dir.path().join("out");
    let out = cma_lab(&["run", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let lines = fs::read_to_string(out_dir.join("records.jsonl")).unwrap();
    assert_eq!(lines.lines().count(), 2);
    for l in lines.lines() {
        let v: serde_json::Value = serde_json::from_str(l).unwrap();
        assert_eq!(v["verdict"], true);
    }
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["failed"], 0);
    let mut rdr = csv::Reader::from_path(out_dir.join("table-roundtrip.csv")).unwrap();
    assert_eq!(rdr.records().count(), 4);
}

#[test]
fn experiment_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.conf", "experiment = llogl\nn = 1\n");
    let out = cma_lab(&["run", &cfg, "--experiment", "quasi-bm"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().contains("quasi-bm"));
}

#[test]
fn failed_verdict_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    // a bracket cannot be narrower than the bisection width
    let cfg = write(dir.path(), "f.conf", "experiment = mt-alpha\nn = 1\nmax_rel_width = 0.001\n");
    let out = cma_lab(&["run", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stdout).unwrap().contains("FAIL"));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        write(dir.path(), "a.conf", "experiment = no-such-thing\n"),
        write(dir.path(), "b.conf", "n = 1\n"),
        write(dir.path(), "c.conf", "experiment = slice\nresolutions = 9, 3\n"),
        write(dir.path(), "d.conf", "experiment = quasi-bm\nlevels = many\n"),
        write(dir.path(), "e.conf", "experiment = sobolev-t\nbackend = planar\nn = 2\n"),
    ];
    for c in &cases {
        assert_eq!(cma_lab(&["run", c]).status.code(), Some(2), "{c}");
    }
    assert_eq!(cma_lab(&["run", "/nonexistent/x.conf"]).status.code(), Some(2));
    assert_eq!(cma_lab(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(cma_lab(&["run"]).status.code(), Some(2));
}
