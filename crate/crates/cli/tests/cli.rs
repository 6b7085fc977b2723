//! End-to-end runs of the `phcsim` binary.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn phcsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phcsim")).args(args).output().expect("spawn phcsim")
}

fn repo_file(rel: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .join(rel)
        .display()
        .to_string()
}

const SMALL: &str = r#"{"schema_version": 1, "configuration": {"id": 2},
    "replications": 2, "horizon_days": 15, "warmup_days": 3,
    "sweep": {"consult_mean": [1, 3]}}"#;

#[test]
fn analytics_prints_closed_forms() {
    let out = phcsim(&["analytics", &repo_file("scenarios/validation_classes.json")]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    // Two doctors: 0.25 * 0.87 / 2 + 8.68e-5 * 20 / 2 + 1.736e-4 * 45 / 2
    let rho_a = 0.25 * 0.87 / 2.0 + 0.000086806 * 20.0 / 2.0 + 0.00017361 * 45.0 / 2.0;
    assert!((v["rho_a"].as_f64().unwrap() - rho_a).abs() < 1e-9);
    assert_eq!(v["rho_a"], v["rho_ap"]);
}

#[test]
fn sweep_writes_csv_and_honours_sequential() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("s.json");
    fs::write(&spec, SMALL).unwrap();
    let csv = |name: &str, extra: &[&str]| {
        let path = dir.path().join(name);
        let mut args = vec!["sweep", spec.to_str().unwrap(), "--out", path.to_str().unwrap()];
        args.extend_from_slice(extra);
        let out = phcsim(&args);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        fs::read_to_string(path).unwrap()
    };
    let par = csv("par.csv", &[]);
    let seq = csv("seq.csv", &["--sequential"]);
    assert_eq!(par, seq);
    assert_eq!(par.lines().count(), 3);
    assert!(par.lines().nth(1).unwrap().starts_with("consult_mean=1,"));
}

#[test]
fn seed_flag_changes_results() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("s.json");
    fs::write(&spec, SMALL).unwrap();
    let run = |seed: &str| phcsim(&["simulate", spec.to_str().unwrap(), "--format", "json", "--seed", seed]).stdout;
    assert_eq!(run("1"), run("1"));
    assert_ne!(run("1"), run("2"));
}

#[test]
fn errors_exit_with_status_two() {
    let out = phcsim(&["reproduce", "table9"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown exhibit"));

    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("bad.json");
    fs::write(&spec, r#"{"schema_version": 1, "configuration": {"id": 2, "overrides": {"consult_meen": 2}}}"#).unwrap();
    let out = phcsim(&["simulate", spec.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("consult_meen"));
}

#[test]
fn trace_flag_writes_event_log() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("s.json");
    fs::write(&spec, SMALL).unwrap();
    let trace = dir.path().join("trace.csv");
    let out = phcsim(&["simulate", spec.to_str().unwrap(), "--trace", trace.to_str().unwrap(), "--reps", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(trace).unwrap();
    assert!(text.starts_with("time,patient,class,resource,event\n"));
    assert!(text.lines().count() > 100);
}
