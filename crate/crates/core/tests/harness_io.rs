//! Scenario files, sweeps and result export through the filesystem.

use std::fs;
use std::path::PathBuf;

use phc_core::exec::Execution;
use phc_core::harness::{
    parse_scenario, run_sweep, write_trace, Format, HarnessError, ResultTable, ScenarioSpec,
};
use phc_core::kernel::replication_seed;
use phc_core::model::run_replication;

fn scenarios_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn small_sweep() -> ScenarioSpec {
    ScenarioSpec::from_json(
        r#"{"schema_version": 1, "name": "small", "configuration": {"id": 1},
            "replications": 2, "horizon_days": 20, "warmup_days": 4, "seed": 3,
            "sweep": {"opd_iat": [4, 8], "consult_mean": [1, 2]}}"#,
    )
    .unwrap()
}

#[test]
fn bundled_scenarios_parse_and_validate() {
    let mut seen = 0;
    for entry in fs::read_dir(scenarios_dir()).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        if path.extension().is_some_and(|e| e == "json") && name != "validation_classes.json" {
            let spec = parse_scenario(&path).unwrap_or_else(|e| panic!("{name}: {e}"));
            spec.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
            assert!(spec.scenarios().unwrap().iter().all(|s| s.config.is_ok()), "{name}");
            seen += 1;
        }
    }
    assert!(seen >= 4);
}

#[test]
fn exported_tables_read_back_at_six_significant_digits() {
    let table = run_sweep(&small_sweep(), Execution::default()).unwrap();
    assert_eq!(table.rows.len(), 4);
    let dir = tempfile::tempdir().unwrap();
    for fmt in [Format::Csv, Format::Json] {
        let path = dir.path().join(format!("out.{fmt:?}").to_lowercase());
        table.export(&path, fmt).unwrap();
        let back = ResultTable::import(&path, fmt).unwrap();
        let expected = table.rounded();
        assert_eq!(back.columns, expected.columns, "{fmt:?}");
        assert_eq!(back.rows, expected.rows, "{fmt:?}");
    }
    let csv = fs::read_to_string(dir.path().join("out.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert!(header.starts_with("scenario,seed,replications,doctor_utilization,doctor_utilization_sd"));
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn sweeps_are_reproducible_from_the_file_alone() {
    let a = run_sweep(&small_sweep(), Execution::Sequential).unwrap();
    let b = run_sweep(&small_sweep(), Execution::Parallel).unwrap();
    assert_eq!(a, b);
}

#[test]
fn bad_files_name_the_offending_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(
        &path,
        r#"{"schema_version": 1, "configuration": {"id": 2}, "sweep": {"consult_mean": [1, "x"]}}"#,
    )
    .unwrap();
    match parse_scenario(&path) {
        Err(HarnessError::Parse { path, .. }) => assert!(path.contains("sweep.consult_mean"), "{path}"),
        other => panic!("expected a parse error, got {other:?}"),
    }
    let missing = dir.path().join("missing.json");
    assert!(matches!(parse_scenario(&missing), Err(HarnessError::Io { .. })));
}

#[test]
fn trace_file_is_time_ordered() {
    let spec = small_sweep();
    let cfg = spec.base_configuration().unwrap();
    let run = run_replication(&cfg, replication_seed(spec.seed, 0), spec.run_length().horizon().unwrap(), true).unwrap();
    let trace = run.trace.unwrap();
    assert!(!trace.is_empty());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.csv");
    write_trace(&path, &trace).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("time,patient,class,resource,event"));
    let times: Vec<f64> = lines.map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(times.len(), trace.len());
    assert!(times.windows(2).all(|w| w[0] <= w[1]));
}
