use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use soar_sim::report::read_flights_csv;

fn manifest(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(rel)
}

fn soar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_soar")).args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn single_run_writes_telemetry_and_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let sc = manifest("presets/field.json");
    let out = soar(&["run", "--scenario", s(&sc), "--seed", "3", "--controller", "pomdsoar", "--out", s(tmp.path())]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&std::fs::read(tmp.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["controller"], "pomdsoar");
    assert!(summary["duration_s"].as_f64().unwrap() > 0.0);
    let telemetry = std::fs::read_to_string(tmp.path().join("telemetry.jsonl")).unwrap();
    let first: serde_json::Value = serde_json::from_str(telemetry.lines().next().unwrap()).unwrap();
    assert_eq!(first["t"], 0.0);
    assert_eq!(first["mode"], "AUTO_GLIDE");
}

#[test]
fn paired_flight_produces_one_row_per_aircraft() {
    let tmp = tempfile::tempdir().unwrap();
    let sc = manifest("presets/valley.json");
    let out = soar(&["paired", "--scenario", s(&sc), "--seed", "5", "--index", "0", "--out", s(tmp.path())]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::File::open(tmp.path().join("flights.csv")).unwrap();
    let flights = read_flights_csv(csv, "flights.csv").unwrap();
    assert_eq!(flights.len(), 1);
    let names: Vec<_> = flights[0].flights.iter().map(|f| f.airframe.as_str()).collect();
    assert!(names.contains(&"YT") && names.contains(&"BT"));
}

#[test]
fn report_on_table_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out = soar(&["report", "--input", s(&manifest("data/table1.csv")), "--out", s(tmp.path())]);
    assert!(out.status.success());
    let r: serde_json::Value = serde_json::from_slice(&std::fs::read(tmp.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(r["tally"]["wins"], 11);
    assert_eq!(r["tally"]["losses"], 1);
    assert_eq!(r["tally"]["draws"], 2);
    assert!((r["sign_test_p"].as_f64().unwrap() - 26.0 / 4096.0).abs() < 1e-12);
}

#[test]
fn unknown_parameter_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let params = tmp.path().join("bad.param");
    std::fs::write(&params, "SOAR_ENABLE=1\nSOAR_BOGUS=3\n").unwrap();
    let sc = manifest("presets/field.json");
    let out = soar(&["run", "--scenario", s(&sc), "--params", s(&params), "--out", s(&tmp.path().join("o"))]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains(":2:") && err.contains("SOAR_BOGUS"), "{err}");
    assert!(!tmp.path().join("o").exists());
}

#[test]
fn bad_scenario_and_missing_input_are_usage_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let sc = tmp.path().join("bad.json");
    std::fs::write(&sc, r#"{"schema_version": 2}"#).unwrap();
    let out = soar(&["baseline", "--scenario", s(&sc), "--out", s(tmp.path())]);
    assert_eq!(out.status.code(), Some(2));
    let out = soar(&["report", "--input", s(&tmp.path().join("none.csv")), "--out", s(tmp.path())]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unwritable_output_exits_with_three() {
    let tmp = tempfile::tempdir().unwrap();
    let blocker = tmp.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let out = soar(&["report", "--input", s(&manifest("data/table1.csv")), "--out", s(&blocker.join("sub"))]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn seed_flag_changes_the_world() {
    let tmp = tempfile::tempdir().unwrap();
    let sc = manifest("presets/field.json");
    let read = |seed: &str| {
        let dir = tmp.path().join(seed);
        assert!(soar(&["run", "--scenario", s(&sc), "--seed", seed, "--out", s(&dir)]).status.success());
        std::fs::read(dir.join("telemetry.jsonl")).unwrap()
    };
    assert_ne!(read("1"), read("2"));
}
