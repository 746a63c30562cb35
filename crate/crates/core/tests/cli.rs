use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ydde::emit::{write_table, Format, Table};

fn ydde(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ydde"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("YDDE_OUT")
        .output()
        .expect("binary runs")
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

#[test]
fn counterexample_prints_lower_bound() {
    let dir = tempfile::tempdir().unwrap();
    let o = ydde(&["counterexample", "--beta", "0.4", "--p", "2", "--n", "100"], dir.path());
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("lower bound 1.5849"));
    assert!(dir.path().join("counterexample.csv").exists());
}

#[test]
fn zero_driver_partition_count() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario("zero_driver.json");
    let o = ydde(&["partition", "--scenario", s.to_str().unwrap(), "--c-const", "8", "--format", "json"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("partition_summary.json")).unwrap()).unwrap();
    let n = v["n"].as_i64().unwrap();
    assert!((n - 322).abs() <= 2, "N = {n}");
}

#[test]
fn solve_writes_full_grid_and_is_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let o = ydde(&["solve", "--builtin", "linear", "--seed", "5", "--mesh", "1/256", "--quiet"], d.path());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["solution.csv", "partition.csv", "diagnostics.json"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    let text = std::fs::read_to_string(a.path().join("solution.csv")).unwrap();
    // Header plus (T + r)/mesh + 1 nodes.
    assert_eq!(text.lines().count(), 1 + 320 + 1);
}

#[test]
fn verify_zero_coefficient_scenario_passes() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario("zero_coefficients.json");
    let o = ydde(&["verify", "--scenario", s.to_str().unwrap(), "--seeds", "3", "--quiet"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("verify.csv").exists());
}

#[test]
fn config_errors_exit_two_with_json() {
    let dir = tempfile::tempdir().unwrap();
    let o = ydde(&["solve", "--builtin", "nope", "--error-json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_str(String::from_utf8_lossy(&o.stderr).trim()).unwrap();
    assert_eq!(v["error"], "config");
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"name": "x", "unknown": 1}"#).unwrap();
    let o = ydde(&["solve", "--scenario", bad.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = ydde(&["solve", "--scenario", dir.path().join("missing.json").to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    // C = 1e6 puts the partition threshold below a single cell.
    let o = ydde(&["partition", "--builtin", "sin", "--c-const", "1e6", "--error-json"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(String::from_utf8_lossy(&o.stderr).trim()).unwrap();
    assert_eq!(v["error"], "too_rough");
}

#[test]
fn empty_table_keeps_header() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_table(dir.path(), "empty", &Table::new(["a", "b"]), Format::Csv).unwrap();
    assert_eq!(std::fs::read_to_string(p).unwrap(), "a,b\n");
    let p = write_table(dir.path(), "empty", &Table::new(["a", "b"]), Format::Json).unwrap();
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap();
    assert!(v.is_object() || v.is_array());
}
