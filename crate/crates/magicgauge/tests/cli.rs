use std::path::Path;
use std::process::{Command, Output};

fn magicgauge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_magicgauge")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn report(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn post_selected_run_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = magicgauge(&["run", "--patch", "1x1", "--option", "condense", "--mode", "post-select", "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("PASS: final fidelity"));
    let r = report(dir.path());
    assert_eq!(r["passed"], true);
    assert!(r["final_fidelity"].as_f64().unwrap() >= 1.0 - 1e-9);
    let stages: Vec<&str> = r["stages"].as_array().unwrap().iter().map(|s| s["stage"].as_str().unwrap()).collect();
    assert_eq!(stages, ["prepare", "gauge", "condense_eG", "condense_m1e2", "teleport"]);
}

#[test]
fn bad_patch_is_a_usage_error() {
    assert_eq!(magicgauge(&["run", "--patch", "0x1"]).status.code(), Some(2));
    assert_eq!(magicgauge(&["run", "--patch", "one"]).status.code(), Some(2));
    assert_eq!(magicgauge(&["run", "--backend", "gpu"]).status.code(), Some(2));
    assert_eq!(magicgauge(&["run", "--patch", "3x3"]).status.code(), Some(2));
}

#[test]
fn unknown_config_key_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "patch = \"1x1\"\nverbose = true\n").unwrap();
    assert_eq!(magicgauge(&["run", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn seeded_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let args = ["run", "--seed", "7", "--mode", "sample", "--out", out];
    assert_eq!(magicgauge(&args).status.code(), Some(0));
    let first = std::fs::read(dir.path().join("report.json")).unwrap();
    assert_eq!(magicgauge(&args).status.code(), Some(0));
    let second = std::fs::read(dir.path().join("report.json")).unwrap();
    assert_eq!(first, second);
}

#[test]
fn shipped_configs_parse_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let cfg = concat!(env!("CARGO_MANIFEST_DIR"), "/configs/acceptance.toml");
    let o = magicgauge(&["run", "--config", cfg, "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(dir.path());
    assert_eq!(r["config"]["standardize"], true);
    assert_eq!(r["config"]["output_dir"], out);
    assert!(r["stages"].as_array().unwrap().iter().any(|s| s["stage"] == "standardize"));
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/configs/sample.toml")).unwrap();
    magicgauge::protocol::pipeline::PipelineConfig::from_toml(&text).unwrap();
}

#[test]
fn oracle_sequences() {
    let o = magicgauge(&["oracle", "--state", "SX", "--seq", "gauge:A,condense:Ap"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "|1> + e^{iπ/4}|e>");
    let sx = magicgauge::anyon_algebra::LogicalAnyonState::s_x().to_string();
    assert_eq!(stdout(&magicgauge(&["oracle", "--state", "SX"])).trim(), sx);
    assert_eq!(magicgauge(&["oracle", "--state", "SX", "--seq", "condense:nope"]).status.code(), Some(2));
}

#[test]
fn tables_and_checks() {
    let o = magicgauge(&["tables", "--theory", "ZD4"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 23);
    let l1 = stdout(&magicgauge(&["check", "--algebra", "L1"]));
    assert!(l1.contains("condensable: yes, lagrangian: yes"), "{l1}");
    let fb = stdout(&magicgauge(&["check", "--algebra", "1+fB"]));
    assert!(fb.contains("spin violation"), "{fb}");
    let all = magicgauge(&["check"]);
    assert_eq!(all.status.code(), Some(0));
    assert!(stdout(&all).lines().all(|l| l.ends_with("lift dimensions: ok")));
}
