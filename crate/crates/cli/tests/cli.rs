use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_helixscan")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn appendix() -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures/appendix1.csv")
        .to_string_lossy()
        .into_owned()
}

#[test]
fn steady_points_on_fixture() {
    let v = json(&run(&["steady-points", "--ingest", &appendix(), "--period", "1"]));
    assert_eq!(v["command"], "steady-points");
    let orders: Vec<u64> = v["result"]["segments"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["steady_orders"][0].as_u64().unwrap())
        .collect();
    assert_eq!(orders, vec![74, 223]);
}

#[test]
fn classify_composite_helix() {
    let v = json(&run(&["classify", "--family", "composite", "--beta", "1.2", "--x0", "0.5"]));
    assert_eq!(v["result"]["verdict"]["kind"], "stable_helix");
    assert_eq!(v["result"]["verdict"]["period_j"], 3);
}

#[test]
fn report_config_reproduces_output() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.json");
    let second = dir.path().join("second.json");
    let out = run(&[
        "--out", first.to_str().unwrap(),
        "classify", "--family", "sine", "--alpha", "0.4", "--beta", "1.5", "--x0", "0.25", "--horizon", "20000",
    ]);
    assert!(out.status.success());
    let out = run(&["--config", first.to_str().unwrap(), "--out", second.to_str().unwrap(), "classify"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::read(&first).unwrap(), std::fs::read(&second).unwrap());
}

#[test]
fn toml_config_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "family = \"composite\"\nbeta = 1.2\nx0 = 0.5\n").unwrap();
    let v = json(&run(&["--config", cfg.to_str().unwrap(), "classify", "--beta", "1.3"]));
    assert_eq!(v["config"]["beta"], 1.3);
    assert_eq!(v["result"]["verdict"]["period_j"], 4);
}

#[test]
fn csv_orbit_output() {
    let out = run(&["--format", "csv", "iterate", "--family", "sine", "--alpha", "0.4", "--beta", "1.5", "--x0", "0.5", "--n", "3"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "index,value,int_part,frac_part,delta1");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("1,0.5,0,0.5,"));
    assert!(lines[3].ends_with(','));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["classify", "--family", "nope", "--beta", "1", "--x0", "0.5"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["ingest", "/nonexistent/orbit.csv"]).status.code(), Some(3));
    assert_eq!(run(&["mu", "--family", "composite", "--beta", "1.2", "--x0", "0.5"]).status.code(), Some(2));
}

#[test]
fn ingest_reports_checksum() {
    let v = json(&run(&["ingest", &appendix()]));
    let recorded = std::fs::read_to_string(appendix() + ".sha256").unwrap();
    assert_eq!(v["result"]["provenance"]["sha256"].as_str(), recorded.split_whitespace().next());
    assert_eq!(v["result"]["len"], 249);
    assert_eq!(v["result"]["rows_compared"], 248);
}
