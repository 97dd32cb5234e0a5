use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn stit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stit")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("stit-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn simulate_is_reproducible() {
    // the output path is part of the embedded config, so reuse it
    let a = scratch("a.json");
    let run = || {
        let o = stit(&["simulate", "-d", "2", "-t", "5", "--seed", "1", "--out", a.to_str().unwrap()]);
        assert!(o.status.success());
        std::fs::read(&a).unwrap()
    };
    assert_eq!(run(), run());
    let v: Value = serde_json::from_slice(&std::fs::read(&a).unwrap()).unwrap();
    assert_eq!(v["config"]["seed"], 1);
    assert_eq!(v["config"]["d"], 2);
    assert!(v["version"].is_string());
}

#[test]
fn tiny_horizon_gives_one_cell() {
    let o = stit(&["simulate", "-d", "2", "-t", "1e-15"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["tessellations"][0]["events"].as_array().unwrap().len(), 0);
}

#[test]
fn svg_has_one_chord_per_event() {
    let json = scratch("pic.json");
    let o = stit(&["simulate", "-d", "2", "-t", "5", "--svg", "--out", json.to_str().unwrap()]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&std::fs::read(&json).unwrap()).unwrap();
    let events = v["tessellations"][0]["events"].as_array().unwrap().len();
    let svg = std::fs::read_to_string(json.with_extension("svg")).unwrap();
    assert_eq!(svg.matches("<line").count(), events);

    let rendered = stit(&["render", json.to_str().unwrap()]);
    assert!(rendered.status.success());
    assert_eq!(stdout(&rendered), svg);
}

#[test]
fn analytic_values() {
    let o = stit(&["analytic", "p", "-d", "3", "--mode", "lengthweighted", "--n", "0"]);
    let p: f64 = stdout(&o).lines().nth(1).unwrap().split('\t').nth(1).unwrap().parse().unwrap();
    assert!((p - 0.173506).abs() < 5e-7);
    let o = stit(&["analytic", "mean", "-d", "2", "--mode", "lengthweighted"]);
    assert_eq!(stdout(&o).lines().nth(1), Some("infinite"));
    let o = stit(&["analytic", "density", "-d", "3", "-k", "1", "-j", "1", "--at", "0.2,0.7", "-t", "1"]);
    assert_eq!(stdout(&o).lines().nth(1), Some("2.0"));
    let o = stit(&["--format", "json", "analytic", "mean", "-d", "3", "--mode", "lengthweighted"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["rows"][0]["mean"], 7.0);
}

#[test]
fn estimate_reports_embed_config() {
    let o = stit(&["estimate", "-d", "2", "-t", "20", "--stat", "p_internal", "--n", "0", "--replicates", "20", "--selection", "weighted"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let e = v["estimate"]["estimate"].as_f64().unwrap();
    assert!((0.45..0.65).contains(&e), "{e}");
    assert_eq!(v["config"]["replicates"], 20);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(stit(&["estimate", "-d", "2"]).status.code(), Some(2));
    assert_eq!(stit(&["simulate", "-d", "5"]).status.code(), Some(2));
    assert_eq!(stit(&["simulate", "--replicates", "0"]).status.code(), Some(2));
    assert_eq!(stit(&["verify", "slow"]).status.code(), Some(2));
    let o = stit(&["estimate", "--stat", "p_internal", "-t", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--n"));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let cfg = scratch("run.cfg");
    std::fs::write(&cfg, "d = 3\nt = 2\nseed = 9\nformat = table\n").unwrap();
    let o = stit(&["--config", cfg.to_str().unwrap(), "--format", "json", "simulate", "-t", "1"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["config"]["d"], 3);
    assert_eq!(v["config"]["t"], 1.0);
    assert_eq!(v["config"]["seed"], 9);
}

#[test]
fn injected_fault_fails_verification() {
    let o = stit(&["verify", "quick", "--inject-fault", "analytic_constant", "--threads", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).lines().any(|l| l.starts_with("FAIL [1]")));
}
