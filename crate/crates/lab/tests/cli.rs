use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sibm-lab")).args(args).output().expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    lab(args).status.code().expect("exit code")
}

fn report(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn exit_codes() {
    assert_eq!(code(&["--help"]), 0);
    assert_eq!(code(&["--version"]), 0);
    assert_eq!(code(&["frobnicate"]), 2);
    assert_eq!(code(&["mc", "hit", "--bogus", "1"]), 2);
    assert_eq!(code(&["verify", "bm", "--replicates", "-5"]), 2);
    assert_eq!(code(&["mc", "exit", "--alpha", "2"]), 2);
    assert_eq!(code(&["lattice"]), 2);
    assert_eq!(code(&["lattice", "--in", "/nonexistent/sets.json"]), 1);
    assert_eq!(code(&["verify", "siv", "--model", "common-factor"]), 2);
}

#[test]
fn failing_verdict_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let args = ["verify", "stationarity", "--model", "variance-skew", "--seed", "1", "--out", out.to_str().unwrap()];
    assert_eq!(code(&args), 1);
    assert_eq!(report(&out)["verdict"], "fail");
}

#[test]
fn unknown_config_key_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "seed=1\ncolour=red\n").unwrap();
    let out = lab(&["mc", "hit", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "mesh=0.01\nseed=4\nreplicates=50\ngrid=32\n").unwrap();
    let out = dir.path().join("r.json");
    let args = ["verify", "siv", "--config", cfg.to_str().unwrap(), "--mesh", "0.001", "--out", out.to_str().unwrap()];
    assert_eq!(code(&args), 0);
    let r = report(&out);
    assert_eq!(r["config"]["mesh"], "0.001");
    assert_eq!(r["config"]["grid"], "32");
    assert_eq!(r["seed"], 4);
}

#[test]
fn exit_probability_example() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let args = ["mc", "exit", "--a", "-1", "--b", "2", "--n", "100000", "--seed", "7", "--out", out.to_str().unwrap()];
    assert_eq!(code(&args), 0);
    let r = report(&out);
    assert!((r["theory"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-15);
    assert_eq!(r["verdict"], "pass");
    assert!((r["estimate"].as_f64().unwrap() - 1.0 / 3.0).abs() < 0.005);
}

#[test]
fn replay_and_thread_count_are_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    let base = ["verify", "bm", "--seed", "11", "--replicates", "20", "--lattices", "5", "--increments", "1000"];
    let with = |extra: &[&str]| -> Vec<String> { base.iter().chain(extra).map(|s| s.to_string()).collect() };
    let run = |args: Vec<String>| {
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        assert_eq!(code(&refs), 0);
    };
    run(with(&["--threads", "1", "--out", &p("a.json"), "--raw", &p("a.csv")]));
    run(with(&["--threads", "4", "--out", &p("b.json"), "--raw", &p("b.csv")]));
    let a = std::fs::read(p("a.json")).unwrap();
    assert_eq!(a, std::fs::read(p("b.json")).unwrap());
    assert_eq!(std::fs::read(p("a.csv")).unwrap(), std::fs::read(p("b.csv")).unwrap());

    run(vec!["verify".into(), "bm".into(), "--config".into(), p("a.json"), "--out".into(), p("c.json")]);
    assert_eq!(a, std::fs::read(p("c.json")).unwrap());
}

#[test]
fn simulate_writes_path_csv() {
    let out = lab(&["simulate", "--steps", "10", "--seed", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "alpha,theta,Y");
    assert_eq!(lines.len(), 12);
    assert_eq!(lines[1], "0,0,0");

    let out = lab(&["simulate", "--steps", "10", "--seed", "2", "--retime", "0.25"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 6);

    let out = lab(&["simulate", "--mode", "field", "--grid", "4", "--seed", "2"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().all(|l| l.split(',').count() == 4));
}

#[test]
fn lattice_reports_cells_and_flow() {
    let dir = tempfile::tempdir().unwrap();
    let sets = dir.path().join("sets.json");
    std::fs::write(&sets, r#"{"dim": 2, "sets": [[1, 3], [2, 2], [3, 1]]}"#).unwrap();
    let out = lab(&["lattice", "--in", sets.to_str().unwrap(), "--mesh", "0.5", "--seed", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["numbering"].as_array().unwrap().len(), 6);
    let cells: f64 = v["cells"].as_array().unwrap().iter().map(|c| c["measure"].as_f64().unwrap()).sum();
    assert!((cells - 6.0).abs() < 1e-12);
    let theta = v["flow"]["theta"].as_array().unwrap();
    assert!((theta.last().unwrap().as_f64().unwrap() - 6.0).abs() < 1e-12);
    assert_eq!(v["flow"]["alpha"].as_array().unwrap().len(), theta.len());
}

#[test]
fn failing_monte_carlo_seed_reruns_once() {
    // Seed 3 at this size lands beyond three standard errors.
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let run = lab(&["mc", "exit", "--seed", "3", "--replicates", "20000", "--out", out.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&run.stderr).contains("rerunning"));
    let r = report(&out);
    assert!(r["values"]["first_z"].as_f64().unwrap().abs() > 3.0);
    assert_eq!(r["rerun_seed"].as_u64(), Some(sibm_lab::commands::rerun_seed(3)));
    assert_eq!(r["verdict"], "pass");
}
