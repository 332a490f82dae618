use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn nct(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nct")).args(args).output().expect("binary runs")
}

fn example(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/examples").join(name)
}

fn scratch(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("nct-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn output_flag_matches_stdout() {
    let input = example("heisenberg_diagonal.json");
    let input = input.to_str().unwrap();
    let out = scratch("report.json", "");
    let a = nct(&["heisenberg", "--input", input]);
    let b = nct(&["heisenberg", "--input", input, "--output", out.to_str().unwrap()]);
    assert!(a.status.success() && b.status.success());
    assert!(b.stdout.is_empty());
    assert_eq!(std::fs::read(&out).unwrap(), a.stdout);
}

#[test]
fn exit_codes_follow_error_class() {
    let missing = nct(&["algebra", "--input", "/nonexistent/problem.json"]);
    assert_eq!(missing.status.code(), Some(2));
    let bad = scratch("bad.json", "{\"version\": 1, \"theta\": [[0, 1], [1, 0]], \"params\": {\"op\": \"trace\"}}");
    assert_eq!(nct(&["algebra", "--input", bad.to_str().unwrap()]).status.code(), Some(2));
    let singular = example("heisenberg_singular.json");
    assert_eq!(nct(&["heisenberg", "--input", singular.to_str().unwrap()]).status.code(), Some(3));
    let not_unitary = scratch(
        "gauge.json",
        r#"{"version": 1, "theta": [[0, 0.2], [-0.2, 0]], "n": 1,
            "elements": {"w": [[0, 0, 2, 0]]},
            "connection": {"trivial": true}, "params": {"op": "gauge", "gauge": "w"}}"#,
    );
    assert_eq!(nct(&["connection", "--input", not_unitary.to_str().unwrap()]).status.code(), Some(3));
    assert_eq!(nct(&["frobnicate", "--input", "x"]).status.code(), Some(2));
}

#[test]
fn timing_is_opt_in() {
    let input = example("algebra_mul.json");
    let plain = nct(&["algebra", "--input", input.to_str().unwrap()]);
    let timed = nct(&["algebra", "--input", input.to_str().unwrap(), "--timing"]);
    assert!(!String::from_utf8_lossy(&plain.stdout).contains("wall_time_s"));
    assert!(String::from_utf8_lossy(&timed.stdout).contains("wall_time_s"));
}

#[test]
fn window_flag_reaches_the_report() {
    let input = example("moduli_constant.json");
    let out = nct(&["moduli", "--input", input.to_str().unwrap(), "--window", "3", "--seed", "7"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["diagnostics"]["window"], 3);
    assert_eq!(v["seed"], 7);
    assert_eq!(v["outputs"]["point"]["coords"], serde_json::json!([[0.25, 0.5], [0.75, 0.5]]));
}
