use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn drk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_drk")).args(args).output().unwrap()
}

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/corpus").join(name)
}

fn json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn solve_writes_reports_and_exports() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.csv");
    let pi = dir.path().join("pi.csv");
    let s = corpus("small_k3.json");
    let v = json(&drk(&[
        "solve",
        s.to_str().unwrap(),
        "--matrix-csv",
        m.to_str().unwrap(),
        "--pi-csv",
        pi.to_str().unwrap(),
    ]));
    assert_eq!(v["states"], 100);
    let u = v["metrics"]["u"].as_f64().unwrap();
    assert!(u > 0.0 && u < 1.0);
    let pi_rows = std::fs::read_to_string(&pi).unwrap();
    assert_eq!(pi_rows.lines().next().unwrap(), "a,b,c,d,pi");
    assert_eq!(pi_rows.lines().count(), 101);
    assert!(std::fs::read_to_string(&m).unwrap().starts_with("from_a,"));

    let en = json(&drk(&["solve", s.to_str().unwrap(), "--backend", "enumeration"]));
    assert!((en["metrics"]["u"].as_f64().unwrap() - u).abs() < 1e-9);

    let out = drk(&["solve", s.to_str().unwrap(), "--csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.starts_with("source,U,"));
}

#[test]
fn simulate_is_reproducible() {
    let s = corpus("ttr_only.json");
    let args = ["simulate", s.to_str().unwrap(), "--frames", "2000", "--warmup", "100", "--reps", "3", "--seed", "9"];
    let a = drk(&args);
    let b = drk(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn sweep_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let base: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(corpus("small_k0.json")).unwrap()).unwrap();
    let spec = serde_json::json!({ "label": "k", "base": base, "axis": "K", "values": [0, 1, 2] });
    let path = dir.path().join("sweep.json");
    std::fs::write(&path, spec.to_string()).unwrap();
    let out = drk(&["sweep", path.to_str().unwrap(), "--csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().next().unwrap().contains("blocking_gap_per_k"));
}

#[test]
fn optimize_strict_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let s = corpus("small_k0.json");
    let vacuous = dir.path().join("vacuous.json");
    std::fs::write(&vacuous, r#"{"b_targets":[1,1,1],"d_targets":[1,1,1]}"#).unwrap();
    let v = json(&drk(&["--strict", "optimize", s.to_str().unwrap(), "--constraints", vacuous.to_str().unwrap()]));
    assert_eq!(v["infeasible"], false);

    let zero = dir.path().join("zero.json");
    std::fs::write(&zero, r#"{"b_targets":[0,0,0],"d_targets":[0,0,0]}"#).unwrap();
    let args = ["optimize", s.to_str().unwrap(), "--constraints", zero.to_str().unwrap()];
    assert_eq!(drk(&args).status.code(), Some(0));
    let mut strict = vec!["--strict"];
    strict.extend(args);
    assert_eq!(drk(&strict).status.code(), Some(2));
}

#[test]
fn validate_without_simulation() {
    let v = json(&drk(&["--strict", "validate", corpus("no_ttr.json").to_str().unwrap(), "--no-sim"]));
    assert_eq!(v["passed"], true);
}

#[test]
fn bad_input_fails() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"populations": {"N_1": -1}}"#).unwrap();
    let out = drk(&["solve", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("populations"));
    assert!(!drk(&["preset", "fig9"]).status.success());
    assert!(!drk(&["solve", "/nonexistent.json"]).status.success());
}
