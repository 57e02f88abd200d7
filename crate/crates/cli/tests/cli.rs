use std::fs;
use std::process::{Command, Output};

fn bellforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bellforge"))
        .args(args)
        .env_remove("BELLFORGE_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const RECIPE: &str = r#"{
  "basis": {"kind": "bell"},
  "k": [0, 0, 1],
  "beta_q": "auto",
  "decomposition": {"kind": "complementary", "pivot": 1},
  "symbols": {"X": "A", "Z": "A'"},
  "pivot_symbols": ["B", "B'"]
}"#;

#[test]
fn build_writes_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("chsh.json");
    let out = dir.path().join("out.json");
    fs::write(&cfg, RECIPE).unwrap();
    let o = bellforge(&["build", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let b = &doc["result"]["bounds"];
    assert!((b["classical_max"].as_f64().unwrap() - 2.0).abs() < 1e-9);
    assert!((b["quantum_lower"].as_f64().unwrap() - 2.0 * 2f64.sqrt()).abs() < 1e-9);
    assert_eq!(b["sos_status"], "verified");
    assert!((doc["beta_q"].as_f64().unwrap() - 2.0 * 2f64.sqrt()).abs() < 1e-12);
}

#[test]
fn bad_recipe_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, "{\n  \"basis\": {\"kind\": \"bell\"},\n  \"k\": [0, 0, \"z\"]\n}").unwrap();
    let o = bellforge(&["build", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn verify_cases_and_recipe_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("chsh.json");
    fs::write(&cfg, RECIPE).unwrap();
    let o = bellforge(&["verify", "--case", "chsh", "--case", "chained:3", "--case", cfg.to_str().unwrap()]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("[PASS] chsh"));
    assert!(s.contains("[PASS] chained:3"));
    assert!(s.contains("3 cases, 0 failed"));
}

#[test]
fn unknown_case_is_an_error() {
    let o = bellforge(&["verify", "--case", "nope"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn tables_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut outs = Vec::new();
    for k in 0..2 {
        let p = dir.path().join(format!("t{k}.csv"));
        let o = bellforge(&[
            "--seed", "5", "--threads", "1", "table", "--format", "csv", "--case", "chsh", "--case", "mermin3", "--out",
            p.to_str().unwrap(),
        ]);
        assert!(o.status.success());
        outs.push(fs::read(&p).unwrap());
    }
    assert_eq!(outs[0], outs[1]);
    let text = String::from_utf8(outs.remove(0)).unwrap();
    assert!(text.starts_with("case,title,expression"));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn uncertainty_sweep_json() {
    let o = bellforge(&["--seed", "1", "uncertainty-sweep", "--samples", "100"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["samples"], 100);
    assert!(v["max_lhs"].as_f64().unwrap() <= 8.0 + 1e-9);
    assert_eq!(v["relation_holds"], true);
}
