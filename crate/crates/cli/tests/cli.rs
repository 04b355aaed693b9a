use std::fs;
use std::process::{Command, Output};

fn caperc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_caperc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn sample_then_ca() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("g.txt");
    let partition = dir.path().join("p.csv");
    let census = dir.path().join("c.csv");
    let o = caperc(&[
        "sample", "--n", "2e3", "--k", "3", "--lambda", "0.9", "--seed", "5",
        "--out", graph.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&graph).unwrap();
    assert!(text.starts_with("caperc-v1 n=2000 k=3\n"));

    let o = caperc(&[
        "ca", "--input", graph.to_str().unwrap(),
        "--partition", partition.to_str().unwrap(),
        "--census", census.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let p = fs::read_to_string(&partition).unwrap();
    let mut lines = p.lines();
    assert_eq!(
        lines.next().unwrap(),
        "vertex,ca_comp_id,comp_id_minus_1,comp_id_minus_2,comp_id_minus_3"
    );
    assert_eq!(lines.count(), 2000);
    assert!(fs::read_to_string(&census).unwrap().starts_with("stat_kind,key,value\n"));

    // same seed, same bytes
    let o = caperc(&["sample", "--n", "2000", "--lambda", "0.9,0.9,0.9", "--seed", "5"]);
    assert_eq!(o.stdout, text.as_bytes());
}

#[test]
fn ca_reads_stdin_and_rejects_bad_input() {
    use std::io::Write;
    use std::process::Stdio;
    let run = |input: &str| {
        let mut child = Command::new(env!("CARGO_BIN_EXE_caperc"))
            .arg("ca")
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .unwrap();
        child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
        child.wait_with_output().unwrap()
    };
    let ok = run("caperc-v1 n=3 k=2\n1 0 1\n2 0 1\n2 1 2\n");
    assert_eq!(code(&ok), 0);
    let out = String::from_utf8(ok.stdout).unwrap();
    assert_eq!(out.lines().nth(1).unwrap(), "0,0,0,0");
    assert_eq!(out.lines().nth(2).unwrap(), "1,0,0,0");

    let bad = run("caperc-v1 n=3 k=2\n1 0 7\n");
    assert_eq!(code(&bad), 2);
    assert!(String::from_utf8_lossy(&bad.stderr).contains("line 2"));
}

#[test]
fn theory_json_and_domain_errors() {
    let o = caperc(&["theory", "expected-tree-count", "--n", "4", "--lambda", "1", "--s", "2"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["name"], "expected_tree_count");
    assert!((v["value"].as_f64().unwrap() - 0.474609375).abs() < 1e-12);
    assert!(v["log_value"].is_number());
    assert!(v["validity_warnings"].as_array().unwrap().is_empty());

    let o = caperc(&["theory", "classify-regime", "--n", "1e5", "--lambda", "1.3,0.4"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["value"]["kind"]["regime"], "intermediate");

    let o = caperc(&["theory", "giant-size", "--n", "1e6", "--lambda", "1.0316227766016838"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["value"].as_f64().unwrap() - 63245.553203367585).abs() < 1e-6);

    assert_eq!(code(&caperc(&["theory", "m0-threshold", "--n", "1e6", "--q", "1"])), 2);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&caperc(&["frobnicate"])), 1);
    assert_eq!(code(&caperc(&["sample", "--n", "1.5", "--lambda", "1"])), 1);
    assert_eq!(code(&caperc(&["sample", "--n", "10", "--k", "3", "--lambda", "1,1"])), 1);
    assert_eq!(code(&caperc(&["run", "tree-census", "--q", "0.1"])), 1);
    assert_eq!(code(&caperc(&["--help"])), 0);
}

#[test]
fn run_writes_outputs_and_is_worker_independent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"trials": 99, "lambdas": [0.4, 0.4]}"#).unwrap();
    let mut outputs = Vec::new();
    for workers in ["1", "3"] {
        let out = dir.path().join(format!("w{workers}"));
        let o = caperc(&[
            "run", "regime-scaling", "--n", "500,1000", "--trials", "12", "--seed", "9",
            "--workers", workers, "--config", cfg.to_str().unwrap(),
            "--out", out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        for f in ["results.csv", "verdicts.csv", "manifest.json", "plot.svg"] {
            assert!(out.join(f).exists(), "{f}");
        }
        let m: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
        // flags beat the config file, which beats the defaults
        assert_eq!(m["manifest"]["spec"]["trials"], 12);
        assert_eq!(m["manifest"]["spec"]["lambdas"], serde_json::json!([0.4, 0.4]));
        assert_eq!(m["manifest"]["master_seed"], 9);
        outputs.push((
            fs::read(out.join("results.csv")).unwrap(),
            fs::read(out.join("verdicts.csv")).unwrap(),
        ));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn failed_verdict_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    // a zero spread tolerance cannot be met
    fs::write(&cfg, r#"{"log_spread": 0.0}"#).unwrap();
    let o = caperc(&[
        "run", "regime-scaling", "--n", "1000,2000", "--trials", "4",
        "--config", cfg.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL log_scale_stable"));

    fs::write(&cfg, r#"{"no_such_key": 1}"#).unwrap();
    let o = caperc(&["run", "regime-scaling", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn verify_passes() {
    let o = caperc(&["verify", "--instances", "100"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["mismatches"], 0);
    assert_eq!(code(&caperc(&["verify", "--max-n", "500"])), 2);
}
