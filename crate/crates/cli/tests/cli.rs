//! End-to-end runs of the `critwin` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn critwin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_critwin"))
        .args(args)
        .env_remove("CRITWIN_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn schema(name: &str) -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/schema").join(name);
    let schema: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&schema).unwrap()
}

fn assert_valid(validator: &jsonschema::Validator, doc: &Value) {
    let errors: Vec<String> = validator.iter_errors(doc).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:?}\n{doc:#}");
}

#[test]
fn fk0_reproduces_the_published_digits() {
    let out = critwin(&["fk0", "--k", "2", "--ell0", "75", "--digits", "20"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("1.830470321422761"), "{text}");
    let (_, bound) = text.trim().split_once(',').unwrap();
    assert!(bound.parse::<f64>().unwrap() < 1e-17);
}

#[test]
fn maximize_defaults_validate_against_schema() {
    let out = critwin(&["maximize"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_valid(&schema("maximize.schema.json"), &doc);
    assert_valid(&schema("run-config.schema.json"), &doc["config"]);
    let lambda_star = doc["lambda_star"].as_f64().unwrap();
    assert!((0.5..=1.5).contains(&lambda_star));
    assert_eq!(doc["at_boundary"], Value::Bool(false));
}

#[test]
fn simulate_output_is_reproducible_and_thread_independent() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str| {
        let path = dir.path().join(name);
        let args = [
            "simulate", "--n", "20000", "--lambda", "-0.5", "--reps", "40", "--seed", "7", "--threads", threads,
            "--out", path.to_str().unwrap(),
        ];
        let out = critwin(&args);
        assert!(out.status.success(), "{}", stderr(&out));
        fs::read_to_string(path).unwrap()
    };
    let one = run("a.json", "1");
    let three = run("b.json", "3");
    let doc: Value = serde_json::from_str(&one).unwrap();
    assert_valid(&schema("simulate.schema.json"), &doc);
    assert_valid(&schema("run-config.schema.json"), &doc["config"]);
    assert_eq!(doc["params"]["seed"], 7);
    assert_eq!(doc["config"]["args"]["seed"], 7);
    assert_eq!(doc["estimates"].as_array().unwrap().len(), 5);
    // The output path is part of the recorded configuration; nothing else differs.
    assert_eq!(one.replace("a.json", "b.json"), three);
}

#[test]
fn profile_file_embeds_config_then_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig.csv");
    let out = critwin(&["profile", "--out", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    let config: Value = serde_json::from_str(lines.next().unwrap().strip_prefix("# critwin ").unwrap()).unwrap();
    assert_valid(&schema("run-config.schema.json"), &config);
    assert_eq!(config["args"]["lambda"]["lo"], -1.75);
    assert_eq!(lines.next(), Some("lambda,log_f,dlog_f,d2log_f"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 111);
    assert!(rows[0].starts_with("-1.75,") && rows[110].starts_with("3.75,"));
}

#[test]
fn stdout_csv_has_header_first() {
    let out = critwin(&["fk", "--k", "2,3", "--lambda", "-1:1:0.5"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "lambda,f2,f3,error_estimate");
    assert_eq!(lines.len(), 6);
    let zero: Vec<f64> = lines[3].split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(zero[0], 0.0);
    assert!((zero[2] - 2.0).abs() < 1e-7);
}

#[test]
fn wright_prints_requested_digits() {
    let out = critwin(&["wright", "--max-ell", "4", "--digits", "15"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "ell,w_ell");
    assert_eq!(lines[1], "0,1.00000000000000e0");
    assert_eq!(lines[2], "1,6.26657068657750e-1");
    assert_eq!(lines[3], "2,2.08333333333333e-1");
    assert_eq!(lines.len(), 6);
}

#[test]
fn cycle_single_point_and_scan() {
    let out = critwin(&["cycle", "--n", "3", "--p", "0.5"]);
    assert!(out.status.success());
    let row: Vec<f64> = stdout(&out).lines().nth(1).unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert!((row[1] - 2.25).abs() < 1e-12);

    let out = critwin(&["cycle", "--n", "1000", "--scan", "--points", "101"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().count(), 102);
    assert!(stderr(&out).contains("(1 - p*) n"));
}

#[test]
fn usage_errors_exit_with_two() {
    let cases: [&[&str]; 6] = [
        &["fk", "--bogus"],
        &["fk", "--lambda", "2:1:0.1"],
        &["maximize", "--lo", "3", "--hi", "1"],
        &["wright", "--digits", "5"],
        &["cycle", "--n", "10"],
        &["frobnicate"],
    ];
    for args in cases {
        let out = critwin(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", stderr(&out));
        assert!(out.stdout.is_empty());
    }
    let out = critwin(&["fk", "--lambda", "2:1:0.1"]);
    assert!(stderr(&out).contains("--lambda"));
}

#[test]
fn invalid_thread_variable_is_a_usage_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_critwin"))
        .args(["fk0"])
        .env("CRITWIN_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_critwin"))
        .args(["fk0"])
        .env("CRITWIN_THREADS", "2")
        .output()
        .unwrap();
    assert!(out.status.success());
}

#[test]
fn computation_failures_exit_with_one() {
    let out = critwin(&["simulate", "--n", "1", "--lambda", "-5", "--reps", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("lambda = -5"));
}

#[test]
fn quick_verification_passes() {
    let out = critwin(&["verify", "--suite", "all", "--quick"]);
    assert!(out.status.success(), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.lines().next().unwrap().starts_with("suite"));
    assert!(text.contains(", 0 failed"));
    assert!(!text.contains("FAIL"));
}
