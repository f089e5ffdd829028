use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn haarnull(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_haarnull"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, contents: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, contents).unwrap();
    path
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON output")
}

#[test]
fn codec_encode_and_decode() {
    let out = haarnull(&["codec", "encode", "2", "1", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "13");

    let out = haarnull(&["codec", "decode", "0"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "(1,0,0)");

    let out = haarnull(&["--output", "json", "codec", "decode", "13"]);
    let v = json_of(&out);
    assert_eq!((v["n"].as_u64(), v["b"].as_u64(), v["z"].as_i64()), (Some(2), Some(1), Some(3)));
}

#[test]
fn codec_usage_errors_exit_2() {
    assert_eq!(haarnull(&["codec", "decode", "-1"]).status.code(), Some(2));
    assert_eq!(haarnull(&["codec", "encode", "0", "1", "0"]).status.code(), Some(2));
    assert_eq!(haarnull(&["codec", "encode", "2", "3", "0"]).status.code(), Some(2));
    assert_eq!(haarnull(&["codec", "frobnicate"]).status.code(), Some(2));
}

#[test]
fn codec_encode_is_total_in_z() {
    let out = haarnull(&["--output", "json", "codec", "encode", "2", "1", "-4"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["theta"], 6);
    assert_eq!(v["in_t"], false);
}

#[test]
fn codec_roundtrip_scan() {
    let out = haarnull(&["--output", "json", "codec", "roundtrip", "--max", "100000"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["status"], "pass");
    assert_eq!(v["parameters"]["checks"], 100000);
}

#[test]
fn witness_synth_prints_trace() {
    let dir = TempDir::new().unwrap();
    let spec = write(
        &dir,
        "spec.json",
        r#"{"prefix":[{"0":"1/2","1":"1/2"},{"-1":"1/3","2":"2/3"}],"tail":{"point_mass":0}}"#,
    );
    let out = haarnull(&["--output", "json", "witness", "synth", spec.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["ell"], serde_json::json!([1, 2]));
    assert_eq!(v["m"], serde_json::json!([1, 3]));
    assert_eq!(v["n"], serde_json::json!([4, 24]));
    assert_eq!(v["a"], serde_json::json!([3, 21]));
}

#[test]
fn witness_verify_claim_single_instance() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "spec.json", r#"{"prefix":[{"0":"1/2","1":"1/2"}],"tail":"truncated"}"#);
    let set = write(&dir, "set.json", r#"{"depth":1,"prefixes":[[0]]}"#);
    let out = haarnull(&[
        "--output",
        "json",
        "witness",
        "verify-claim",
        "--spec",
        spec.to_str().unwrap(),
        "--set",
        set.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["claim"], "claim-fst");
    assert_eq!(v["lhs"], v["rhs"]);
}

#[test]
fn witness_verify_claim_suite_is_deterministic() {
    let args = ["--output", "json", "--seed", "9", "--instances", "15", "--depth", "3", "witness", "verify-claim"];
    let first = haarnull(&args);
    let second = haarnull(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
    let v = json_of(&first);
    assert_eq!(v["lhs"], 15);
    assert_eq!(v["parameters"]["seed"], 9);
}

#[test]
fn witness_check_prefix_reports_translate() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.json", "[2, 3]");
    let hit = write(&dir, "hit.json", r#"{"depth":2,"prefixes":[[0,0]]}"#);
    let empty = write(&dir, "empty.json", r#"{"depth":2,"prefixes":[]}"#);

    let out = haarnull(&["--output", "json", "witness", "check-prefix", a.to_str().unwrap(), hit.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let v = json_of(&out);
    assert_eq!(v["status"], "fail");
    assert_eq!(v["counterexample"]["measure"], "1/12");

    let out = haarnull(&["witness", "check-prefix", a.to_str().unwrap(), empty.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));

    let out = haarnull(&[
        "--budget",
        "1",
        "witness",
        "check-prefix",
        a.to_str().unwrap(),
        write(&dir, "two.json", r#"{"depth":2,"prefixes":[[0,0],[5,5]]}"#).to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("budget-exceeded"));
}

#[test]
fn witness_malformed_inputs_exit_2() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.json", "{not json");
    let set = write(&dir, "set.json", r#"{"depth":1,"prefixes":[[0]]}"#);
    assert_eq!(haarnull(&["witness", "synth", bad.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(haarnull(&["witness", "check-prefix", bad.to_str().unwrap(), set.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(haarnull(&["witness", "synth", "/nonexistent/spec.json"]).status.code(), Some(2));
    assert_eq!(haarnull(&["witness", "verify-claim", "--spec", set.to_str().unwrap()]).status.code(), Some(2));
}

const DATA: &str = "{\"a\":[2,1],\"x\":[1,0],\"g\":[2,1]}\n{\"a\":[1,2],\"x\":[0,1],\"g\":[0,2]}\n";

#[test]
fn eset_build_gap_coinflip() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "data.jsonl", DATA);
    let data = data.to_str().unwrap();

    let out = haarnull(&["eset", "build", data]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).lines().count(), 2);

    let out = haarnull(&["--output", "json", "eset", "gap", data]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["parameters"]["pairs"], 1);

    let out = haarnull(&["--output", "json", "eset", "coinflip", data]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["parameters"]["max_hits"], 1);
    assert_eq!(v["parameters"]["cross_check"], "agree");

    let out = haarnull(&["--budget", "3", "eset", "coinflip", data]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn eset_coding_regime_collision_fails() {
    let dir = TempDir::new().unwrap();
    let data = write(
        &dir,
        "control.jsonl",
        "{\"a\":[1],\"x\":[0],\"g\":[2]}\n{\"a\":[1],\"x\":[1],\"g\":[0]}\n",
    );
    let data = data.to_str().unwrap();
    // g = 2 exceeds a = 1 outside the coding regime
    assert_eq!(haarnull(&["eset", "gap", data]).status.code(), Some(1));
    let out = haarnull(&["--output", "json", "eset", "gap", "--coding-regime", data]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json_of(&out)["status"], "fail");
}

#[test]
fn eset_dataset_errors() {
    let dir = TempDir::new().unwrap();
    let invalid = write(&dir, "invalid.jsonl", "{\"a\":[2,1],\"x\":[1,0],\"g\":[3,1]}\n");
    let out = haarnull(&["eset", "gap", invalid.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains(":1:"));

    let malformed = write(&dir, "malformed.jsonl", "nope\n");
    assert_eq!(haarnull(&["eset", "build", malformed.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn eset_acceptance_passes_and_is_deterministic() {
    let first = haarnull(&["--output", "json", "eset", "acceptance", "--seed", "42"]);
    assert_eq!(first.status.code(), Some(0));
    let second = haarnull(&["--output", "json", "eset", "acceptance", "--seed", "42"]);
    assert_eq!(first.stdout, second.stdout);
    let v = json_of(&first);
    assert_eq!(v["passed"], true);
    assert_eq!(v["criteria"].as_array().unwrap().len(), 9);
}
