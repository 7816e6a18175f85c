//! Command line behavior: exit codes, config handling, and report formats.

use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_patternsieve"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn exit_codes_follow_the_verdict() {
    let ok = run(&["admissible", "check", "--tuple", "0,2,6", "--no-timestamp"]);
    assert_eq!(ok.status.code(), Some(0));
    let v = stdout_json(&ok);
    assert_eq!(v["tuple"]["admissible"], serde_json::json!(true));

    let bad = run(&["admissible", "check", "--tuple", "0,2,4", "--no-timestamp"]);
    assert_eq!(bad.status.code(), Some(1));
    let v = stdout_json(&bad);
    assert_eq!(v["tuple"]["admissible"], serde_json::json!(false));
    assert_eq!(v["tuple"]["witness_prime"], serde_json::json!(3));

    let usage = run(&["admissible", "check", "--tuple", "0,2,6", "--bogus"]);
    assert_eq!(usage.status.code(), Some(2));

    let bad_format = run(&["admissible", "check", "--tuple", "0,2,6", "--format", "xml"]);
    assert_eq!(bad_format.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad_format.stderr).contains("error"));

    let dup = run(&["admissible", "check", "--tuple", "0,2,2"]);
    assert_eq!(dup.status.code(), Some(2));

    let zero_threads = run(&["mk", "optimize", "--k", "3", "--threads", "0"]);
    assert_eq!(zero_threads.status.code(), Some(2));
}

#[test]
fn config_echo_round_trips() {
    let first = run(&[
        "sums",
        "run",
        "--tuple",
        "0,2,6",
        "--n",
        "150000",
        "--d0",
        "5",
        "--theta",
        "2/5",
        "--no-timestamp",
    ]);
    assert_eq!(first.status.code(), Some(0));
    let v = stdout_json(&first);
    let config_text = v["config"].as_str().unwrap();

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("echo.conf");
    std::fs::write(&path, config_text).unwrap();

    let second = run(&[
        "sums",
        "run",
        "--config",
        path.to_str().unwrap(),
        "--no-timestamp",
    ]);
    assert_eq!(second.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout, "config echo did not round-trip");
}

#[test]
fn config_file_and_env_and_flags_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("base.conf");
    std::fs::write(&path, "k=5\ntuple=0,4,6,10,12\n# comment\nD0=5\n").unwrap();

    let from_env = bin()
        .args(["admissible", "check", "--no-timestamp"])
        .env("PATTERNSIEVE_CONFIG", &path)
        .output()
        .unwrap();
    assert_eq!(from_env.status.code(), Some(0));
    let v = stdout_json(&from_env);
    assert_eq!(v["tuple"]["offsets"], serde_json::json!([0, 4, 6, 10, 12]));

    let overridden = bin()
        .args(["admissible", "check", "--tuple", "0,2", "--no-timestamp"])
        .env("PATTERNSIEVE_CONFIG", &path)
        .output()
        .unwrap();
    let v = stdout_json(&overridden);
    assert_eq!(v["tuple"]["offsets"], serde_json::json!([0, 2]));

    let bad = dir.path().join("bad.conf");
    std::fs::write(&bad, "k=3\nwhat=1\n").unwrap();
    let rejected = run(&["admissible", "check", "--config", bad.to_str().unwrap()]);
    assert_eq!(rejected.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&rejected.stderr).contains("what"));

    let dup = dir.path().join("dup.conf");
    std::fs::write(&dup, "k=3\nk=4\n").unwrap();
    let rejected = run(&["admissible", "check", "--config", dup.to_str().unwrap()]);
    assert_eq!(rejected.status.code(), Some(2));
}

#[test]
fn formats_parse_and_agree() {
    let args = [
        "scan", "hits", "--offsets", "0,2", "--lo", "1", "--hi", "200", "--tuple", "0,2,6",
        "--no-timestamp",
    ];

    let json_out = run(&[&args[..], &["--format", "json"]].concat());
    assert_eq!(json_out.status.code(), Some(0));
    let v = stdout_json(&json_out);
    let rows = v["rows"].as_array().unwrap();
    assert!(!rows.is_empty());
    assert_eq!(rows[0]["n"], serde_json::json!(3));

    let jsonl_out = run(&[&args[..], &["--format", "jsonl"]].concat());
    let text = String::from_utf8(jsonl_out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), rows.len() + 1, "meta line plus one line per row");
    for line in &lines {
        let parsed: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(parsed.is_object());
    }

    let csv_out = run(&[&args[..], &["--format", "csv"]].concat());
    let text = String::from_utf8(csv_out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,all_prime,consecutive,rough");
    assert_eq!(lines.len(), rows.len() + 1);
    for line in &lines[1..] {
        assert_eq!(line.split(',').count(), 4);
    }
}

#[test]
fn output_flag_writes_the_report_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = run(&[
        "admissible",
        "check",
        "--tuple",
        "0,2,6",
        "--no-timestamp",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let direct = run(&["admissible", "check", "--tuple", "0,2,6", "--no-timestamp"]);
    assert_eq!(std::fs::read(&path).unwrap(), direct.stdout);
}

#[test]
fn timestamp_appears_unless_suppressed() {
    let with = run(&["admissible", "check", "--tuple", "0,2,6"]);
    let v = stdout_json(&with);
    assert!(v["timestamp"].is_u64());
    let without = run(&["admissible", "check", "--tuple", "0,2,6", "--no-timestamp"]);
    let v = stdout_json(&without);
    assert!(v.get("timestamp").is_none());
}

#[test]
fn negative_search_outcomes_use_exit_code_one() {
    // A tuple request too tight for its cap: k = 10 inside [0, 20] cannot
    // exist, so the search reports not-found.
    let out = run(&["admissible", "find", "--k", "10", "--h-cap", "20"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}
