//! End-to-end tests of the binary surface: exit codes, report shapes and
//! output determinism.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_buckdens"))
        .args(args)
        .env_remove("BUCKDENS_FORMAT")
        .env_remove("BUCKDENS_MAX_N")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_str(stdout(o).trim()).expect("valid json")
}

#[test]
fn measure_balpha_example() {
    let out = run(&["measure", "balpha(101,3)"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["value"], "5/8");
    assert_eq!(v["tail_bound"], 0.0);
    assert_eq!(v["exact"], true);
}

#[test]
fn estimate_squares_example() {
    let out = run(&[
        "estimate", "squares", "--system", "lcm", "--max-n", "6", "--mode", "exact",
    ]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["final"], 0.2);
    assert_eq!(v["final_ratio"], "1/5");
    assert_eq!(v["bound_semantics"], "upper-bound");
    assert_eq!(v["entries"].as_array().unwrap().len(), 6);
}

#[test]
fn cover_odd_example() {
    let out = run(&["cover", "odd", "--max-modulus", "4", "--period", "2"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["value"], "1/2");
    assert_eq!(v["certificate"]["classes"][0], "1+(2)");
    assert_eq!(v["certificate"]["status"], "proved");
    assert_eq!(v["optimal"], true);
}

#[test]
fn verify_cover_exit_codes() {
    let ok = run(&["verify-cover", "odd", "--classes", "1+(2)"]);
    assert!(ok.status.success());
    assert_eq!(json(&ok)["status"], "proved");

    let bad = run(&["verify-cover", "odd", "--classes", "1+(4)", "--window", "100"]);
    assert_eq!(bad.status.code(), Some(1));
    let v = json(&bad);
    assert_eq!(v["status"], "failed");
    assert_eq!(v["counterexample"], 3);
}

#[test]
fn parse_errors_exit_2() {
    let out = run(&["measure", "wat(3)"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("wat"), "{err}");

    let usage = run(&["estimate"]); // missing expr
    assert_eq!(usage.status.code(), Some(2));

    // Exact measure of a non-structural set is a usage-level error.
    let out = run(&["measure", "taudiv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn check_failures_exit_1() {
    let out = run(&[
        "check-alexander", "odd", "--bounds", "1/4", "--max-n", "6",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["verdict"], "fail");
    assert!(v["counterexample"].is_object());

    let ok = run(&["check-alexander", "odd", "--bounds", "1/2", "--max-n", "6"]);
    assert!(ok.status.success());
    assert_eq!(json(&ok)["verdict"], "pass");
}

#[test]
fn check_sigma_balpha_and_scaled() {
    let out = run(&["check-sigma", "--balpha", "101", "--max-n", "8"]);
    assert!(out.status.success());
    assert_eq!(json(&out)["verdict"], "pass");

    let out = run(&["check-sigma", "--balpha", "101", "--scaled", "--max-n", "8"]);
    assert!(out.status.success());
    assert_eq!(json(&out)["verdict"], "pass");

    let out = run(&[
        "check-sigma",
        "comp(ap(0,3))",
        "comp(ap(0,3))",
        "--scales",
        "3,9",
        "--max-n",
        "9",
    ]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["verdict"], "pass");
    let rows = v["rows"].as_array().unwrap();
    assert!(rows
        .iter()
        .any(|r| r["label"] == "sum mu(H_i)/b_i" && r["value"] == "8/27"));
}

#[test]
fn niven_squares_passes() {
    let out = run(&[
        "niven", "squares", "--primes", "2,3,5,7,11", "--max-n", "6", "--window", "1000",
    ]);
    assert!(out.status.success());
    assert_eq!(json(&out)["verdict"], "pass");

    let fail = run(&["niven", "all", "--primes", "2,3", "--max-n", "6", "--window", "1000"]);
    assert_eq!(fail.status.code(), Some(1));
}

#[test]
fn estimate_window_mode_and_csv() {
    let out = run(&[
        "estimate", "taudiv", "--mode", "window", "--max-n", "4", "--window", "5000",
    ]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["bound_semantics"], "approximation");
    assert_eq!(v["mode"], "window");
    assert_eq!(v["window"], 5000);

    let out = run(&["estimate", "odd", "--max-n", "3", "--format", "csv"]);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "N,B_N,R,ratio");
    assert_eq!(lines.len(), 4);
}

#[test]
fn tabulate_emits_csv() {
    let out = run(&["tabulate", "odd", "--max-n", "4"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "N,B_N,R,ratio");
    assert_eq!(lines[1], "1,1,1,1");
    assert_eq!(lines[2], "2,2,1,0.5");
    assert_eq!(lines.len(), 5);
}

#[test]
fn json_output_is_deterministic() {
    for args in [
        vec!["estimate", "squares", "--max-n", "6"],
        vec!["measure", "balpha(1101,4)"],
        vec!["check-taudiv", "--s-max", "2", "--window", "20000", "--max-n", "6"],
    ] {
        let a = run(&args);
        let b = run(&args);
        assert_eq!(stdout(&a), stdout(&b), "determinism for {args:?}");
        assert!(!stdout(&a).is_empty());
    }
}

#[test]
fn env_variables_feed_defaults() {
    let out = Command::new(env!("CARGO_BIN_EXE_buckdens"))
        .args(["estimate", "odd"])
        .env("BUCKDENS_MAX_N", "3")
        .output()
        .unwrap();
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(v["entries"].as_array().unwrap().len(), 3);

    // Explicit flags take precedence over the environment.
    let out = Command::new(env!("CARGO_BIN_EXE_buckdens"))
        .args(["estimate", "odd", "--max-n", "5"])
        .env("BUCKDENS_MAX_N", "3")
        .output()
        .unwrap();
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(v["entries"].as_array().unwrap().len(), 5);
}

#[test]
fn text_format_renders() {
    let out = run(&["measure", "odd", "--format", "text"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("value: 1/2"), "{text}");
}

#[test]
fn greedy_cover_surface() {
    let out = run(&["greedy-cover", "val(2,{1})", "--moduli", "4", "--window", "10000"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["classes"][0], "2+(4)");
    assert_eq!(v["weight"], "1/4");
}
