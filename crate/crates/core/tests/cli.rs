use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_padic-osc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn gauss_with_oracle() {
    let out = run(&["gauss", "-p", "3", "-a", "1/3", "-b", "0", "-n", "0", "--oracle-depth", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["schema"], "padic-oscillator/1");
    assert!(v["oracle"]["deviation"].as_f64().unwrap() < 1e-9);
    assert!((v["closed_form"]["im"].as_f64().unwrap() - 3f64.sqrt().recip()).abs() < 1e-12);
}

#[test]
fn gauss_first_branch_is_one() {
    let v = json(&run(&["gauss", "-p", "3", "-a", "3", "-b", "0", "-n", "0"]));
    assert_eq!(v["closed_form"]["re"].as_f64(), Some(1.0));
    assert_eq!(v["closed_form"]["im"].as_f64(), Some(0.0));
}

#[test]
fn gauss_exit_codes() {
    assert_eq!(run(&["gauss", "-p", "3", "-a", "1/x"]).status.code(), Some(64));
    assert_eq!(run(&["gauss", "-p", "9", "-a", "1"]).status.code(), Some(64));
    let shallow = run(&["gauss", "-p", "3", "-a", "-1/9", "-b", "1", "--oracle-depth", "1"]);
    assert_eq!(shallow.status.code(), Some(3));
    // |α|₂ = 2 sits between the two branch conditions at ν = 0
    let gap = run(&["gauss", "-p", "2", "-a", "1/2", "-b", "0", "-n", "0"]);
    assert_eq!(gap.status.code(), Some(2));
}

#[test]
fn classical_report_and_errors() {
    let ok = run(&[
        "classical", "--profile", "example1(1,1)", "--t-prime", "0", "--t-dprime", "5",
        "--x-prime", "1", "--x-dprime", "-2/3", "--places", "5",
    ]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    let v = json(&ok);
    assert_eq!(v["action"]["delta"], "0/1");
    assert_eq!(v["action"]["quadratic"], v["action"]["boundary"]);
    let diverges = run(&[
        "classical", "--profile", "example1(1,1)", "--t-prime", "0", "--t-dprime", "1/5",
        "--x-prime", "0", "--x-dprime", "1", "--places", "5",
    ]);
    assert_eq!(diverges.status.code(), Some(5));
    let caustic = run(&[
        "classical", "--profile", "constant(1)", "--t-prime", "3", "--t-dprime", "3",
        "--x-prime", "0", "--x-dprime", "1", "--places", "3",
    ]);
    assert_eq!(caustic.status.code(), Some(4));
}

#[test]
fn propagator_with_composition() {
    let out = run(&[
        "propagator", "--place", "3", "--profile", "free", "--closed-form", "--t-prime", "0",
        "--t-dprime", "1", "--xs", "0,1,1/3", "--compose", "1/2",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["kernel"]["B"], "-1/1");
    assert_eq!(v["kernel"]["sample_values"].as_array().unwrap().len(), 9);
    assert!(v["composition"]["max_deviation"].as_f64().unwrap() < 1e-9);
}

#[test]
fn vacuum_reports_each_prime() {
    let out = run(&[
        "vacuum", "--primes", "2,3", "--profile", "constant(1)", "--t-prime", "0",
        "--t-dprime", "12", "--method", "both",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    let reports = v["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 2);
    assert_eq!(reports[0]["method"], "brute-force");
    assert!(reports[0]["note"].is_string());
    assert_eq!(reports[1]["holds"], true);
    assert_eq!(reports[1]["methods_agree"], true);
}

#[test]
fn discreteness_csv() {
    let out = run(&["discreteness", "--xs", "0,1,1/2,3/2,2", "--cutoff", "100", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let mut rdr = csv::Reader::from_reader(&out.stdout[..]);
    let nonzero: Vec<String> = rdr
        .records()
        .map(|r| r.unwrap())
        .filter(|r| r[1].parse::<f64>().unwrap() != 0.0)
        .map(|r| r[0].to_string())
        .collect();
    assert_eq!(nonzero, ["0/1", "1/1", "2/1"]);
}

#[test]
fn suites() {
    let ok = run(&["suite", "gauss-oracle", "--cases", "500", "--seed", "7"]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(json(&ok)["passed"], true);
    assert_eq!(run(&["suite", "unknown"]).status.code(), Some(64));
}

#[test]
fn help_and_version_succeed() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
    assert_eq!(run(&[]).status.code(), Some(64));
}
