use std::process::{Command, Output};

use homsim_core::experiments::CSV_HEADER;
use homsim_core::ExperimentReport;

fn homsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_homsim"))
        .args(args)
        .env_remove(homsim_cli::OUTPUT_ENV)
        .output()
        .expect("binary runs")
}

#[test]
fn scan_analytic_zero_row() {
    let out = homsim(&["scan", "--analytic"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first[0].parse::<f64>().unwrap(), 0.0);
    assert_eq!(first[1].parse::<f64>().unwrap(), 0.0);
    assert_eq!(first[3], "coherence-analytic");
    assert_eq!(text.lines().count(), 66);
}

#[test]
fn usage_errors_exit_two() {
    let out = homsim(&["scan", "--n-pairs", "3"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err, "error: n-pairs must be even and >= 2, got 3\n");
    assert!(out.stdout.is_empty());

    assert_eq!(homsim(&["scan", "--nope"]).status.code(), Some(2));
    assert_eq!(homsim(&["launch"]).status.code(), Some(2));
    // runtime parameter problems are usage errors too
    let out = homsim(&["sweep-bandwidth", "--tau-max", "1", "--analytic"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn help_lists_subcommands() {
    let out = homsim(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for sub in ["scan", "sweep-bandwidth", "contrast", "fringe", "witness", "compare"] {
        assert!(text.contains(sub), "{sub} missing from help");
    }
    let scan_help = String::from_utf8(homsim(&["scan", "--help"]).stdout).unwrap();
    assert!(scan_help.contains("[default: 100000]"));
}

#[test]
fn compare_and_witness_pass() {
    let out = homsim(&["compare", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let report: ExperimentReport = serde_json::from_slice(&out.stdout).unwrap();
    let gap = report.check("max pointwise gap").unwrap();
    assert!(gap.passed && gap.measured < 1e-6);

    let out = homsim(&["witness", "--center-split", "0", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let report: ExperimentReport = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report.check("max curve gap").unwrap().measured < 1e-9);
}

#[test]
fn failed_check_exits_one() {
    // nine frequency points alias the delay phase well before τ = 10/σ
    let out = homsim(&["witness", "--grid-points", "9"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stdout).unwrap().starts_with(CSV_HEADER));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("check failed: distinguishable plateau"));
}

#[test]
fn output_file_and_env_override() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("curve.csv");
    let out = homsim(&["scan", "--analytic", "--output", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let from_flag = std::fs::read(&path).unwrap();

    let env_path = dir.path().join("env.csv");
    let out = Command::new(env!("CARGO_BIN_EXE_homsim"))
        .args(["scan", "--analytic"])
        .env(homsim_cli::OUTPUT_ENV, &env_path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read(&env_path).unwrap(), from_flag);
}

#[test]
fn json_round_trips() {
    let out = homsim(&["sweep-bandwidth", "--n-pairs", "2000", "--tau-steps", "17", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let report: ExperimentReport = serde_json::from_str(&text).unwrap();
    assert_eq!(report.curves.len(), 8);
    let again = serde_json::to_string_pretty(&report).unwrap() + "\n";
    assert_eq!(again, text);
    // stable key order
    let name = text.find("\"name\"").unwrap();
    let curves = text.find("\"curves\"").unwrap();
    let checks = text.find("\"checks\"").unwrap();
    assert!(name < curves && curves < checks);
}

#[test]
fn detuning_map_table() {
    let out = homsim(&["detuning-map", "--tau-steps", "3", "--detuning-steps", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("tau,delta_f,weight,coincidence"));
    assert_eq!(text.lines().count(), 16);
}
