//! End-to-end runs of the `autobid` binary: outputs, formats and exit codes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn autobid(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_autobid"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

fn crossed_pair_market() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/markets/crossed_pair.json")
}

fn generated(dir: &Path) -> PathBuf {
    let path = dir.join("m.json");
    let out = autobid(&["gen", "--seed", "7", "--buyers", "3", "--items", "4", "--sellers", "2", "--out", path_str(&path)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    path
}

#[test]
fn gen_then_ce_prints_prices_and_utilities() {
    let dir = tempfile::tempdir().unwrap();
    let market = generated(dir.path());
    let json = dir.path().join("ce.json");
    let out = autobid(&["ce", "--market", path_str(&market), "--out", path_str(&json)]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("price") && stdout.contains("utility") && stdout.contains("verified"));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
    assert_eq!(report["prices"].as_array().unwrap().len(), 4);
    assert_eq!(report["residuals"]["pass"], serde_json::Value::Bool(true));
}

#[test]
fn gen_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(std::fs::read(generated(a.path())).unwrap(), std::fs::read(generated(b.path())).unwrap());
}

#[test]
fn dynamics_trace_has_non_increasing_potential() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("tr.csv");
    let out = autobid(&[
        "dynamics",
        "--market",
        path_str(&crossed_pair_market()),
        "--rounds",
        "200",
        "--out",
        path_str(&trace),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(trace).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,buyer,seller,budget,utility,phi,eg_objective,avg_gap"));
    let mut previous = f64::INFINITY;
    let mut rows = 0;
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 8);
        let phi: f64 = fields[5].parse().unwrap();
        assert!(phi <= previous + 1e-8, "phi rose to {phi} from {previous}");
        previous = phi;
        rows += 1;
    }
    assert!(rows >= 4 && rows % 4 == 0, "two buyers times two sellers per round");
}

#[test]
fn audits_write_the_report_columns() {
    let dir = tempfile::tempdir().unwrap();
    let market = generated(dir.path());
    for (cmd, agents) in [("buyer-audit", 3), ("seller-audit", 2)] {
        let csv = dir.path().join(format!("{cmd}.csv"));
        let out = autobid(&[cmd, "--market", path_str(&market), "--out", path_str(&csv)]);
        assert_eq!(out.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
        let text = std::fs::read_to_string(csv).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("agent,baseline_value,best_response_value,ratio,bound,pass"));
        assert_eq!(lines.clone().count(), agents);
        assert!(lines.all(|l| l.ends_with(",true")));
    }
    let csv = dir.path().join("one.csv");
    let out = autobid(&["buyer-audit", "--market", path_str(&market), "--agent", "1", "--resolution", "50", "--out", path_str(&csv)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(std::fs::read_to_string(csv).unwrap().lines().nth(1).unwrap().starts_with("1,"));
}

#[test]
fn pne_writes_rows_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let market = generated(dir.path());
    let csv = dir.path().join("pne.csv");
    let out = autobid(&["pne", "--market", path_str(&market), "--restarts", "2", "--out", path_str(&csv)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(csv).unwrap();
    let (rows, summary) = text.split_once("\n\n").unwrap();
    assert!(rows.starts_with("seller,buyer,utility,revenue"));
    assert_eq!(rows.lines().count(), 1 + 2 * 3);
    for key in ["delta,", "nsw_ratio,", "bound,", "improvement_0,", "improvement_1,", "pass,true"] {
        assert!(summary.contains(key), "missing {key}");
    }
}

#[test]
fn operational_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    assert_eq!(autobid(&["ce", "--market", path_str(&missing)]).status.code(), Some(1));
    assert_eq!(autobid(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(autobid(&["suite", "--seeds", "9..3"]).status.code(), Some(1));
    let market = generated(dir.path());
    assert_eq!(autobid(&["buyer-audit", "--market", path_str(&market), "--agent", "7"]).status.code(), Some(1));
    assert_eq!(autobid(&["ce", "--market", path_str(&market), "--tol", "0"]).status.code(), Some(1));
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"budgets": [1.0], "values": [[0.0]], "seller_of": [0]}"#).unwrap();
    let out = autobid(&["ce", "--market", path_str(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no buyer with positive value"));
}

#[test]
fn help_exits_cleanly() {
    let out = autobid(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for cmd in ["gen", "ce", "dynamics", "buyer-audit", "seller-audit", "pne", "suite"] {
        assert!(text.contains(cmd), "help lists {cmd}");
    }
}

#[test]
fn suite_on_a_small_range_passes() {
    let dir = tempfile::tempdir().unwrap();
    let summary = dir.path().join("summary.csv");
    let out = autobid(&["suite", "--seeds", "3..4", "--out", path_str(&summary)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(summary).unwrap();
    assert!(text.starts_with("criterion,check,instances,worst,sense,bound,pass\n"));
    assert!(text.lines().skip(1).all(|l| l.ends_with(",true")));
}
