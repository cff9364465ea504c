use std::path::PathBuf;
use std::process::{Command, Output};

fn example(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)
}

fn chp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chp")).args(args).output().expect("run chp")
}

#[test]
fn compare_is_byte_stable_and_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("reports.json");
    let csv = dir.path().join("prices.csv");
    let ex2 = example("ex2.json");
    let args = ["compare", "--instance", ex2.to_str().unwrap(), "--out-json", json.to_str().unwrap(), "--out-csv", csv.to_str().unwrap()];
    let a = chp(&args);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let b = chp(&args);
    assert_eq!(a.stdout, b.stdout);
    let table = String::from_utf8(a.stdout).unwrap();
    for scheme in ["LMP", "aCHP1", "CHP-ext", "single-period"] {
        assert!(table.lines().any(|l| l.starts_with(scheme)), "{scheme} missing:\n{table}");
    }
    let reports: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert!(reports.as_array().is_some_and(|r| r.len() >= 4));
    let prices = std::fs::read_to_string(&csv).unwrap();
    assert!(prices.starts_with("period,bus,price\n"));
    assert_eq!(prices.lines().count(), 4);
}

#[test]
fn price_reports_the_hull_price() {
    let ex1 = example("ex1.json");
    let out = chp(&["price", "--instance", ex1.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("12.0"), "{text}");
    assert!(text.contains("1430.00"), "{text}");
}

#[test]
fn errors_map_to_exit_codes() {
    let missing = chp(&["price", "--instance", "/nonexistent/instance.json"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(!missing.stderr.is_empty());
    let ex2 = example("ex2.json");
    let exact = chp(&["price", "--instance", ex2.to_str().unwrap(), "--mode", "exact"]);
    assert_eq!(exact.status.code(), Some(2));
    let bad_flag = chp(&["price", "--no-such-flag"]);
    assert_eq!(bad_flag.status.code(), Some(2));
}

#[test]
fn verify_passes_with_negative_control() {
    let out = chp(&["verify", "--T", "3", "--count", "3", "--negative-control"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
}
