//! Acceptance battery through the binary: one PASS/FAIL line per criterion.
//! Criterion 9 additionally compares two full runs byte for byte.

use serde_json::Value;
use std::path::PathBuf;
use std::process::Command;

fn run_battery(out: &PathBuf) -> (i32, Vec<u8>) {
    let status = Command::new(env!("CARGO_BIN_EXE_kgeom"))
        .args(["acceptance", "--no-timestamp", "--out"])
        .arg(out)
        .status()
        .expect("binary runs");
    (status.code().unwrap_or(-1), std::fs::read(out).expect("report written"))
}

fn main() {
    let dir = std::env::temp_dir().join(format!("kgeom-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let (code_a, a) = run_battery(&dir.join("a.json"));
    let (code_b, b) = run_battery(&dir.join("b.json"));
    std::fs::remove_dir_all(&dir).ok();

    let report: Value = serde_json::from_slice(&a).expect("valid JSON report");
    assert_eq!(report["schema"], 1);
    let identical = a == b;
    let mut failures = 0;
    for c in report["criteria"].as_array().expect("criteria array") {
        let id = c["id"].as_u64().unwrap_or(0);
        let mut passed = c["passed"].as_bool().unwrap_or(false);
        let mut summary = c["summary"].as_str().unwrap_or("").to_string();
        if id == 9 {
            passed &= identical && code_a == code_b;
            summary = format!("two binary runs byte-identical: {identical}; {summary}");
        }
        failures += usize::from(!passed);
        println!(
            "acceptance criterion {id}: {} - {}: {summary}",
            if passed { "PASS" } else { "FAIL" },
            c["title"].as_str().unwrap_or("")
        );
    }
    let expected_code = if failures == 0 { 0 } else { 1 };
    println!("acceptance: {failures} failing criteria (binary exit codes {code_a}, {code_b})");
    assert_eq!(code_a, expected_code, "exit code reflects the criteria");
    if failures > 0 {
        std::process::exit(1);
    }
}
