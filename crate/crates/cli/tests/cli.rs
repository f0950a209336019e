//! End-to-end checks of the binary: exit codes, file formats, determinism.

use std::path::Path;
use std::process::{Command, Output};

fn dkepler(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dkepler"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

#[test]
fn verify_torsion_suite_passes_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let out1 = dkepler(
        dir.path(),
        &[
            "--command",
            "verify",
            "--suite",
            "torsion",
            "--report",
            "a.json",
        ],
    );
    assert_eq!(
        exit_code(&out1),
        0,
        "{}",
        String::from_utf8_lossy(&out1.stderr)
    );
    let out2 = dkepler(
        dir.path(),
        &[
            "--command",
            "verify",
            "--suite",
            "torsion",
            "--report",
            "b.json",
        ],
    );
    assert_eq!(exit_code(&out2), 0);
    let a = std::fs::read(dir.path().join("a.json")).unwrap();
    let b = std::fs::read(dir.path().join("b.json")).unwrap();
    assert_eq!(a, b, "reports differ between identical runs");
    assert_eq!(out1.stdout, out2.stdout);
}

#[test]
fn verify_all_reports_forty_plus_referenced_checks() {
    let dir = tempfile::tempdir().unwrap();
    let out = dkepler(
        dir.path(),
        &[
            "--command",
            "verify",
            "--suite",
            "all",
            "--report",
            "all.json",
        ],
    );
    assert_eq!(
        exit_code(&out),
        0,
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("all.json")).unwrap())
            .unwrap();
    assert_eq!(report["schema_version"], "1");
    let records = report["records"].as_array().unwrap();
    assert!(records.len() >= 40, "only {} checks", records.len());
    for rec in records {
        let claim = rec["claim_ref"].as_str().unwrap();
        assert!(!claim.is_empty());
    }
    let summary = &report["summary"];
    let total = summary["total"].as_u64().unwrap() as usize;
    assert_eq!(total, records.len());
    assert_eq!(summary["failed"], 0);
    // the ledger section mirrors the flagged records
    let ledger = report["discrepancy_ledger"].as_array().unwrap();
    let flagged = records.iter().filter(|r| r["ledger"] == true).count();
    assert_eq!(ledger.len(), flagged);
}

#[test]
fn verify_literal_mode_flags_known_discrepancies_without_failing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dkepler(
        dir.path(),
        &[
            "--command",
            "verify",
            "--suite",
            "transforms",
            "--mode",
            "paper-literal",
            "--report",
            "lit.json",
        ],
    );
    assert_eq!(
        exit_code(&out),
        0,
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("lit.json")).unwrap())
            .unwrap();
    let records = report["records"].as_array().unwrap();
    let residual_of = |id: &str| -> f64 {
        records
            .iter()
            .find(|r| r["check_id"] == id)
            .unwrap_or_else(|| panic!("{id} missing"))["residual"]
            .as_f64()
            .unwrap()
    };
    assert!((residual_of("transforms/pi-inverse-literal") - 0.75034).abs() < 1e-4);
    assert!((residual_of("transforms/chi1-frequency") - 0.5).abs() < 1e-6);
    assert!((residual_of("transforms/reduced-angle-mass-ratio") - 1.0).abs() < 1e-12);
}

#[test]
fn simulate_writes_monotone_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dkepler(
        dir.path(),
        &[
            "--command",
            "simulate",
            "--chart",
            "cartesian",
            "--state",
            "1,0,0,0,0.9,0",
            "--t-end",
            "20",
            "--out",
            "traj.csv",
            "--report",
            "run.json",
        ],
    );
    assert_eq!(
        exit_code(&out),
        0,
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let csv = std::fs::read_to_string(dir.path().join("traj.csv")).unwrap();
    let mut lines = csv.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("t,q1,q2,q3,p1,p2,p3,H,M,L_alpha"));
    let mut prev = -1.0;
    for line in lines {
        let t: f64 = line.split(',').next().unwrap().parse().unwrap();
        assert!(t > prev, "time not strictly increasing");
        prev = t;
    }

    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("run.json")).unwrap())
            .unwrap();
    assert!(summary["drift"]["H"].as_f64().unwrap() < 1e-8);
    assert_eq!(summary["final_time"].as_f64().unwrap(), 20.0);
}

#[test]
fn simulate_rejects_bad_states_and_zero_horizon() {
    let dir = tempfile::tempdir().unwrap();
    // r = 0 violates the chart invariant
    let out = dkepler(
        dir.path(),
        &[
            "--command",
            "simulate",
            "--chart",
            "reduced",
            "--state",
            "0,0,0,0.9",
        ],
    );
    assert_eq!(exit_code(&out), 2);
    let msg = String::from_utf8_lossy(&out.stderr).to_lowercase();
    assert!(
        msg.contains("r > 0"),
        "message should name the invariant: {msg}"
    );

    let out = dkepler(
        dir.path(),
        &[
            "--command",
            "simulate",
            "--chart",
            "reduced",
            "--state",
            "1,0,0,0.9",
            "--t-end",
            "0",
        ],
    );
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn simulate_exhausted_step_budget_is_an_integration_failure() {
    let dir = tempfile::tempdir().unwrap();
    let out = dkepler(
        dir.path(),
        &[
            "--command",
            "simulate",
            "--chart",
            "cartesian",
            "--state",
            "1,0,0,0,1,0",
            "--t-end",
            "100",
            "--max-steps",
            "1",
        ],
    );
    assert_eq!(exit_code(&out), 3);
}

#[test]
fn transform_prints_targets_and_checks_energy() {
    let dir = tempfile::tempdir().unwrap();
    let out = dkepler(
        dir.path(),
        &[
            "--command",
            "transform",
            "--chart",
            "reduced",
            "--state",
            "1,0,0,0.9",
        ],
    );
    assert_eq!(exit_code(&out), 0);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("action"), "{stdout}");
    assert!(stdout.contains("J1 = 0.0166"), "{stdout}");
    assert!(stdout.contains("xi"), "{stdout}");
    assert!(stdout.contains("pi"), "{stdout}");
    assert!(stdout.contains("energy cross-check"), "{stdout}");
}

#[test]
fn transform_rejects_unbound_states_with_exit_5() {
    let dir = tempfile::tempdir().unwrap();
    let out = dkepler(
        dir.path(),
        &[
            "--command",
            "transform",
            "--chart",
            "reduced",
            "--state",
            "1,0,2,0.9",
        ],
    );
    assert_eq!(exit_code(&out), 5);
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("compact case requires E < 0"), "{msg}");
}

#[test]
fn transform_action_round_trip_is_identity_in_corrected_mode() {
    let dir = tempfile::tempdir().unwrap();
    let out = dkepler(
        dir.path(),
        &[
            "--command",
            "transform",
            "--chart",
            "action",
            "--state",
            "0.0167,0.9,0.3,0.4",
            "--mode",
            "corrected",
        ],
    );
    assert_eq!(exit_code(&out), 0);
    let stdout = String::from_utf8_lossy(&out.stdout);
    let residual: f64 = stdout
        .lines()
        .find(|l| l.contains("round trip"))
        .and_then(|l| l.split('=').next_back())
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    assert!(residual < 1e-10, "round trip residual {residual}");
}

#[test]
fn scan_produces_deterministic_grid_csv() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "--command",
        "scan",
        "--suite",
        "torsion",
        "--grid",
        "J1=0.1:1:5,J2=0.12:1.02:5",
        "--out",
        "scan.csv",
    ];
    let out = dkepler(dir.path(), &args);
    assert_eq!(
        exit_code(&out),
        0,
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv1 = std::fs::read_to_string(dir.path().join("scan.csv")).unwrap();
    assert_eq!(csv1.lines().count(), 26); // header + 25 rows
    for line in csv1.lines().skip(1) {
        let residual: f64 = line.split(',').next_back().unwrap().parse().unwrap();
        assert!(residual < 1e-7);
    }
    let out = dkepler(dir.path(), &args);
    assert_eq!(exit_code(&out), 0);
    let csv2 = std::fs::read_to_string(dir.path().join("scan.csv")).unwrap();
    assert_eq!(csv1, csv2);
}

#[test]
fn scan_requires_a_grid_and_rejects_malformed_ones() {
    let dir = tempfile::tempdir().unwrap();
    let out = dkepler(dir.path(), &["--command", "scan", "--suite", "torsion"]);
    assert_eq!(exit_code(&out), 2);
    let out = dkepler(
        dir.path(),
        &["--command", "scan", "--suite", "torsion", "--grid", ""],
    );
    assert_eq!(exit_code(&out), 2);
    let out = dkepler(
        dir.path(),
        &[
            "--command",
            "scan",
            "--suite",
            "torsion",
            "--grid",
            "J1=0:1",
        ],
    );
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn verify_runs_without_deformation() {
    // alpha = 0 skips the structures that need deformation and still passes
    let dir = tempfile::tempdir().unwrap();
    let out = dkepler(
        dir.path(),
        &[
            "--command",
            "verify",
            "--suite",
            "all",
            "--alpha",
            "0",
            "--report",
            "zero.json",
        ],
    );
    assert_eq!(
        exit_code(&out),
        0,
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn unknown_command_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dkepler(dir.path(), &["--command", "fly"]);
    assert_eq!(exit_code(&out), 2);
}
