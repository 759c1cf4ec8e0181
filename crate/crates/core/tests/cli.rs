//! End-to-end checks of the `qbc` binary: exit codes, output formats, and
//! byte-for-byte determinism of the sweep table.

use std::fs;
use std::process::Command;

fn qbc() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qbc"))
}

#[test]
fn verify_default_label_passes() {
    let out = qbc().args(["verify"]).output().unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("PASS A1"), "missing report line:\n{stdout}");
    assert!(!stdout.contains("FAIL"), "unexpected failure:\n{stdout}");
}

#[test]
fn verify_paper_literal_convention_fails_checks() {
    let out = qbc()
        .args([
            "verify",
            "--q",
            "0.5",
            "--gamma1",
            "2.0",
            "--convention",
            "paper-literal",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("FAIL"), "expected at least one failing identity:\n{stdout}");
}

#[test]
fn verify_writes_json_lines() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("reports.jsonl");
    let out = qbc()
        .args(["verify", "--out"])
        .arg(&path)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = fs::read_to_string(&path).unwrap();
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v.get("quantity").is_some());
        assert!(v.get("abs_diff").is_some());
    }
    assert!(text.lines().count() > 30);
}

#[test]
fn bad_q_exits_with_usage_code() {
    let out = qbc().args(["verify", "--q", "1.5"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_csv_header_is_pinned() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"q": 0.8, "theta": 0.3, "j1": 0.4, "j2": 0.5,
            "gamma1": {"min": 0.0, "max": 1.0, "count": 3},
            "gamma2": {"min": 0.0, "max": 1.0, "count": 3}}"#,
    )
    .unwrap();
    let out_path = dir.path().join("rows.csv");
    let out = qbc()
        .args(["sweep", "--config"])
        .arg(&cfg)
        .args(["--out"])
        .arg(&out_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&out_path).unwrap();
    let header = text.lines().next().unwrap();
    assert_eq!(
        header,
        "q,theta,m,omega,hbar,j1,j2,gamma1,gamma2,t,\
         chi1,chi2,kappa1,kappa2,\
         rhs_x1x2,rhs_x1p1,rhs_x2p2,rhs_p1p2,\
         ratio_x1x2,ratio_x1p1,ratio_x2p2,ratio_p1p2,\
         p1,p2,p3,p4,min_ratio,violated"
            .replace(' ', "")
    );
    assert_eq!(text.lines().count(), 1 + 9);
}

#[test]
fn sweep_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"q": 0.6, "theta": 0.5, "j1": 0.7, "j2": 0.2,
            "gamma1": {"min": -3.0, "max": 3.0, "count": 5},
            "gamma2": {"min": -3.0, "max": 3.0, "count": 5}}"#,
    )
    .unwrap();
    let mut outputs = Vec::new();
    for (i, workers) in ["1", "2"].iter().enumerate() {
        let path = dir.path().join(format!("rows_{i}.csv"));
        let out = qbc()
            .args(["sweep", "--config"])
            .arg(&cfg)
            .args(["--out"])
            .arg(&path)
            .args(["--workers", workers])
            .output()
            .unwrap();
        assert!(out.status.success());
        outputs.push(fs::read(&path).unwrap());
    }
    assert_eq!(outputs[0], outputs[1], "sweep output depends on worker count");
}

#[test]
fn sweep_rejects_out_of_radius_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"q": 0.5, "j1": 2.0}"#).unwrap();
    let out = qbc().args(["sweep", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_rejects_malformed_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"qq": 0.5}"#).unwrap();
    let out = qbc().args(["sweep", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn evolve_emits_long_format() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("evolution.csv");
    let out = qbc()
        .args([
            "evolve", "--q", "0.8", "--theta", "0.3", "--j1", "0.4", "--j2", "0.3",
            "--t-max", "1.0", "--steps", "4", "--out",
        ])
        .arg(&path)
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "quantity,t,value");
    // 5 time points x 7 quantities.
    assert_eq!(lines.count(), 35);
    assert!(text.contains("min_ratio,"));
}
