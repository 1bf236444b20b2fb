//! End-to-end runs of the `dirac-lab` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

const LATTICE_5: &str = r#""lattice": {"L": 6.283185307179586, "N": 5, "m": 1.0, "q": 1.0}"#;

fn run(args: &[&str], config: &str, dir: &Path) -> Output {
    let cfg = dir.join("config.json");
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_dirac-lab"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap()
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("out/report.json")).unwrap()).unwrap()
}

fn csv_column(path: &Path, name: &str) -> Vec<String> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let idx = r.headers().unwrap().iter().position(|h| h == name).unwrap();
    r.records().map(|rec| rec.unwrap()[idx].to_string()).collect()
}

#[test]
fn check_basis_reports_orthonormal_modes() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["check-basis"], &format!("{{{LATTICE_5}}}"), d.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(report(d.path())["orthonormality_max_err"].as_f64().unwrap() < 1e-12);
    assert_eq!(csv_column(&d.path().join("out/modes.csv"), "E").len(), 10);
}

#[test]
fn schwinger_divergence_is_negative_imaginary() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["schwinger"], &format!("{{{LATTICE_5}}}"), d.path());
    assert!(o.status.success());
    let r = report(d.path());
    assert!(r["div_I_diag_imag"].as_f64().unwrap() < 0.0);
    assert_eq!(r["div_I_diag_real"].as_f64().unwrap(), 0.0);
}

#[test]
fn band_schwinger_reports_f2_and_vanishing_diagonal() {
    let d = tempfile::tempdir().unwrap();
    let o = run(
        &["schwinger"],
        &format!(r#"{{{LATTICE_5}, "vacuum": "band", "delta_Ew": 0.0}}"#),
        d.path(),
    );
    assert!(o.status.success());
    let r = report(d.path());
    assert!(r["f2_residual"].as_f64().unwrap() <= 1e-12);
    assert!(r["max_abs_I_diag"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn outputs_are_bit_identical_and_checksummed() {
    let cfg = format!(r#"{{{LATTICE_5}, "seed": 11}}"#);
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        assert!(run(&["verify"], &cfg, d.path()).status.success());
    }
    let read = |d: &tempfile::TempDir| fs::read(d.path().join("out/verify.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    let manifest: Value =
        serde_json::from_str(&fs::read_to_string(a.path().join("out/manifest.json")).unwrap()).unwrap();
    assert_eq!(
        manifest["sha256"]["verify.csv"].as_str().unwrap(),
        format!("{:x}", Sha256::digest(read(&a)))
    );
    assert_eq!(manifest["seed"], 11);
    assert_eq!(manifest["config"]["lattice"]["N"], 5);
    assert_eq!(manifest["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn extract_energy_decreases_for_small_kicks() {
    let d = tempfile::tempdir().unwrap();
    let cfg = r#"{"lattice": {"L": 6.283185307179586, "N": 15, "m": 1.0, "q": 1.0},
        "packet": {"p_center": 2.0, "sigma": 0.5},
        "kick": {"recipe": "eq39", "f": 0.0, "t_a": 0.0, "t_b": 1.0}, "dt": 0.01,
        "f_sweep": [0.0, 0.1, 0.2, 0.3]}"#;
    let o = run(&["extract-energy"], cfg, d.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let xi: Vec<f64> = csv_column(&d.path().join("out/energy.csv"), "xi0_branch2")
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    assert!(xi.windows(2).all(|w| w[1] < w[0]), "{xi:?}");
}

#[test]
fn evolve_writes_snapshot_and_run_tables() {
    let d = tempfile::tempdir().unwrap();
    let cfg = r#"{"lattice": {"L": 6.283185307179586, "N": 9, "m": 1.0, "q": 1.0},
        "packet": {"p_center": 0.5, "sigma": 0.4}, "t_end": 0.5, "dt": 0.01}"#;
    let o = run(&["evolve"], cfg, d.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(csv_column(&d.path().join("out/run.csv"), "xi0").len(), 51);
    assert_eq!(csv_column(&d.path().join("out/snapshots.csv"), "rho_e").len(), 51 * 9);
    let r = report(d.path());
    assert!((r["xi0_end"].as_f64().unwrap() - r["xi0_start"].as_f64().unwrap()).abs() < 1e-10);
}

#[test]
fn response_paths_agree() {
    let d = tempfile::tempdir().unwrap();
    let cfg = r#"{"lattice": {"L": 6.283185307179586, "N": 9, "m": 1.0, "q": 1.0},
        "chi": {"t_a": 0.0, "t_b": 1.0, "modes": [{"k": 1, "cos": 1.0}]}}"#;
    assert!(run(&["response"], cfg, d.path()).status.success());
    let r = report(d.path());
    assert!(r["max_path_gap"].as_f64().unwrap() < 1e-6);
    assert!(r["max_abs_J1_direct"].as_f64().unwrap() > 1e-2);
}

#[test]
fn sweep_runs_points_in_parallel() {
    let d = tempfile::tempdir().unwrap();
    let cfg = format!(r#"{{{LATTICE_5}, "sweep": {{"experiment": "check_basis", "N": [3, 5, 7], "m": [0.0, 1.0]}}}}"#);
    let cfg_path = d.path().join("config.json");
    fs::write(&cfg_path, cfg).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_dirac-lab"))
        .args(["sweep", "--jobs", "3", "--config"])
        .arg(&cfg_path)
        .arg("--out")
        .arg(d.path().join("out"))
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let status = csv_column(&d.path().join("out/sweep.csv"), "exit_status");
    assert_eq!(status, vec!["0"; 6]);
    assert!(d.path().join("out/point_005/manifest.json").exists());
}

#[test]
fn config_errors_exit_one_with_single_line() {
    let d = tempfile::tempdir().unwrap();
    for cfg in [
        r#"{"lattice": {"L": 6.28, "N": 4, "m": 1.0, "q": 1.0}}"#.to_string(),
        format!(r#"{{{LATTICE_5}, "vacuum": "band", "delta_Ew": 9.0}}"#),
        format!(r#"{{{LATTICE_5}, "unknown_key": 1}}"#),
        "not json".to_string(),
    ] {
        let o = run(&["schwinger"], &cfg, d.path());
        assert_eq!(o.status.code(), Some(1), "{cfg}");
        let err = String::from_utf8(o.stderr).unwrap();
        assert_eq!(err.trim_end().lines().count(), 1, "{err}");
        assert!(err.starts_with("error[config]"), "{err}");
    }
    let o = run(&["response"], &format!("{{{LATTICE_5}}}"), d.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8(o.stderr).unwrap().contains("\"chi\""));
}
