use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn presets() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("presets")
}

fn mmop(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_mmop")).args(args).output().expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn run_preset(cmd: &str, preset: &str, extra: &[&str]) -> (i32, tempfile::TempDir) {
    let dir = tempfile::tempdir().unwrap();
    let cfg = presets().join(preset);
    let mut args = vec![cmd, "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()];
    args.extend_from_slice(extra);
    let (code, _, err) = mmop(&args);
    assert!(code == 0 || code == 3, "{preset}: exit {code}: {err}");
    (code, dir)
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("config.json");
    std::fs::write(&p, body).unwrap();
    p
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

fn json(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&read(dir, name)).unwrap()
}

#[test]
fn factorize_uniform_gives_shifted_legendre() {
    let (code, dir) = run_preset("factorize", "legendre.json", &[]);
    assert_eq!(code, 0);
    let h = read(dir.path(), "h.csv");
    assert!(h.starts_with("n,h\n0,1\n1,1/12\n2,1/180\n3,1/2800\n"));
    let b = read(dir.path(), "type_ii.csv");
    assert!(b.contains("2,0,0,1/6\n2,0,1,-1\n2,0,2,1\n"));
    assert_eq!(json(dir.path(), "summary.json")["biorthogonality_residual"], "0");
}

#[test]
fn factorize_jacobi_pineiro_matches_closed_forms() {
    let (code, dir) = run_preset("factorize", "jp_demo.json", &["--nmax", "6"]);
    assert_eq!(code, 0);
    assert_eq!(json(dir.path(), "summary.json")["jacobi_pineiro_match"], true);
}

#[test]
fn bad_measure_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"command": "factorize", "measure": {"kind": "jacobi", "alpha": "-2", "beta": "0"}}"#,
    );
    let (code, _, err) = mmop(&["--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("measure"), "{err}");
}

#[test]
fn malformed_config_reports_its_position() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "{\"command\": \"factorize\",\n \"measure\": {\"kind\": \"nope\"}}");
    let (code, _, err) = mmop(&["--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn perturbation_residuals_vanish() {
    for preset in ["scalar_model.json", "jp_demo.json", "left.json"] {
        let (code, dir) = run_preset("perturb", preset, &[]);
        assert_eq!(code, 0, "{preset}");
        let rep = json(dir.path(), "report.json");
        assert_eq!(rep["max_b_residual"], "0", "{preset}");
        assert_eq!(rep["max_a_residual"], "0", "{preset}");
        assert_eq!(rep["moment_relation_residual"], "0", "{preset}");
        let check = read(dir.path(), "check.csv");
        for line in check.lines().skip(1) {
            let cols: Vec<&str> = line.split(',').collect();
            assert_eq!(cols[1], "0");
            assert!(cols[2].is_empty() || cols[2] == "0");
        }
    }
}

#[test]
fn jacobi_pineiro_report_agrees() {
    let (_, dir) = run_preset("perturb", "jp_demo.json", &["--nmax", "6"]);
    let rep = json(dir.path(), "jp_report.json");
    for row in rep["rows"].as_array().unwrap() {
        assert_eq!(row["tau_matches_window"], true);
        assert_ne!(row["type_ii_display"], false);
        assert_ne!(row["type_i_display"], false);
    }
}

#[test]
fn vanishing_tau_gives_exit_three() {
    let (code, dir) = run_preset("perturb", "scalar_model.json", &[]);
    assert_eq!(code, 0);
    let cfg = read(dir.path(), "report.json");
    assert!(cfg.contains("orthogonality exists"));
    let body = std::fs::read_to_string(presets().join("scalar_model.json")).unwrap().replace("\"3\"\n", "\"-2\"\n");
    let tmp = tempfile::tempdir().unwrap();
    let path = write_config(tmp.path(), &body);
    let (code, out, _) = mmop(&["perturb", "--config", path.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code, 3);
    assert!(out.contains("orthogonality truncates at n=0"), "{out}");
}

#[test]
fn tau_scan_locates_the_zero() {
    let (_, dir) = run_preset("tau-scan", "scalar_model.json", &[]);
    let csv = read(dir.path(), "tau_scan.csv");
    let zeros: Vec<&str> = csv.lines().filter(|l| l.contains(",0,0,true,")).collect();
    assert_eq!(zeros, vec!["-2,0,0,true,singular"]);
    let summary = json(dir.path(), "tau_scan.json");
    assert_eq!(summary["cells"], summary["consistent_cells"]);
}

#[test]
fn empty_grid_writes_only_the_header() {
    let body = r#"{"measure": {"kind": "jacobi", "alpha": "1/2", "beta": "0", "mass": "2/3"},
        "perturbation": {"r": [[["0", "1"]]], "hints": ["0"], "allow_boundary": true}}"#;
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), body);
    let (code, _, err) = mmop(&["tau-scan", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(read(dir.path(), "tau_scan.csv"), "xi_0,n,tau,zero,oracle\n");
}

#[test]
fn identity_perturbation() {
    let (code, dir) = run_preset("perturb", "identity.json", &[]);
    assert_eq!(code, 0);
    assert_eq!(json(dir.path(), "report.json")["verdict"], "identity perturbation: families unchanged");
    let (_, dir) = run_preset("stieltjes", "identity.json", &[]);
    assert_eq!(read(dir.path(), "stieltjes.csv"), "z,row,column,f,s,f_check,residual\n2,0,0,7/10,0,7/10,0\n");
}

#[test]
fn stieltjes_scalar_model_is_exact() {
    let (_, dir) = run_preset("stieltjes", "scalar_model.json", &[]);
    let csv = read(dir.path(), "stieltjes.csv");
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",0")), "{csv}");
}

#[test]
fn rational_runs_are_bit_exact() {
    let (_, a) = run_preset("perturb", "jp_demo.json", &["--nmax", "5"]);
    let (_, b) = run_preset("perturb", "jp_demo.json", &["--nmax", "5"]);
    for f in ["tau.csv", "check.csv", "report.json", "jp_report.json"] {
        assert_eq!(read(a.path(), f), read(b.path(), f), "{f}");
    }
}

#[test]
fn float_mode_runs_at_the_requested_precision() {
    let (code, dir) = run_preset("stieltjes", "jp_demo.json", &["--mode", "float", "--precision", "256"]);
    assert_eq!(code, 0);
    let csv = read(dir.path(), "stieltjes.csv");
    for line in csv.lines().skip(1) {
        let r: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!(r.abs() < 1e-30, "{line}");
    }
}
