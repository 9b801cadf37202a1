use std::path::PathBuf;
use std::process::Command;

use kepler_qbh_cli::reduce::cmd_reduce_kepler;
use kepler_qbh_cli::verify::cmd_verify;
use kepler_qbh_cli::RunConfig;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kepler-qbh"))
}

fn golden() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/reduce_kepler.json")
}

#[test]
fn verify_is_deterministic() {
    let c = RunConfig { points: 60, ..Default::default() };
    let a = cmd_verify(&c).unwrap().to_json().unwrap();
    let b = cmd_verify(&c).unwrap().to_json().unwrap();
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["schema"], "kepler-qbh/verify/v1");
    for key in ["name", "paper_ref", "points", "max_residual", "fitted_constants", "pass"] {
        assert!(v["suites"][0].get(key).is_some(), "missing {key}");
    }
    assert!(v["mismatches"].as_array().unwrap().len() > 10);
}

#[test]
fn verify_reference_couplings_fit_expected_factors() {
    let c = RunConfig { k1: 1.0, k2: 0.0, k3: 0.0, points: 100, ..Default::default() };
    let r = cmd_verify(&c).unwrap();
    assert!(r.pass(), "{:#?}", r.suites.iter().filter(|s| !s.pass).collect::<Vec<_>>());
    let s = r.suites.iter().find(|s| s.name == "bracket_scalings").unwrap();
    for (name, want) in [("c_A", 2.0), ("c_B", 2.0), ("c_M_a", 1.0), ("c_M_b", 1.0)] {
        assert!((s.fitted_constants[name].mean - want).abs() < 1e-9, "{name}");
    }
}

#[test]
fn unattainable_tolerance_exits_one_with_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let st = bin().args(["verify", "--points", "20", "--tol", "1e-30", "--out"]).arg(&out).status().unwrap();
    assert_eq!(st.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(v["suites"].as_array().unwrap().iter().any(|s| s["pass"] == false && s["max_residual"].as_f64().unwrap() > 0.0));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(bin().args(["verify", "--points", "0"]).output().unwrap().status.code(), Some(2));
    assert_eq!(bin().args(["orbit", "--dt", "-1"]).output().unwrap().status.code(), Some(2));
    assert_eq!(bin().args(["orbit", "--integrator", "euler"]).output().unwrap().status.code(), Some(2));
    assert_eq!(bin().args(["frobnicate"]).output().unwrap().status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "colour = red\n").unwrap();
    assert_eq!(bin().arg("verify").arg("--config").arg(&cfg).output().unwrap().status.code(), Some(2));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# orbit settings\nt_max = 0.01\ndt = 0.005\nk1 = 2\n").unwrap();
    let out = dir.path().join("o.csv");
    let st = bin().arg("orbit").arg("--config").arg(&cfg).args(["--dt", "0.001", "--out"]).arg(&out).output().unwrap();
    assert_eq!(st.status.code(), Some(0));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 1 + 11);
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.with_extension("drift.json")).unwrap()).unwrap();
    assert_eq!(summary["config"]["k1"], 2.0);
    assert_eq!(summary["config"]["dt"], 0.001);
}

#[test]
fn orbit_csv_contract() {
    let o = bin().args(["orbit", "--t-max", "0"]).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let csv = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines, ["t,a,b,pa,pb,H,J3,J4,K3,K4,I2", "0,1,0,0,1,1.8,2,0.2,0.4,-3.04,2"]);
    let o = bin().args(["orbit", "--t-max", "0.05", "--dt", "0.01", "--integrator", "rk4"]).output().unwrap();
    let csv = String::from_utf8(o.stdout).unwrap();
    for row in csv.lines().skip(1) {
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells.len(), 11);
        for c in cells {
            let digits = c.trim_start_matches('-').split('e').next().unwrap().replace('.', "");
            assert!(digits.trim_start_matches('0').len() <= 15, "{c}");
            c.parse::<f64>().unwrap();
        }
    }
}

#[test]
fn orbit_truncation_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fall.csv");
    let st = bin().args(["orbit", "--k1", "-2", "--k2", "0", "--k3", "0", "--pa0", "-1", "--pb0", "0", "--t-max", "5", "--out"]).arg(&out).output().unwrap();
    assert_eq!(st.status.code(), Some(0));
    let summary: serde_json::Value = serde_json::from_slice(&st.stdout).unwrap();
    assert_eq!(summary["status"], "truncated");
    let rows = std::fs::read_to_string(&out).unwrap().lines().count() - 1;
    assert_eq!(rows, summary["states"].as_u64().unwrap() as usize);
    assert!(rows < 5001);
}

#[test]
fn spectrum_reports_all_operators() {
    let o = bin().args(["spectrum", "--points", "10", "--t-max", "1", "--dt", "0.01"]).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["summary"]["total"], 40);
    assert_eq!(v["summary"]["pattern_points"], 40);
    assert!(v["summary"]["max_relative_det"].as_f64().unwrap() < 1e-12);
    assert_eq!(v["orbit"]["tau"]["R2"].as_array().unwrap().len(), v["orbit"]["times"].as_array().unwrap().len());
}

#[test]
fn reduce_kepler_matches_golden() {
    let text = cmd_reduce_kepler(&RunConfig::default()).unwrap().to_json().unwrap();
    assert_eq!(text, std::fs::read_to_string(golden()).unwrap());
    let st = bin().arg("reduce-kepler").arg("--golden").arg(golden()).output().unwrap();
    assert_eq!(st.status.code(), Some(0));
}

#[test]
fn reduce_kepler_golden_mismatch_exits_one_with_diff() {
    let dir = tempfile::tempdir().unwrap();
    let tampered = dir.path().join("golden.json");
    let text = std::fs::read_to_string(golden()).unwrap().replacen("\"seed\": 1", "\"seed\": 2", 1);
    std::fs::write(&tampered, text).unwrap();
    let o = bin().arg("reduce-kepler").arg("--golden").arg(&tampered).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("golden mismatch") && err.contains("\"seed\": 2"));
}
