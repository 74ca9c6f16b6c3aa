//! End-to-end tests of the binary: frozen example outputs, artifact
//! determinism, the config file path, and error reporting.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_motion-spherical"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary should run")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

fn tmp(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn eigs_so4_half_spins_are_frozen() {
    let out = run(&["eigs", "--n", "4", "--nu", "0.5", "--mu", "0.5"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "s,lambda,weight_dim\n0,1,3\n1,-3,1\n");
}

#[test]
fn spectrum_so3_mu1_rho2_is_frozen() {
    let out = run(&["spectrum", "--n", "3", "--mu", "1", "--rho", "2"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "xi1,xi2\n4,-2\n4,0\n4,2\n");
}

#[test]
fn transform_artifacts_are_byte_identical() {
    let a = tmp("det_a.csv");
    let b = tmp("det_b.csv");
    for path in [&a, &b] {
        let out = run(&[
            "transform",
            "--n",
            "4",
            "--nu",
            "1",
            "--mu",
            "1",
            "--rho-max",
            "2.5",
            "--rho-steps",
            "40",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn transform_then_decompose_recovers_the_default_profile() {
    let samples = tmp("pipe_samples.csv");
    let out = run(&[
        "transform", "--n", "3", "--mu", "1", "--rho-max", "3", "--rho-steps", "30", "--out",
        samples.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let out = run(&[
        "decompose",
        "--n",
        "3",
        "--mu",
        "1",
        "--in",
        samples.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["schema"], "motion-spherical-cli/1");
    // gamma_0(xi1) = (0.7 + 0.1 xi1) e^{-xi1/2} for the default profile
    let mut checked = 0;
    for row in report["rows"].as_array().unwrap() {
        if row["i"] == 0 && row["extrapolated"] == false {
            let xi1 = row["xi1"].as_f64().unwrap();
            let want = (0.7 + 0.1 * xi1) * (-0.5 * xi1).exp();
            let got = row["re"].as_f64().unwrap();
            assert!((got - want).abs() <= 1e-8 * (1.0 + want.abs()), "xi1={xi1}: {got} vs {want}");
            checked += 1;
        }
    }
    assert!(checked >= 25, "only {checked} direct rows");
}

#[test]
fn verify_subset_reports_json_and_exits_clean() {
    let out = run(&["verify", "--check", "2", "--check", "conditioning-bounds", "--format", "json"]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["passed"], true);
    let rows = report["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["id"], 2);
    assert_eq!(rows[1]["name"], "conditioning-bounds");
    assert!(rows.iter().all(|r| r["passed"] == true));
}

#[test]
fn verify_rejects_unknown_checks() {
    let out = run(&["verify", "--check", "bogus-invariant"]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("bogus-invariant"), "{err}");
}

#[test]
fn oracle_sweep_passes_on_a_single_type() {
    let out = run(&["oracle", "--n", "3", "--mu", "2"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.lines().count() > 5);
    assert!(!text.contains("FAIL"), "{text}");
}

#[test]
fn invalid_spin_pair_is_named_in_the_error() {
    let out = run(&["eigs", "--n", "4", "--nu", "0.5", "--mu", "1"]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("nu + mu"), "{err}");
}

#[test]
fn config_file_supplies_flags_and_checks_its_schema() {
    let cfg = tmp("run_config.json");
    fs::write(
        &cfg,
        r#"{"schema":"motion-spherical-cli/1","n":4,"nu":0.5,"mu":0.5}"#,
    )
    .unwrap();
    let out = run(&["eigs", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "s,lambda,weight_dim\n0,1,3\n1,-3,1\n");

    let stale = tmp("run_config_stale.json");
    fs::write(&stale, r#"{"schema":"motion-spherical-cli/0","n":4}"#).unwrap();
    let out = run(&["eigs", "--config", stale.to_str().unwrap()]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("schema mismatch"), "{err}");
}

#[test]
fn jet_reads_branch_samples_from_csv() {
    // psi_s(t) of u = 1 + xi2 along branch s: 1 + lambda_s t.
    // For n=4, nu=mu=1/2 the branch eigenvalues are 1 and -3.
    let order = 3;
    let h = 0.05;
    let mut text = String::from("s,t,value\n");
    for s in 0..2 {
        let lam = [1.0, -3.0][s];
        for j in 0..=(2 * (order + 6)) {
            let t = j as f64 * 0.5 * h;
            text.push_str(&format!("{s},{t},{}\n", 1.0 + lam * t));
        }
    }
    let path = tmp("branch_jet.csv");
    fs::write(&path, text).unwrap();
    let out = run(&[
        "jet",
        "--n",
        "4",
        "--nu",
        "0.5",
        "--mu",
        "0.5",
        "--in",
        path.to_str().unwrap(),
        "--order",
        "3",
        "--h",
        "0.05",
        "--tol",
        "1e-6",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let mut got = std::collections::HashMap::new();
    for line in text.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        got.insert(
            (cells[0].to_string(), cells[1].to_string()),
            cells[3].parse::<f64>().unwrap(),
        );
    }
    // d! a_{p,q}: constant term 1 and the xi2 coefficient 1, all else 0
    assert!((got[&("0".into(), "0".into())] - 1.0).abs() < 1e-7);
    assert!((got[&("1".into(), "1".into())] - 1.0).abs() < 1e-7);
    assert!(got[&("1".into(), "0".into())].abs() < 1e-7);
    assert!(got[&("2".into(), "0".into())].abs() < 1e-6);
}

#[test]
fn jet_synthetic_is_seed_deterministic() {
    let args =
        ["jet", "--n", "3", "--mu", "1", "--synthetic", "--order", "4", "--seed", "11"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["jet", "--n", "3", "--mu", "1", "--synthetic", "--order", "4", "--seed", "12"]);
    assert_ne!(a.stdout, c.stdout, "different seeds should change the table");
}

#[test]
fn extend_writes_grid_and_svg() {
    let csv = tmp("field.csv");
    let svg = tmp("field.svg");
    let out = run(&[
        "extend",
        "--n",
        "4",
        "--nu",
        "0.5",
        "--mu",
        "0.5",
        "--builder",
        "borel",
        "--samples",
        "17",
        "--out",
        csv.to_str().unwrap(),
        "--svg",
        svg.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("xi1,xi2,value\n"));
    assert_eq!(text.lines().count(), 1 + 17 * 17);
    // the borel default jet is 1 + xi2, and borel_phi is 1 at the origin:
    // the row nearest (0,0) must carry a value near 1
    let mut best = (f64::INFINITY, 0.0);
    for line in text.lines().skip(1) {
        let cells: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        let dist = cells[0].hypot(cells[1]);
        if dist < best.0 {
            best = (dist, cells[2]);
        }
    }
    let svg_text = fs::read_to_string(&svg).unwrap();
    assert!(svg_text.starts_with("<svg"));
    assert!(svg_text.trim_end().ends_with("</svg>"));
    assert!((best.1 - 1.0).abs() < 0.3, "origin value {}", best.1);
}
