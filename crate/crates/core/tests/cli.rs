// Copyright 2026 The zeno Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn zeno(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zeno")).args(args).output().unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

const RABI: &str = r#"{
    "schema_version": 1,
    "scenario": {"kind": "rabi_drive",
        "m_y": {"kind": "power_law", "amplitude": 1, "exponent": 3, "support": [0, 2]},
        "omega_f": 1, "omega": 0.2, "omega_21": 4},
    "sweep": {"parameter": "rabi.omega", "values": [0.1, 0.2, 0.4]}
}"#;

const UNSTABLE: &str = r#"{
    "schema_version": 1,
    "scenario": {"kind": "unstable_level",
        "m_y": {"kind": "flat", "level": 0.5, "support": [0, 2]},
        "omega_f": 1, "omega_12": 3, "lambda_r": 0.5, "lambda_i": 0.25}
}"#;

#[test]
fn validate_accepts_good_and_names_bad_fields() {
    let dir = TempDir::new().unwrap();
    let good = write(&dir, "good.json", RABI);
    let out = zeno(&["validate", path(&good)]);
    assert_eq!(out.status.code(), Some(0));

    let bad = write(&dir, "bad.json", &RABI.replace(r#""omega_21": 4"#, r#""omega_21": "four""#));
    let out = zeno(&["validate", path(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("scenario.omega_21"));

    let unsorted = write(&dir, "unsorted.json", &RABI.replace("[0.1, 0.2, 0.4]", "[0.2, 0.1]"));
    let out = zeno(&["validate", path(&unsorted)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sweep.values"));
}

#[test]
fn analytic_sweep_writes_csv_and_json() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "rabi.json", RABI);
    let out = zeno(&["run", path(&cfg), "--jobs", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "sweep_param,sweep_value,gamma_analytic,gamma0,ratio,status,quadrature_error,normalization_defect,diagnostics"
    );
    let ratios: Vec<f64> = lines.map(|l| l.split(',').nth(4).unwrap().parse().unwrap()).collect();
    for (r, e) in ratios.iter().zip([1.0075, 1.03, 1.12]) {
        assert!((r - e).abs() < 1e-12);
    }

    let json_path = dir.path().join("out.json");
    let out = zeno(&["run", path(&cfg), "--format", "json", "--out", path(&json_path)]);
    assert_eq!(out.status.code(), Some(0));
    let rows: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 3);
    assert_eq!(rows[1]["sweep_value"], 0.2);
    assert_eq!(rows[1]["status"], "ok");
    assert!(rows[1].get("gamma_dynamic").is_none());
}

#[test]
fn failed_rows_exit_with_one() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "tiny_cap.json",
        &RABI.replace(r#""sweep""#, r#""routes": "dynamic", "dynamic": {"n_y": 100, "dimension_cap": 10}, "sweep""#),
    );
    let out = zeno(&["run", path(&cfg), "--jobs", "1"]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().skip(1).all(|l| l.contains("dimension_over_budget")));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(zeno(&["run"]).status.code(), Some(2));
    assert_eq!(zeno(&["run", "/no/such/config.json"]).status.code(), Some(2));
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "rabi.json", RABI);
    assert_eq!(zeno(&["kernel", path(&cfg), "--range", "1:0:5"]).status.code(), Some(2));
}

#[test]
fn kernel_samples_and_atoms() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "unstable.json", UNSTABLE);
    let out = zeno(&["kernel", path(&cfg), "--range", "-2:2:5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<(f64, f64)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 5);
    for (eps, v) in rows {
        let x = eps - 0.25;
        let expected = 0.5 / (std::f64::consts::PI * (0.25 + x * x));
        assert!((v - expected).abs() < 1e-15 * expected.max(1.0));
    }

    let rabi = write(&dir, "rabi.json", RABI);
    let out = zeno(&["kernel", path(&rabi), "--range", "-1:1:3"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text, "atom_epsilon,atom_weight\n-0.1,0.5\n0.1,0.5\n");
}

#[test]
fn trace_emits_dissipation_samples() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "cascade.json",
        &UNSTABLE.replace(r#""lambda_r": 0.5, "lambda_i": 0.25"#, r#""lambda_r": 0.5"#).replace(
            r#""schema_version": 1,"#,
            r#""schema_version": 1, "dynamic": {"n_y": 100, "n_z": 50},"#,
        ),
    );
    let out = zeno(&["trace", path(&cfg), "--quantity", "D", "--horizon", "10", "--samples", "100"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "tau,re,im,abs");
    let first: Vec<f64> = lines.next().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(first, [0.0, 1.0, 0.0, 1.0]);
    let last: Vec<f64> = text.lines().last().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    // synthesized band: |D(τ)| ≈ e^{-λ τ}
    assert!((last[0] - 10.0).abs() < 1e-9);
    assert!((last[3] - (-5.0f64).exp()).abs() < 0.2 * (-5.0f64).exp(), "{last:?}");
}
