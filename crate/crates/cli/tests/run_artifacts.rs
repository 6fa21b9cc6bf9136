use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::Command;

use chiral_gap::pipeline::Pipeline;
use chiral_gap::{
    parse_config, run_experiment, scaling_suite, verify_run, Axis, ExperimentConfig, Mode,
};

fn tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().into_string().unwrap(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect()
}

#[test]
fn default_run_is_complete_green_and_reproducible() {
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cfg = ExperimentConfig::default();
    let out = run_experiment(&cfg, d1.path()).unwrap();
    assert!(out.all_passed(), "{:?}", out.checks);
    for name in [
        "bands.csv",
        "gaps.csv",
        "ensemble.csv",
        "massshifts.csv",
        "spectrum.csv",
        "staircase.csv",
        "trace_report.json",
        "matmodel_report.json",
        "diagnostics.json",
        "staircase.svg",
        "manifest.json",
    ] {
        assert!(out.artifacts.iter().any(|a| a == name), "missing {name}");
    }
    assert!(
        fs::read_to_string(out.path("spectrum.csv"))
            .unwrap()
            .lines()
            .count()
            > 1
    );
    run_experiment(&cfg, d2.path()).unwrap();
    assert_eq!(tree(d1.path()), tree(d2.path()));

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.path("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config_hash"], cfg.hash());
    let reparsed = parse_config(&manifest["config"].to_string()).unwrap();
    assert_eq!(reparsed, cfg);
    assert!(verify_run(d1.path()).unwrap().ok());

    fs::write(out.path("spectrum.csv"), "tampered\n").unwrap();
    let report = verify_run(d1.path()).unwrap();
    assert_eq!(report.mismatched, vec!["spectrum.csv".to_string()]);
}

#[test]
fn diagnostics_json_is_self_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_experiment(&ExperimentConfig::default(), dir.path()).unwrap();
    let d: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.path("diagnostics.json")).unwrap()).unwrap();
    let dev: Vec<f64> = d["deviations"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert_eq!(dev.len(), 20);
    let mae = dev.iter().map(|x| x.abs()).sum::<f64>() / 20.0;
    assert_eq!(mae, d["MAE"].as_f64().unwrap());
    assert_eq!(d["K"], 20);
    assert_eq!(d["T"], 80.0);
    assert!(d["flags"].as_array().unwrap().is_empty());
    let mae = d["MAE"].as_f64().unwrap();
    assert!((1.0..=40.0).contains(&mae));
}

#[test]
fn near_zero_mass_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_config(r#"{"mode": "constant_one", "epsilon": 50}"#).unwrap();
    let p = Pipeline::run(&cfg).unwrap();
    let mass = p.shifts.values()[0];
    assert!(mass > 0.0 && mass < 1e-14);
    // Every jump sits at an unperturbed fiber value moved by the constant mass.
    for &(x, _) in p.staircase.jumps() {
        let hit = p
            .bands
            .bands()
            .iter()
            .flatten()
            .any(|&e| ((e - p.e_star + mass).abs() - x).abs() < 1e-10);
        assert!(hit, "jump at {x}");
    }
    let out = run_experiment(&cfg, dir.path()).unwrap();
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.path("matmodel_report.json")).unwrap())
            .unwrap();
    assert!(report["krein"]["krein_gap"].as_f64().unwrap() < 1e-9);
    assert_eq!(out.checks["euler_factorization"], true);
}

#[test]
fn failed_run_leaves_no_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("out");
    let cfg = parse_config(r#"{"gap_index": 9}"#).unwrap();
    let err = run_experiment(&cfg, &target).unwrap_err();
    assert!(err.to_string().starts_with("floquet:"), "{err}");
    assert!(!target.exists() || fs::read_dir(&target).unwrap().next().is_none());
}

#[test]
fn suite_rows_match_single_runs() {
    let base = ExperimentConfig::default();
    let rows = scaling_suite(Axis::Modes, &[20], &base).unwrap();
    let single = Pipeline::run(&base).unwrap().alignment.unwrap().report;
    assert_eq!(
        (rows[0].mae, rows[0].max_abs, rows[0].e_step),
        (single.mae, single.max_abs, single.e_step)
    );

    let rows = scaling_suite(Axis::Primes, &[20, 100, 500], &base).unwrap();
    assert_eq!(
        rows.iter().map(|r| r.axis_value).collect::<Vec<_>>(),
        vec![20, 100, 500]
    );
    let mut cfg = base.clone();
    cfg.n_primes = 100;
    let standalone = Pipeline::run(&cfg).unwrap().alignment.unwrap().report;
    assert_eq!(rows[1].mae, standalone.mae);
    assert_eq!(rows[1].e_step, standalone.e_step);

    let seeds = scaling_suite(Axis::Seed, &[12345, 54321, 10101, 99999], &base).unwrap();
    assert_eq!(seeds.len(), 4);
    assert!(seeds
        .iter()
        .all(|r| r.mae.is_finite() && r.max_abs.is_finite() && r.e_step.is_finite()));
}

#[test]
fn failing_suite_value_is_named() {
    let mut base = ExperimentConfig::default();
    base.mode = Mode::ConstantOne;
    base.epsilon = 50.0;
    let err = scaling_suite(Axis::Seed, &[1, 2], &base).unwrap_err();
    assert!(err.to_string().contains("seed = 1"), "{err}");
}

#[test]
fn binary_subcommands() {
    let bin = env!("CARGO_BIN_EXE_chiral-gap");
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("cfg.json");
    fs::write(&cfg_path, r#"{"N_P": 10}"#).unwrap();
    let run_dir = dir.path().join("run");

    let status = Command::new(bin)
        .args(["run", "--config"])
        .arg(&cfg_path)
        .arg("--out")
        .arg(&run_dir)
        .status()
        .unwrap();
    assert!(status.success());
    let status = Command::new(bin)
        .args(["verify", "--out"])
        .arg(&run_dir)
        .status()
        .unwrap();
    assert!(status.success());

    let out = Command::new(bin)
        .args(["suite", "--axis", "N_H", "--values", "20,40"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let table = String::from_utf8(out.stdout).unwrap();
    assert_eq!(table.lines().next(), Some("axis_value,MAE,max_abs,E_step"));
    assert_eq!(table.lines().count(), 3);

    let bands_dir = dir.path().join("bands");
    assert!(Command::new(bin)
        .args(["bands", "--out"])
        .arg(&bands_dir)
        .status()
        .unwrap()
        .success());
    assert_eq!(
        fs::read_to_string(bands_dir.join("gaps.csv"))
            .unwrap()
            .lines()
            .count(),
        4
    );

    let plot_dir = dir.path().join("plot");
    assert!(Command::new(bin)
        .args(["plot", "--out"])
        .arg(&plot_dir)
        .status()
        .unwrap()
        .success());
    let default_run = dir.path().join("default");
    run_experiment(&ExperimentConfig::default(), &default_run).unwrap();
    assert_eq!(
        fs::read(plot_dir.join("staircase.svg")).unwrap(),
        fs::read(default_run.join("staircase.svg")).unwrap()
    );

    fs::write(&cfg_path, r#"{"epsilon": -1}"#).unwrap();
    let out = Command::new(bin)
        .args(["run", "--config"])
        .arg(&cfg_path)
        .arg("--out")
        .arg(dir.path().join("bad"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Assumption B violated"));
}
