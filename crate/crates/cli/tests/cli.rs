// Copyright 2026 The noonforge Developers
// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn noonforge(dir: &Path, config: Option<&str>, args: &[&str]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_noonforge"));
    cmd.arg("--out").arg(dir.join("out"));
    if let Some(text) = config {
        let path = dir.join("run.json");
        fs::write(&path, text).unwrap();
        cmd.arg("--config").arg(path);
    }
    cmd.args(args).env_remove("NOONFORGE_THREADS");
    cmd.output().expect("binary runs")
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout:\n{}\nstderr:\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join("out").join(name)).unwrap()
}

/// Data rows of a CSV with the provenance line and header removed.
fn rows(text: &str) -> Vec<Vec<String>> {
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# noonforge "));
    lines.next().unwrap();
    lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let out = noonforge(dir.path(), Some(r#"{"seed": 1, "sede": 2}"#), &["steady"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("sede") && err.contains("line 1"), "{err}");
}

#[test]
fn malformed_json_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let out = noonforge(dir.path(), Some("{\n  \"seed\": \n"), &["steady"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_params_without_preset_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let out = noonforge(dir.path(), None, &["steady"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn preset_g0_is_printed_in_hertz() {
    let dir = TempDir::new().unwrap();
    let out = noonforge(
        dir.path(),
        None,
        &[
            "--preset",
            "paper-feasibility",
            "hamiltonian",
            "--name",
            "cross_kerr",
        ],
    );
    ok(&out);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("g0 = 2pi*5 Hz"), "{stdout}");
}

#[test]
fn cross_kerr_spectrum_is_the_diagonal() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{
        "params": {"nu": 10, "delta0": 100, "delta1": 10, "delta2": 3, "omega_rabi": 1,
                   "eta": 0.1, "phi": 0.7853981633974483, "pump": [0, 0],
                   "gamma": 0, "gamma_motion": 0, "gamma_e": 0},
        "layout": {"a": 3, "b2": 2, "ion_levels": 2},
        "hamiltonian": {"name": "cross_kerr"}
    }"#;
    ok(&noonforge(dir.path(), Some(cfg), &["hamiltonian"]));
    let gck = 2.0 * 0.01 / 3.0;
    let mut expected: Vec<f64> = Vec::new();
    for _ion in 0..2 {
        for nb in 0..2 {
            for na in 0..3 {
                let (na, nb) = (na as f64, nb as f64);
                expected.push(10.0 * na + 3.0 * nb - gck * na * nb);
            }
        }
    }
    expected.sort_by(f64::total_cmp);
    let got: Vec<f64> = rows(&read(dir.path(), "spectrum.csv"))
        .iter()
        .map(|r| num(&r[1]))
        .collect();
    assert_eq!(got.len(), expected.len());
    for (g, e) in got.iter().zip(&expected) {
        assert!((g - e).abs() < 1e-12, "{g} vs {e}");
    }
    let h = read(dir.path(), "hamiltonian.csv");
    assert!(h.lines().nth(1).unwrap().starts_with("row,col,re,im"));
}

#[test]
fn unknown_hamiltonian_is_a_precondition_error() {
    let dir = TempDir::new().unwrap();
    let out = noonforge(
        dir.path(),
        None,
        &[
            "--preset",
            "paper-feasibility",
            "hamiltonian",
            "--name",
            "nonsense",
        ],
    );
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn sweep_zero_photon_rows_are_one_and_reruns_are_identical() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"fidelity_sweep": {"n_max": 4, "percents": [1, 5, 50], "samples": 500}}"#;
    ok(&noonforge(
        dir.path(),
        Some(cfg),
        &["fidelity-sweep", "--seed", "7"],
    ));
    let first = read(dir.path(), "sweep.csv");
    let table = rows(&first);
    assert_eq!(table.len(), 15);
    for r in table.iter().filter(|r| r[0] == "0") {
        assert_eq!(num(&r[4]), 1.0);
        assert_eq!(num(&r[7]), 1.0);
    }
    ok(&noonforge(
        dir.path(),
        Some(cfg),
        &["fidelity-sweep", "--seed", "7", "--threads", "3"],
    ));
    assert_eq!(first, read(dir.path(), "sweep.csv"));
    ok(&noonforge(
        dir.path(),
        Some(cfg),
        &["fidelity-sweep", "--seed", "8"],
    ));
    assert_ne!(first, read(dir.path(), "sweep.csv"));
}

#[test]
fn provenance_tracks_the_effective_config() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"fidelity_sweep": {"n_max": 1, "percents": [1], "samples": 10}}"#;
    ok(&noonforge(
        dir.path(),
        Some(cfg),
        &["fidelity-sweep", "--seed", "1"],
    ));
    let a = read(dir.path(), "sweep.csv")
        .lines()
        .next()
        .unwrap()
        .to_string();
    ok(&noonforge(
        dir.path(),
        Some(cfg),
        &["fidelity-sweep", "--seed", "2"],
    ));
    let b = read(dir.path(), "sweep.csv")
        .lines()
        .next()
        .unwrap()
        .to_string();
    assert!(a.ends_with("seed=1") && b.ends_with("seed=2"));
    assert_ne!(a.split(' ').nth(3), b.split(' ').nth(3));
    assert!(!read(dir.path(), "sweep.csv").contains('\r'));
}

const EVOLVE_PARAMS: &str = r#""params": {"nu": 1, "delta0": 100, "delta1": 1, "delta2": 2,
    "omega_rabi": 0.5, "eta": 0.1, "phi": 0.7853981633974483, "pump": [0, 0],
    "gamma": 0.2, "gamma_motion": 0.05, "gamma_e": 0},
    "layout": {"a": 3, "b2": 3, "ion_levels": 3}"#;

#[test]
fn zero_duration_evolution_echoes_the_initial_state() {
    let dir = TempDir::new().unwrap();
    let cfg = format!(
        r#"{{ {EVOLVE_PARAMS},
        "evolve": {{"hamiltonian": {{"name": "antinode"}}, "duration": 0, "samples": 1,
                    "initial": [{{"a": 1, "b2": 2}}]}} }}"#
    );
    ok(&noonforge(dir.path(), Some(&cfg), &["evolve"]));
    let table = rows(&read(dir.path(), "trajectory.csv"));
    let value = |name: &str| -> Vec<f64> {
        table
            .iter()
            .filter(|r| r[1] == name)
            .map(|r| num(&r[2]))
            .collect()
    };
    for v in value("n_a") {
        assert_eq!(v, 1.0);
    }
    for v in value("n_b2") {
        assert_eq!(v, 2.0);
    }
    for v in value("p_level_0") {
        assert_eq!(v, 1.0);
    }
    assert!(value("trace").iter().all(|&t| t == 1.0));
}

#[test]
fn master_evolution_keeps_the_trace() {
    let dir = TempDir::new().unwrap();
    let cfg = format!(
        r#"{{ {EVOLVE_PARAMS},
        "evolve": {{"hamiltonian": {{"name": "antinode"}}, "duration": 5, "samples": 10,
                    "initial": [{{"a": 1}}, {{"b2": 1, "amplitude": [0, 1]}}]}} }}"#
    );
    ok(&noonforge(dir.path(), Some(&cfg), &["evolve"]));
    let table = rows(&read(dir.path(), "trajectory.csv"));
    let traces: Vec<f64> = table
        .iter()
        .filter(|r| r[1] == "trace")
        .map(|r| num(&r[2]))
        .collect();
    assert_eq!(traces.len(), 11);
    for t in traces {
        assert!((t - 1.0).abs() < 1e-9, "{t}");
    }
    let purity: Vec<f64> = table
        .iter()
        .filter(|r| r[1] == "purity")
        .map(|r| num(&r[2]))
        .collect();
    assert!(purity.last().unwrap() < &0.999);
}

#[test]
fn fixed_step_evolution_is_bit_identical() {
    let dir = TempDir::new().unwrap();
    let cfg = format!(
        r#"{{ {EVOLVE_PARAMS},
        "evolve": {{"hamiltonian": {{"name": "antinode"}}, "duration": 2, "samples": 4,
                    "step_control": {{"fixed": {{"dt": 0.01}}}},
                    "initial": [{{"a": 1}}, {{"b2": 1}}]}} }}"#
    );
    ok(&noonforge(dir.path(), Some(&cfg), &["evolve"]));
    let first = read(dir.path(), "trajectory.csv");
    ok(&noonforge(dir.path(), Some(&cfg), &["evolve"]));
    assert_eq!(first, read(dir.path(), "trajectory.csv"));
}

#[test]
fn unitary_evolution_conserves_excitations() {
    let dir = TempDir::new().unwrap();
    let cfg = format!(
        r#"{{ {EVOLVE_PARAMS},
        "evolve": {{"hamiltonian": {{"name": "jc_resonant"}}, "method": "unitary",
                    "duration": 3, "samples": 6, "initial": [{{"b2": 1}}]}} }}"#
    );
    ok(&noonforge(dir.path(), Some(&cfg), &["evolve"]));
    let table = rows(&read(dir.path(), "trajectory.csv"));
    let series = |name: &str| -> Vec<f64> {
        table
            .iter()
            .filter(|r| r[1] == name)
            .map(|r| num(&r[2]))
            .collect()
    };
    let nb = series("n_b2");
    let pe = series("p_level_2");
    for (k, (b, e)) in nb.iter().zip(&pe).enumerate() {
        assert!((b + e - 1.0).abs() < 1e-12);
        let t = 3.0 * k as f64 / 6.0;
        assert!((b - (0.5 * t).cos().powi(2)).abs() < 1e-12);
    }
}

#[test]
fn steady_without_pump_is_zero() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"preset": "paper-feasibility", "params": {"pump": [0, 0]}}"#;
    ok(&noonforge(dir.path(), Some(cfg), &["steady"]));
    let v: Value = serde_json::from_str(&read(dir.path(), "steady.json")).unwrap();
    let st = &v["steady"]["state"];
    for key in ["alpha", "beta"] {
        assert_eq!(st[key][0].as_f64().unwrap(), 0.0);
        assert_eq!(st[key][1].as_f64().unwrap(), 0.0);
    }
    assert!(v["provenance"]["config_sha256"].as_str().unwrap().len() == 64);
}

#[test]
fn steady_preset_is_stable() {
    let dir = TempDir::new().unwrap();
    ok(&noonforge(
        dir.path(),
        None,
        &["--preset", "paper-feasibility", "steady"],
    ));
    let v: Value = serde_json::from_str(&read(dir.path(), "steady.json")).unwrap();
    assert_eq!(v["stability"]["stable"], Value::Bool(true));
    assert!(v["steady"]["residual"].as_f64().unwrap() <= 1e-12);
    let beta_im = v["steady"]["state"]["beta"][1].as_f64().unwrap();
    assert!((beta_im - 1000f64.sqrt()).abs() < 1e-6);
}

#[test]
fn protocol_single_photon_ideal() {
    let dir = TempDir::new().unwrap();
    for outcome in ["ground", "excited"] {
        let cfg = format!(r#"{{"protocol": {{"n": 1, "outcome": "{outcome}"}}}}"#);
        ok(&noonforge(dir.path(), Some(&cfg), &["protocol"]));
        let v: Value = serde_json::from_str(&read(dir.path(), "protocol.json")).unwrap();
        let sel = &v["selected"];
        assert!(sel["fidelity"].as_f64().unwrap() >= 1.0 - 1e-10);
        assert!((sel["probability"].as_f64().unwrap() - 0.5).abs() < 1e-10);
        assert!(v["seed"].is_null());
    }
    let state = read(dir.path(), "state.csv");
    assert!(state.lines().nth(1).unwrap().starts_with("flat,"));
}

#[test]
fn protocol_sampled_outcome_depends_only_on_seed() {
    let dir = TempDir::new().unwrap();
    let mut seen = Vec::new();
    for _ in 0..2 {
        ok(&noonforge(
            dir.path(),
            None,
            &["protocol", "--n", "2", "--seed", "11"],
        ));
        seen.push(read(dir.path(), "protocol.json"));
    }
    assert_eq!(seen[0], seen[1]);
}

#[test]
fn protocol_physical_single_photon() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"preset": "paper-feasibility", "protocol": {"n": 1, "mode": "physical"}}"#;
    ok(&noonforge(dir.path(), Some(cfg), &["protocol"]));
    let v: Value = serde_json::from_str(&read(dir.path(), "protocol.json")).unwrap();
    assert_eq!(v["mode"], "physical");
    assert!(v["fidelity_to_ideal"].as_f64().unwrap() > 0.99);
}

#[test]
fn protocol_cutoff_too_small_is_a_precondition_error() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"layout": {"a": 2, "b1": 2, "b2": 2, "ion_levels": 2},
                  "protocol": {"n": 3, "outcome": "ground"}}"#;
    let out = noonforge(dir.path(), Some(cfg), &["protocol"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
}

#[test]
fn elimination_without_coupling_has_zero_rows() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"verify_elimination": {"ratios": [5], "omega": 0, "cutoff_a": 4,
                  "samples": 4, "duration": 10}}"#;
    ok(&noonforge(dir.path(), Some(cfg), &["verify-elimination"]));
    let table = rows(&read(dir.path(), "elimination.csv"));
    assert_eq!(table.len(), 5);
    for r in table {
        assert!(num(&r[2]).abs() < 1e-12, "{r:?}");
    }
}

#[test]
fn elimination_improves_with_detuning() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"verify_elimination": {"ratios": [5, 10, 20], "cutoff_a": 4, "samples": 8}}"#;
    ok(&noonforge(dir.path(), Some(cfg), &["verify-elimination"]));
    let table = rows(&read(dir.path(), "elimination_summary.csv"));
    let inf: Vec<f64> = table.iter().map(|r| num(&r[1])).collect();
    let res: Vec<f64> = table.iter().map(|r| num(&r[2])).collect();
    assert!(inf.windows(2).all(|w| w[1] < w[0]), "{inf:?}");
    assert!(res.windows(2).all(|w| w[1] < w[0]), "{res:?}");
}

#[test]
fn zero_threads_is_rejected() {
    let dir = TempDir::new().unwrap();
    let out = noonforge(
        dir.path(),
        None,
        &["--threads", "0", "protocol", "--n", "1"],
    );
    assert_eq!(out.status.code(), Some(2));
}
