//! End-to-end tests of the `posic` binary: presets, exit codes, artifact
//! formats and determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn posic(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_posic"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn assert_nonempty(path: &Path) {
    let meta = fs::metadata(path).unwrap_or_else(|_| panic!("{} missing", path.display()));
    assert!(meta.len() > 0, "{} is empty", path.display());
}

#[test]
fn every_fig_preset_runs_end_to_end() {
    let presets: &[(&str, &str, &[&str])] = &[
        ("fig_genexp", "simulate", &["trajectory.csv", "metrics.json"]),
        ("fig_genexpeta", "simulate", &["trajectory.csv", "metrics.json"]),
        (
            "fig_stdint",
            "simulate",
            &["trajectory.csv", "trajectory_standard.csv", "metrics.json"],
        ),
        ("fig_sis", "simulate", &["trajectory.csv", "metrics.json"]),
        ("fig_bif", "sweep", &["sweep.csv", "sweep_summary.json"]),
        ("fig_rl1", "locus", &["locus.csv", "locus_summary.json"]),
        ("fig_rl2", "locus", &["locus.csv", "locus_summary.json"]),
    ];
    for (preset, subcommand, artifacts) in presets {
        let tmp = tempfile::tempdir().unwrap();
        let out = posic(&[subcommand, "--preset", preset, "--out", "run"], tmp.path());
        assert!(
            out.status.success(),
            "{preset} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        for artifact in *artifacts {
            assert_nonempty(&tmp.path().join("run").join(artifact));
        }
    }
}

#[test]
fn rerun_is_bit_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |dir: &str| {
        let out = posic(&["simulate", "--preset", "fig_genexp", "--out", dir], tmp.path());
        assert!(out.status.success());
        fs::read(tmp.path().join(dir).join("trajectory.csv")).unwrap()
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn bounds_report_values() {
    let tmp = tempfile::tempdir().unwrap();
    let out = posic(&["bounds", "--preset", "fig_genexp", "--out", "run"], tmp.path());
    assert!(out.status.success());
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("run/bounds.json")).unwrap())
            .unwrap();
    assert_eq!(doc["schema_version"], 1);
    assert!((doc["k_bar_inf"].as_f64().unwrap() - 2.0).abs() < 1e-10);
    assert!((doc["eta_bar_inf"].as_f64().unwrap() - 2.0).abs() < 1e-10);
    assert!((doc["alpha_bar_inf"].as_f64().unwrap() - 2.0).abs() < 1e-10);
    assert!((doc["xi_bar_inf"].as_f64().unwrap() - 8.0).abs() < 1e-10);
    assert_eq!(doc["spr"], false);
}

#[test]
fn sis_bounds_are_infinite_and_spr() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = r#"{
  "system": {"builtin": {"id": "sis", "params": {"beta": 1.0, "n_total": 100.0}}},
  "controller": {"type": "antithetic", "k": 2.0, "keta": 13.0, "mu": 50.0}
}"#;
    fs::write(tmp.path().join("s.json"), scenario).unwrap();
    let out = posic(&["bounds", "--scenario", "s.json", "--out", "run"], tmp.path());
    assert!(out.status.success());
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("run/bounds.json")).unwrap())
            .unwrap();
    assert_eq!(doc["k_bar_inf"], "inf");
    assert_eq!(doc["eta_bar_inf"], "inf");
    assert_eq!(doc["alpha_bar_inf"], "inf");
    assert_eq!(doc["xi_bar_inf"], "inf");
    assert_eq!(doc["spr"], true);
    assert_eq!(doc["gain_sign"], "positive");
}

#[test]
fn repressed_translation_bounds_negative_gain() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = r#"{
  "system": {"builtin": {"id": "repressed_translation",
             "params": {"k1": 2.0, "k2": 3.0, "gamma1": 0.8, "gamma2": 1.1}}},
  "controller": {"type": "antithetic", "k": 1.0, "eta": 2.0, "mu": 2.0,
                 "actuation_sign": "auto"}
}"#;
    fs::write(tmp.path().join("s.json"), scenario).unwrap();
    let out = posic(&["bounds", "--scenario", "s.json", "--out", "run"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("run/bounds.json")).unwrap())
            .unwrap();
    assert_eq!(doc["k_bar_inf"], "inf");
    assert_eq!(doc["spr"], true);
    assert_eq!(doc["gain_sign"], "negative");
}

#[test]
fn example1_check_emits_note() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("s.json"),
        r#"{
  "system": {"builtin": {"id": "example1"}},
  "controller": {"type": "antithetic", "k": 1.0, "eta": 1.0, "mu": 10.0}
}"#,
    )
    .unwrap();
    let out = posic(&["check", "--scenario", "s.json", "--out", "run"], tmp.path());
    assert!(out.status.success());
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("run/check.json")).unwrap())
            .unwrap();
    assert_eq!(doc["stability_assumption_ok"], true);
    let notes = doc["notes"].as_array().unwrap();
    assert!(notes[0].as_str().unwrap().contains("lower-right entry"));
}

#[test]
fn check_fails_on_non_metzler_inline_system() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("s.json"),
        r#"{
  "system": {"inline": {"a": [[-1.0, -1.0], [0.0, -1.0]], "b": [1.0, 0.0], "c": [0.0, 1.0]}},
  "controller": {"type": "antithetic", "k": 1.0, "eta": 1.0, "mu": 1.0}
}"#,
    )
    .unwrap();
    let out = posic(&["check", "--scenario", "s.json", "--out", "run"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("not internally positive"));
}

#[test]
fn assumption_violation_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    // gamma^2 < k1 k2: not Hurwitz
    fs::write(
        tmp.path().join("s.json"),
        r#"{
  "system": {"builtin": {"id": "spr_network", "params": {"gamma": 1.0, "k1": 2.0, "k2": 2.0}}},
  "controller": {"type": "antithetic", "k": 1.0, "eta": 1.0, "mu": 1.0}
}"#,
    )
    .unwrap();
    let out = posic(&["bounds", "--scenario", "s.json", "--out", "run"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_scenarios_exit_4() {
    let tmp = tempfile::tempdir().unwrap();
    // malformed JSON
    fs::write(tmp.path().join("bad.json"), "{ not json").unwrap();
    let out = posic(&["bounds", "--scenario", "bad.json"], tmp.path());
    assert_eq!(out.status.code(), Some(4));

    // unknown builtin
    fs::write(
        tmp.path().join("unknown.json"),
        r#"{"system": {"builtin": {"id": "nope"}},
            "controller": {"type": "antithetic", "k": 1.0, "eta": 1.0, "mu": 1.0}}"#,
    )
    .unwrap();
    let out = posic(&["bounds", "--scenario", "unknown.json"], tmp.path());
    assert_eq!(out.status.code(), Some(4));

    // both sources
    fs::write(
        tmp.path().join("both.json"),
        r#"{"system": {"builtin": {"id": "example1"},
                       "inline": {"a": [[-1.0]], "b": [1.0], "c": [1.0]}},
            "controller": {"type": "antithetic", "k": 1.0, "eta": 1.0, "mu": 1.0}}"#,
    )
    .unwrap();
    let out = posic(&["bounds", "--scenario", "both.json"], tmp.path());
    assert_eq!(out.status.code(), Some(4));

    // preset and scenario together
    let out = posic(
        &["bounds", "--scenario", "both.json", "--preset", "fig_genexp"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn trajectory_header_and_precision() {
    let tmp = tempfile::tempdir().unwrap();
    let out = posic(
        &["simulate", "--preset", "fig_genexp", "--out", "run"],
        tmp.path(),
    );
    assert!(out.status.success());
    let text = fs::read_to_string(tmp.path().join("run/trajectory.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t,x1,x2,z1,z2,u,y");
    // 12 significant digits in scientific notation
    let first = lines.next().unwrap();
    let field = first.split(',').nth(1).unwrap();
    assert!(
        field.contains('e') && field.splitn(2, 'e').next().unwrap().len() >= 13,
        "field '{field}' is not 12-significant-digit scientific notation"
    );
}

#[test]
fn empty_sweep_grid_emits_header_only() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("s.json"),
        r#"{
  "system": {"builtin": {"id": "gene_expression"}},
  "controller": {"type": "antithetic", "k": 1.0, "eta": 1.0, "mu": 1.0},
  "sweep": {"k_grid": {"start": 0.1, "stop": 1.0, "points": 0},
            "eta_grid": {"start": 0.1, "stop": 1.0, "points": 0}}
}"#,
    )
    .unwrap();
    let out = posic(&["sweep", "--scenario", "s.json", "--out", "run"], tmp.path());
    assert!(out.status.success());
    let text = fs::read_to_string(tmp.path().join("run/sweep.csv")).unwrap();
    assert_eq!(text, "k,eta,max_real_part,classification\n");
}

#[test]
fn disturbance_scenario_simulates() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("s.json"),
        r#"{
  "system": {"inline": {"a": [[-1.0, 0.0], [1.0, -1.0]], "b": [1.0, 0.0], "c": [0.0, 1.0],
                        "e": [1.0, 0.0]}},
  "controller": {"type": "antithetic", "k": 0.3333333333333333, "keta": 10.0, "mu": 1.0},
  "simulation": {
    "t_end": 100.0,
    "initial_state": [0.0, 0.0, 0.0, 0.0],
    "disturbance": {"channel": "plant_input", "magnitude": 0.0, "schedule": [[25.0, 0.5]]}
  }
}"#,
    )
    .unwrap();
    let out = posic(&["simulate", "--scenario", "s.json", "--out", "run"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("run/metrics.json")).unwrap())
            .unwrap();
    assert!(doc["steady_state_error"].as_f64().unwrap() < 1e-3);
    assert_eq!(doc["negativity_events"], 0);
}

#[test]
fn logistic_and_regularized_controllers_simulate() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("logistic.json"),
        r#"{
  "system": {"builtin": {"id": "gene_expression"}},
  "controller": {"type": "logistic", "k": 1.0, "alpha": 0.8, "beta": 2.0, "mu": 1.0},
  "simulation": {"t_end": 40.0, "initial_state": [0.0, 0.0, 0.01]}
}"#,
    )
    .unwrap();
    let out = posic(
        &["simulate", "--scenario", "logistic.json", "--out", "a"],
        tmp.path(),
    );
    assert!(out.status.success());

    fs::write(
        tmp.path().join("hyperbolic.json"),
        r#"{
  "system": {"builtin": {"id": "gene_expression"}},
  "controller": {"type": "regularized", "regularizer": "hyperbolic",
                 "k": 1.0, "alpha": 0.8, "beta": 3.0, "mu": 1.0},
  "simulation": {"t_end": 40.0, "initial_state": [0.0, 0.0, 0.1]}
}"#,
    )
    .unwrap();
    let out = posic(
        &["simulate", "--scenario", "hyperbolic.json", "--out", "b"],
        tmp.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("b/metrics.json")).unwrap())
            .unwrap();
    assert!(doc["steady_state_error"].as_f64().unwrap() < 1e-2);
}
