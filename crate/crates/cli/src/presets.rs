//! Built-in scenario presets. Every `fig_*` preset runs end-to-end with
//! the subcommand named in its table entry and emits non-empty artifacts.

/// `(name, subcommand, scenario JSON)`
pub const PRESETS: &[(&str, &str, &str)] = &[
    (
        "fig_genexp",
        "simulate",
        r#"{
  "system": {"builtin": {"id": "gene_expression"}},
  "controller": {"type": "antithetic", "k": 0.3333333333333333, "keta": 10.0, "mu": 1.0},
  "simulation": {"t_end": 50.0, "initial_state": [0.0, 0.0, 0.0, 0.0]}
}"#,
    ),
    (
        "fig_genexpeta",
        "simulate",
        r#"{
  "system": {"builtin": {"id": "gene_expression"}},
  "controller": {"type": "antithetic", "k": 0.3333333333333333, "keta": 100.0, "mu": 1.0},
  "simulation": {"t_end": 50.0, "initial_state": [0.0, 0.0, 0.0, 0.0]}
}"#,
    ),
    (
        "fig_stdint",
        "simulate",
        r#"{
  "system": {"builtin": {"id": "gene_expression"}},
  "controller": {"type": "antithetic", "k": 0.3333333333333333, "keta": 1000.0, "mu": 1.0},
  "simulation": {
    "t_end": 50.0,
    "initial_state": [0.0, 0.0, 0.0, 0.0],
    "sample_dt": 0.05,
    "compare_standard_integral": true
  }
}"#,
    ),
    (
        "fig_sis",
        "simulate",
        r#"{
  "system": {"builtin": {"id": "sis", "params": {"beta": 1.0, "n_total": 100.0}}},
  "controller": {"type": "antithetic", "k": 2.0, "keta": 13.0, "mu": 99.0},
  "simulation": {"t_end": 50.0, "initial_state": [90.0, 0.0, 0.0]}
}"#,
    ),
    (
        "fig_bif",
        "sweep",
        r#"{
  "system": {"builtin": {"id": "gene_expression"}},
  "controller": {"type": "antithetic", "k": 1.0, "eta": 1.0, "mu": 1.0},
  "sweep": {
    "k_grid": {"start": 0.1, "stop": 3.0, "points": 30},
    "eta_grid": {"start": 0.01, "stop": 1000.0, "points": 30, "scale": "log"}
  }
}"#,
    ),
    (
        "fig_rl1",
        "locus",
        r#"{
  "system": {"builtin": {"id": "gene_expression"}},
  "controller": {"type": "antithetic", "k": 1.0, "eta": 1.0, "mu": 1.0},
  "locus": {"k": 1.0, "grid": {"start": 0.01, "stop": 1000000.0, "points": 150, "scale": "log"}}
}"#,
    ),
    (
        "fig_rl2",
        "locus",
        r#"{
  "system": {"builtin": {"id": "gene_expression"}},
  "controller": {"type": "antithetic", "k": 2.5, "eta": 1.0, "mu": 1.0},
  "locus": {"k": 2.5, "grid": {"start": 0.01, "stop": 1000000.0, "points": 150, "scale": "log"}}
}"#,
    ),
];

pub fn find(name: &str) -> Option<&'static str> {
    PRESETS
        .iter()
        .find(|(n, _, _)| *n == name)
        .map(|(_, _, json)| *json)
}

pub fn names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _, _)| *n).collect()
}
