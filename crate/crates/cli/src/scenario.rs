//! Scenario file schema and conversion into core objects.
//!
//! A scenario is a single JSON document with exactly one system source
//! (a built-in id with parameter overrides, or inline matrices in
//! row-major nested arrays), a controller block, and optional analysis,
//! simulation, locus and sweep blocks.

use std::collections::BTreeMap;

use posic_core::nalgebra::{DMatrix, DVector, RowDVector};
use serde::Deserialize;

use posic_core::builtins;
use posic_core::controllers::{
    ActuationSign, ClosedLoop, ControllerSpec, Disturbance, DisturbanceChannel, Regularizer,
    SteadyStateConfig,
};
use posic_core::sim::{Method, SimConfig};
use posic_core::sysmodel::{LtiSystem, NonlinearSystem};

#[derive(Debug)]
pub struct ScenarioError(pub String);

impl std::fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "bad scenario: {}", self.0)
    }
}

impl std::error::Error for ScenarioError {}

fn bad<T>(msg: impl Into<String>) -> Result<T, ScenarioError> {
    Err(ScenarioError(msg.into()))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    pub system: SystemSource,
    pub controller: ControllerConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub simulation: Option<SimulationConfig>,
    #[serde(default)]
    pub locus: Option<LocusConfig>,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub output_dir: Option<String>,
}

fn default_schema_version() -> u32 {
    1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSource {
    #[serde(default)]
    pub builtin: Option<BuiltinConfig>,
    #[serde(default)]
    pub inline: Option<InlineSystem>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuiltinConfig {
    pub id: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    /// Override of the steady-state input range (nonlinear built-ins).
    #[serde(default)]
    pub u_range: Option<(f64, f64)>,
    /// Override of the Newton seed (nonlinear built-ins).
    #[serde(default)]
    pub seed: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineSystem {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    #[serde(default)]
    pub e: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerConfig {
    #[serde(rename = "type")]
    pub kind: String,
    pub mu: f64,
    pub k: f64,
    #[serde(default)]
    pub eta: Option<f64>,
    /// Alternative to `eta`: the raw annihilation rate `k * eta`.
    #[serde(default)]
    pub keta: Option<f64>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub theta: Option<f64>,
    /// Regularizer kind for `type = "regularized"`.
    #[serde(default)]
    pub regularizer: Option<String>,
    #[serde(default)]
    pub actuation_sign: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Set-point ceiling for `eta_bar_inf` (defaults to the controller mu).
    #[serde(default)]
    pub mu_bar: Option<f64>,
    /// Saturation bound for `xi_bar_inf` (defaults to the controller beta,
    /// else 1).
    #[serde(default)]
    pub beta: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub t_end: f64,
    pub initial_state: Vec<f64>,
    #[serde(default)]
    pub method: Option<String>,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub rel_tol: Option<f64>,
    #[serde(default)]
    pub abs_tol: Option<f64>,
    #[serde(default)]
    pub max_step: Option<f64>,
    #[serde(default)]
    pub sample_dt: Option<f64>,
    #[serde(default)]
    pub disturbance: Option<DisturbanceConfig>,
    #[serde(default)]
    pub reference_schedule: Vec<(f64, f64)>,
    /// Also run the standard integral loop with the same gain and report
    /// the largest output gap (linear plants, antithetic controller).
    #[serde(default)]
    pub compare_standard_integral: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisturbanceConfig {
    /// "plant_input" or "controller_state"
    pub channel: String,
    #[serde(default)]
    pub magnitude: f64,
    #[serde(default)]
    pub schedule: Vec<(f64, f64)>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default)]
    pub scale: Option<String>,
}

impl GridConfig {
    pub fn values(&self) -> Result<Vec<f64>, ScenarioError> {
        if self.points == 0 {
            return Ok(Vec::new());
        }
        if self.points == 1 {
            return Ok(vec![self.start]);
        }
        let log = match self.scale.as_deref() {
            None | Some("linear") => false,
            Some("log") => true,
            Some(other) => return bad(format!("unknown grid scale '{other}'")),
        };
        if log && (self.start <= 0.0 || self.stop <= 0.0) {
            return bad("log grids require positive endpoints");
        }
        let n = self.points;
        Ok((0..n)
            .map(|i| {
                let f = i as f64 / (n - 1) as f64;
                if log {
                    10f64.powf(self.start.log10() + f * (self.stop.log10() - self.start.log10()))
                } else {
                    self.start + f * (self.stop - self.start)
                }
            })
            .collect())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocusConfig {
    /// Swept parameter: "eta" (default) or "k".
    #[serde(default)]
    pub sweep_parameter: Option<String>,
    /// Fixed gain for the eta sweep.
    #[serde(default)]
    pub k: Option<f64>,
    /// Fixed coupling for the k sweep.
    #[serde(default)]
    pub eta: Option<f64>,
    pub grid: GridConfig,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub k_grid: GridConfig,
    pub eta_grid: GridConfig,
}

/// A plant loaded from a scenario, together with the steady-state solver
/// configuration for nonlinear ones and any informational notes.
pub enum LoadedSystem {
    Linear(LtiSystem<f64>),
    Nonlinear {
        system: NonlinearSystem<f64>,
        ss_config: SteadyStateConfig<f64>,
    },
}

pub struct LoadedScenario {
    pub scenario: Scenario,
    pub system: LoadedSystem,
    pub controller: ControllerSpec<f64>,
    pub notes: Vec<String>,
}

pub fn parse(text: &str) -> Result<LoadedScenario, ScenarioError> {
    let scenario: Scenario =
        serde_json::from_str(text).map_err(|e| ScenarioError(e.to_string()))?;
    if scenario.schema_version != 1 {
        return bad(format!(
            "unsupported schema_version {}",
            scenario.schema_version
        ));
    }
    let mut notes = Vec::new();
    let system = load_system(&scenario.system, &mut notes)?;
    let controller = build_controller(&scenario.controller)?;
    Ok(LoadedScenario {
        system,
        controller,
        notes,
        scenario,
    })
}

fn param(
    map: &BTreeMap<String, f64>,
    key: &str,
    default: f64,
) -> f64 {
    map.get(key).copied().unwrap_or(default)
}

fn check_param_keys(
    map: &BTreeMap<String, f64>,
    allowed: &[&str],
    id: &str,
) -> Result<(), ScenarioError> {
    for key in map.keys() {
        if !allowed.contains(&key.as_str()) {
            return bad(format!(
                "unknown parameter '{key}' for builtin '{id}' (allowed: {allowed:?})"
            ));
        }
    }
    Ok(())
}

fn load_system(
    source: &SystemSource,
    notes: &mut Vec<String>,
) -> Result<LoadedSystem, ScenarioError> {
    match (&source.builtin, &source.inline) {
        (Some(_), Some(_)) => bad("exactly one of 'builtin' and 'inline' must be given"),
        (None, None) => bad("a system source ('builtin' or 'inline') is required"),
        (None, Some(inline)) => {
            let n = inline.a.len();
            if n == 0 || inline.a.iter().any(|row| row.len() != n) {
                return bad("inline 'a' must be a nonempty square row-major matrix");
            }
            if inline.b.len() != n || inline.c.len() != n {
                return bad("inline 'b' and 'c' must match the dimension of 'a'");
            }
            let a = DMatrix::from_fn(n, n, |i, j| inline.a[i][j]);
            let mut sys = LtiSystem::new(
                a,
                DVector::from_vec(inline.b.clone()),
                RowDVector::from_vec(inline.c.clone()),
            )
            .map_err(|e| ScenarioError(e.to_string()))?;
            if let Some(e) = &inline.e {
                if e.len() != n {
                    return bad("inline 'e' must match the dimension of 'a'");
                }
                sys = sys
                    .with_disturbance(DVector::from_vec(e.clone()))
                    .map_err(|err| ScenarioError(err.to_string()))?;
            }
            Ok(LoadedSystem::Linear(sys))
        }
        (Some(cfg), None) => load_builtin(cfg, notes),
    }
}

fn load_builtin(
    cfg: &BuiltinConfig,
    notes: &mut Vec<String>,
) -> Result<LoadedSystem, ScenarioError> {
    let p = &cfg.params;
    match cfg.id.as_str() {
        "example1" => {
            check_param_keys(p, &[], "example1")?;
            notes.push(builtins::EXAMPLE1_NOTE.to_string());
            Ok(LoadedSystem::Linear(builtins::Example1.lti()))
        }
        "gene_expression" => {
            check_param_keys(p, &["gamma1", "gamma2", "k2"], "gene_expression")?;
            Ok(LoadedSystem::Linear(
                builtins::GeneExpression {
                    gamma1: param(p, "gamma1", 1.0),
                    gamma2: param(p, "gamma2", 1.0),
                    k2: param(p, "k2", 1.0),
                }
                .lti(),
            ))
        }
        "maturation" => {
            check_param_keys(
                p,
                &["k1", "k2", "k3", "gamma1", "gamma2", "gamma3"],
                "maturation",
            )?;
            Ok(LoadedSystem::Linear(
                builtins::Maturation {
                    k1: param(p, "k1", 1.0),
                    k2: param(p, "k2", 1.0),
                    k3: param(p, "k3", 1.0),
                    gamma1: param(p, "gamma1", 1.0),
                    gamma2: param(p, "gamma2", 1.0),
                    gamma3: param(p, "gamma3", 1.0),
                }
                .lti(),
            ))
        }
        "spr_network" => {
            check_param_keys(p, &["gamma", "k1", "k2"], "spr_network")?;
            Ok(LoadedSystem::Linear(
                builtins::SprNetwork {
                    gamma: param(p, "gamma", 2.0),
                    k1: param(p, "k1", 1.0),
                    k2: param(p, "k2", 1.0),
                }
                .lti(),
            ))
        }
        "sis" => {
            check_param_keys(p, &["beta", "n_total"], "sis")?;
            let builtin = builtins::Sis {
                beta: param(p, "beta", 1.0),
                n_total: param(p, "n_total", 100.0),
            };
            Ok(LoadedSystem::Nonlinear {
                system: builtin.nonlinear(),
                ss_config: SteadyStateConfig {
                    u_range: cfg.u_range.unwrap_or_else(|| builtin.steady_state_u_range()),
                    seed: cfg
                        .seed
                        .clone()
                        .map(DVector::from_vec)
                        .unwrap_or_else(|| builtin.steady_state_seed()),
                },
            })
        }
        "repressed_translation" => {
            check_param_keys(p, &["k1", "k2", "gamma1", "gamma2"], "repressed_translation")?;
            let builtin = builtins::RepressedTranslation {
                k1: param(p, "k1", 1.0),
                k2: param(p, "k2", 1.0),
                gamma1: param(p, "gamma1", 1.0),
                gamma2: param(p, "gamma2", 1.0),
            };
            Ok(LoadedSystem::Nonlinear {
                system: builtin.nonlinear(),
                ss_config: SteadyStateConfig {
                    u_range: cfg.u_range.unwrap_or_else(|| builtin.steady_state_u_range()),
                    seed: cfg
                        .seed
                        .clone()
                        .map(DVector::from_vec)
                        .unwrap_or_else(|| builtin.steady_state_seed()),
                },
            })
        }
        other => bad(format!(
            "unknown builtin '{other}' (available: {:?})",
            builtins::BUILTIN_IDS
        )),
    }
}

fn build_controller(cfg: &ControllerConfig) -> Result<ControllerSpec<f64>, ScenarioError> {
    let need = |value: Option<f64>, name: &str| {
        value.ok_or_else(|| {
            ScenarioError(format!("controller '{}' requires '{name}'", cfg.kind))
        })
    };
    let spec = match cfg.kind.as_str() {
        "antithetic" => match (cfg.eta, cfg.keta) {
            (Some(_), Some(_)) => {
                return bad("give either 'eta' or 'keta' for the antithetic controller, not both")
            }
            (Some(eta), None) => ControllerSpec::antithetic(cfg.k, eta, cfg.mu),
            (None, Some(keta)) => {
                ControllerSpec::antithetic_from_annihilation_rate(cfg.k, keta, cfg.mu)
            }
            (None, None) => return bad("antithetic controller requires 'eta' or 'keta'"),
        },
        "exponential" => ControllerSpec::exponential(cfg.k, need(cfg.alpha, "alpha")?, cfg.mu),
        "logistic" => ControllerSpec::logistic(
            cfg.k,
            need(cfg.alpha, "alpha")?,
            need(cfg.beta, "beta")?,
            cfg.mu,
        ),
        "standard_integral" => ControllerSpec::standard_integral(cfg.k, cfg.mu),
        "regularized" => {
            let alpha = need(cfg.alpha, "alpha")?;
            let reg = match cfg.regularizer.as_deref() {
                Some("exponential") => Regularizer::Exponential { alpha },
                Some("logistic") => Regularizer::Logistic {
                    alpha,
                    beta: need(cfg.beta, "beta")?,
                },
                Some("generalized_logistic") => Regularizer::GeneralizedLogistic {
                    alpha,
                    beta: need(cfg.beta, "beta")?,
                    theta: need(cfg.theta, "theta")?,
                },
                Some("hyperbolic") => Regularizer::Hyperbolic {
                    alpha,
                    beta: need(cfg.beta, "beta")?,
                },
                Some("arctangent") => Regularizer::Arctangent {
                    alpha,
                    beta: need(cfg.beta, "beta")?,
                },
                Some("algebraic") => Regularizer::Algebraic {
                    alpha,
                    beta: need(cfg.beta, "beta")?,
                },
                Some(other) => return bad(format!("unknown regularizer '{other}'")),
                None => return bad("regularized controller requires 'regularizer'"),
            };
            ControllerSpec::regularized(cfg.k, reg, cfg.mu)
        }
        other => return bad(format!("unknown controller type '{other}'")),
    }
    .map_err(|e| ScenarioError(e.to_string()))?;

    let sign = match cfg.actuation_sign.as_deref() {
        None | Some("auto") => ActuationSign::Auto,
        Some("positive_gain") => ActuationSign::PositiveGain,
        Some("negative_gain") => ActuationSign::NegativeGain,
        Some(other) => return bad(format!("unknown actuation_sign '{other}'")),
    };
    Ok(spec.with_sign(sign))
}

/// Assemble the closed loop (with the scenario's structural disturbance)
/// for simulation.
pub fn build_closed_loop(loaded: &LoadedScenario) -> Result<ClosedLoop<f64>, posic_core::Error> {
    let mut cl = match &loaded.system {
        LoadedSystem::Linear(sys) => ClosedLoop::linear(sys.clone(), loaded.controller)?,
        LoadedSystem::Nonlinear { system, ss_config } => {
            ClosedLoop::nonlinear(system.clone(), loaded.controller, ss_config.clone())?
        }
    };
    if let Some(sim) = &loaded.scenario.simulation {
        if let Some(dist) = &sim.disturbance {
            let channel = match dist.channel.as_str() {
                "plant_input" => DisturbanceChannel::PlantInput,
                "controller_state" => DisturbanceChannel::ControllerState,
                other => {
                    return Err(posic_core::Error::InvalidParameter(format!(
                        "unknown disturbance channel '{other}'"
                    )))
                }
            };
            cl = cl.with_disturbance(Disturbance {
                channel,
                magnitude: dist.magnitude,
            })?;
        }
    }
    Ok(cl)
}

/// Build the core simulation configuration from the scenario block.
pub fn build_sim_config(
    sim: &SimulationConfig,
    state_dim: usize,
) -> Result<SimConfig<f64>, ScenarioError> {
    if sim.initial_state.len() != state_dim {
        return bad(format!(
            "initial_state has {} entries, the closed loop has {state_dim} states",
            sim.initial_state.len()
        ));
    }
    let mut cfg = SimConfig::new(sim.t_end, DVector::from_vec(sim.initial_state.clone()));
    cfg.method = match sim.method.as_deref() {
        None | Some("rk45") => Method::Rk45,
        Some("rk4") => Method::Rk4Fixed {
            dt: sim.dt.ok_or_else(|| {
                ScenarioError("method 'rk4' requires 'dt'".into())
            })?,
        },
        Some(other) => return bad(format!("unknown method '{other}'")),
    };
    if let Some(rel) = sim.rel_tol {
        cfg.rel_tol = rel;
    }
    if let Some(abs) = sim.abs_tol {
        cfg.abs_tol = abs;
    }
    cfg.max_step = sim.max_step;
    cfg.sample_dt = sim.sample_dt;
    cfg.reference_schedule = sim.reference_schedule.clone();
    if let Some(dist) = &sim.disturbance {
        cfg.disturbance_schedule = dist.schedule.clone();
    }
    Ok(cfg)
}
