//! Subcommand implementations: positivity/assumption checks, stability
//! bounds, simulation, root loci and bifurcation sweeps, each emitting
//! deterministic JSON/CSV artifacts into the output directory.
//!
//! CSV formats:
//! * `trajectory.csv`: `t,x1..xn,z1[,z2],u,y`, 12 significant digits;
//! * `locus.csv`: `parameter,branch,re,im`;
//! * `sweep.csv`: `k,eta,max_real_part,classification`.

use std::fs;
use std::path::Path;

use serde_json::{json, Value};

use posic_core::analysis::{
    bifurcation_sweep, root_locus, root_locus_gain_sweep, stability_bounds, Classification,
};
use posic_core::controllers::ControllerVariant;
use posic_core::sim::{self, compare_to_standard_integral, integrate, Trajectory};
use posic_core::sysmodel::{steady_state_map, LtiSystem, Monotonicity};
use posic_core::Error as CoreError;

use crate::scenario::{build_closed_loop, build_sim_config, LoadedScenario, LoadedSystem};

pub enum CmdError {
    Core(CoreError),
    Scenario(String),
    Io(String),
}

impl From<CoreError> for CmdError {
    fn from(e: CoreError) -> Self {
        CmdError::Core(e)
    }
}

impl From<std::io::Error> for CmdError {
    fn from(e: std::io::Error) -> Self {
        CmdError::Io(e.to_string())
    }
}

impl CmdError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CmdError::Scenario(_) | CmdError::Io(_) => 4,
            CmdError::Core(e) => match e {
                CoreError::AssumptionViolated(_)
                | CoreError::SingularA
                | CoreError::ZeroDcGain
                | CoreError::InadmissibleDisturbance
                | CoreError::EquilibriumOutOfRange(_)
                | CoreError::NonMonotone => 2,
                CoreError::EigenFailure
                | CoreError::NewtonDiverged
                | CoreError::NonFiniteJacobian
                | CoreError::StepSizeUnderflow(_)
                | CoreError::NonFiniteState(_)
                | CoreError::BracketFailure => 3,
                _ => 4,
            },
        }
    }

    pub fn message(&self) -> String {
        match self {
            CmdError::Core(e) => e.to_string(),
            CmdError::Scenario(m) => format!("bad scenario: {m}"),
            CmdError::Io(m) => format!("i/o error: {m}"),
        }
    }
}

fn fmt12(v: f64) -> String {
    format!("{v:.11e}")
}

/// JSON value for a float, mapping infinities to "inf"/"-inf" strings.
fn num(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else if v > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

fn write_out(dir: &Path, name: &str, content: &str) -> Result<(), CmdError> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), content)?;
    Ok(())
}

fn write_json(dir: &Path, name: &str, value: &Value) -> Result<(), CmdError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    write_out(dir, name, &text)
}

/// The linearization used by bounds/check for nonlinear plants: evaluated
/// at the equilibrium associated with the controller set-point, with the
/// output row negated for decreasing steady-state maps (so the crossing
/// machinery sees a positive-gain system).
fn effective_linear(
    loaded: &LoadedScenario,
) -> Result<(LtiSystem<f64>, Option<Monotonicity>), CmdError> {
    match &loaded.system {
        LoadedSystem::Linear(sys) => Ok((sys.clone(), None)),
        LoadedSystem::Nonlinear { system, ss_config } => {
            let map = steady_state_map(system, ss_config.u_range, &ss_config.seed)?;
            let u_star = map.invert(loaded.controller.mu)?;
            let x_star = map.state(u_star)?;
            let lin = system.linearize(&x_star, u_star)?;
            let direction = map.direction();
            let effective = match direction {
                Monotonicity::Increasing => lin,
                Monotonicity::Decreasing => {
                    LtiSystem::new(lin.a().clone(), lin.b().clone(), -lin.c().clone())?
                }
            };
            Ok((effective, Some(direction)))
        }
    }
}

/// Positivity and stability-assumption report. Exit code 0 iff all checks
/// pass.
pub fn cmd_check(loaded: &LoadedScenario, out_dir: &Path) -> Result<u8, CmdError> {
    let (positive, report, kind) = match &loaded.system {
        LoadedSystem::Linear(sys) => (
            sys.is_internally_positive(),
            sys.check_assumption1()?,
            "linear",
        ),
        LoadedSystem::Nonlinear { system, .. } => {
            let (lin, _) = effective_linear(loaded)?;
            (
                system.is_internally_positive(),
                lin.check_assumption1()?,
                "nonlinear",
            )
        }
    };
    let gain_ok = matches!(report.dc_gain, Some(g) if g != 0.0);
    let pass = positive && report.hurwitz && gain_ok;

    let mut violations: Vec<&str> = Vec::new();
    if !positive {
        violations.push("system is not internally positive");
    }
    if !report.hurwitz {
        violations.push("state matrix is not Hurwitz stable");
    }
    if !gain_ok {
        violations.push("DC gain is zero or undefined");
    }

    let doc = json!({
        "schema_version": 1,
        "system_kind": kind,
        "internally_positive": positive,
        "hurwitz": report.hurwitz,
        "dc_gain": report.dc_gain.map(num),
        "stability_assumption_ok": pass,
        "violations": violations,
        "notes": loaded.notes,
    });
    write_json(out_dir, "check.json", &doc)?;

    println!("internally positive: {positive}");
    println!("state matrix Hurwitz: {}", report.hurwitz);
    match report.dc_gain {
        Some(g) => println!("dc gain: {g}"),
        None => println!("dc gain: undefined (singular A)"),
    }
    for note in &loaded.notes {
        println!("note: {note}");
    }
    for v in &violations {
        println!("violation: {v}");
    }
    println!("check: {}", if pass { "pass" } else { "fail" });
    Ok(if pass { 0 } else { 2 })
}

/// Stability-bounds report (JSON).
pub fn cmd_bounds(loaded: &LoadedScenario, out_dir: &Path) -> Result<u8, CmdError> {
    let (sys, direction) = effective_linear(loaded)?;
    let mu = loaded.controller.mu;
    let mu_bar = loaded.scenario.analysis.mu_bar.unwrap_or(mu);
    let beta = loaded.scenario.analysis.beta.unwrap_or(match loaded.controller.variant {
        ControllerVariant::Logistic { beta, .. } => beta,
        _ => 1.0,
    });
    let bounds = stability_bounds(&sys, mu, mu_bar, beta)?;
    let doc = json!({
        "schema_version": 1,
        "mu": mu,
        "mu_bar": mu_bar,
        "beta": beta,
        "dc_gain": num(bounds.dc_gain),
        "k_bar_inf": num(bounds.k_bar_inf),
        "eta_bar_inf": num(bounds.eta_bar_inf),
        "alpha_bar_inf": num(bounds.alpha_bar_inf),
        "xi_bar_inf": num(bounds.xi_bar_inf),
        "crossing_frequencies": bounds.crossing_frequencies,
        "spr": bounds.spr,
        "gain_sign": match direction {
            None | Some(Monotonicity::Increasing) => "positive",
            Some(Monotonicity::Decreasing) => "negative",
        },
    });
    write_json(out_dir, "bounds.json", &doc)?;
    println!(
        "k_bar_inf = {}, eta_bar_inf = {}, alpha_bar_inf = {}, xi_bar_inf = {}, spr = {}",
        bounds.k_bar_inf, bounds.eta_bar_inf, bounds.alpha_bar_inf, bounds.xi_bar_inf, bounds.spr
    );
    Ok(0)
}

fn trajectory_csv(traj: &Trajectory<f64>, plant_dim: usize, ctrl_dim: usize) -> String {
    let mut header = String::from("t");
    for i in 1..=plant_dim {
        header.push_str(&format!(",x{i}"));
    }
    for i in 1..=ctrl_dim {
        header.push_str(&format!(",z{i}"));
    }
    header.push_str(",u,y\n");
    let mut out = header;
    for (i, &t) in traj.times.iter().enumerate() {
        out.push_str(&fmt12(t));
        for v in traj.states[i].iter() {
            out.push(',');
            out.push_str(&fmt12(*v));
        }
        out.push(',');
        out.push_str(&fmt12(traj.inputs[i]));
        out.push(',');
        out.push_str(&fmt12(traj.outputs[i]));
        out.push('\n');
    }
    out
}

/// Simulation run: trajectory CSV plus step-response metrics JSON.
pub fn cmd_simulate(loaded: &LoadedScenario, out_dir: &Path) -> Result<u8, CmdError> {
    let sim_cfg = loaded
        .scenario
        .simulation
        .as_ref()
        .ok_or_else(|| CmdError::Scenario("'simulation' block is required".into()))?;
    let cl = build_closed_loop(loaded)?;
    let cfg = build_sim_config(sim_cfg, cl.state_dim()).map_err(|e| CmdError::Scenario(e.0))?;
    let traj = integrate(&cl, &cfg)?;

    // metrics against the reference in force at the end of the run
    let mu_final = cfg
        .reference_schedule
        .iter()
        .filter(|(t, _)| *t <= cfg.t_end)
        .next_back()
        .map(|&(_, mu)| mu)
        .unwrap_or(loaded.controller.mu);
    let metrics = sim::tracking_metrics(&traj, mu_final)?;

    write_out(
        out_dir,
        "trajectory.csv",
        &trajectory_csv(&traj, cl.plant_dim(), cl.controller_dim()),
    )?;

    let mut doc = json!({
        "schema_version": 1,
        "reference": mu_final,
        "settling_time_2pct": metrics.settling_time_2pct.map(num),
        "overshoot": num(metrics.overshoot),
        "steady_state_error": num(metrics.steady_state_error),
        "settled": metrics.settling_time_2pct.is_some(),
        "final_output": num(traj.final_output()),
        "steps": traj.times.len(),
        "negativity_events": traj.negativity_events.len(),
    });

    if sim_cfg.compare_standard_integral {
        let LoadedSystem::Linear(sys) = &loaded.system else {
            return Err(CmdError::Scenario(
                "compare_standard_integral requires a linear plant".into(),
            ));
        };
        let ControllerVariant::Antithetic { k, eta } = loaded.controller.variant else {
            return Err(CmdError::Scenario(
                "compare_standard_integral requires the antithetic controller".into(),
            ));
        };
        let mut plant_cfg = cfg.clone();
        plant_cfg.initial_state =
            posic_core::nalgebra::DVector::from_iterator(sys.n(), cfg.initial_state.iter().take(sys.n()).copied());
        let result =
            compare_to_standard_integral(sys, k, k * eta, loaded.controller.mu, &plant_cfg)?;
        write_out(
            out_dir,
            "trajectory_standard.csv",
            &trajectory_csv(&result.standard, sys.n(), 1),
        )?;
        doc["max_output_gap"] = num(result.max_output_gap);
    }

    write_json(out_dir, "metrics.json", &doc)?;
    println!(
        "simulated {} steps, final output {:.6}, steady-state error {:.3e}",
        traj.times.len(),
        traj.final_output(),
        metrics.steady_state_error
    );
    Ok(0)
}

/// Root locus CSV plus a summary JSON with the asymptote centroid.
pub fn cmd_locus(loaded: &LoadedScenario, out_dir: &Path) -> Result<u8, CmdError> {
    let locus_cfg = loaded
        .scenario
        .locus
        .as_ref()
        .ok_or_else(|| CmdError::Scenario("'locus' block is required".into()))?;
    let LoadedSystem::Linear(sys) = &loaded.system else {
        return Err(CmdError::Scenario(
            "root loci are computed on linear plants".into(),
        ));
    };
    let grid = locus_cfg.grid.values().map_err(|e| CmdError::Scenario(e.0))?;
    let mu = loaded.controller.mu;
    let sweep_parameter = locus_cfg.sweep_parameter.as_deref().unwrap_or("eta");
    let (data, fixed_name, fixed_value) = match sweep_parameter {
        "eta" => {
            let k = locus_cfg.k.unwrap_or(loaded.controller.variant.gain());
            (root_locus(sys, k, &grid, mu)?, "k", k)
        }
        "k" => {
            let eta = locus_cfg.eta.ok_or_else(|| {
                CmdError::Scenario("gain sweep requires a fixed 'eta'".into())
            })?;
            (root_locus_gain_sweep(sys, eta, &grid, mu)?, "eta", eta)
        }
        other => {
            return Err(CmdError::Scenario(format!(
                "unknown sweep_parameter '{other}'"
            )))
        }
    };

    let mut csv = String::from("parameter,branch,re,im\n");
    for (gi, roots) in data.branches.iter().enumerate() {
        for (bi, z) in roots.iter().enumerate() {
            csv.push_str(&format!(
                "{},{},{},{}\n",
                fmt12(data.parameter_grid[gi]),
                bi,
                fmt12(z.re),
                fmt12(z.im)
            ));
        }
    }
    write_out(out_dir, "locus.csv", &csv)?;
    let doc = json!({
        "schema_version": 1,
        "sweep_parameter": sweep_parameter,
        fixed_name: fixed_value,
        "mu": mu,
        "points": data.parameter_grid.len(),
        "asymptote_centroid": num(data.asymptote_centroid),
        "max_real_part": num(data.max_real_part()),
    });
    write_json(out_dir, "locus_summary.json", &doc)?;
    println!(
        "locus over {} points: centroid {}, max Re {}",
        data.parameter_grid.len(),
        data.asymptote_centroid,
        data.max_real_part()
    );
    Ok(0)
}

/// Bifurcation sweep CSV over the `(k, eta)` grid.
pub fn cmd_sweep(loaded: &LoadedScenario, out_dir: &Path) -> Result<u8, CmdError> {
    let sweep_cfg = loaded
        .scenario
        .sweep
        .as_ref()
        .ok_or_else(|| CmdError::Scenario("'sweep' block is required".into()))?;
    let LoadedSystem::Linear(sys) = &loaded.system else {
        return Err(CmdError::Scenario(
            "bifurcation sweeps run on linear plants".into(),
        ));
    };
    let k_grid = sweep_cfg.k_grid.values().map_err(|e| CmdError::Scenario(e.0))?;
    let eta_grid = sweep_cfg
        .eta_grid
        .values()
        .map_err(|e| CmdError::Scenario(e.0))?;

    let mut csv = String::from("k,eta,max_real_part,classification\n");
    let mut boundary = Vec::new();
    if !k_grid.is_empty() && !eta_grid.is_empty() {
        let grid = bifurcation_sweep(sys, &k_grid, &eta_grid, loaded.controller.mu)?;
        for (i, k) in grid.k_grid.iter().enumerate() {
            for (j, eta) in grid.eta_grid.iter().enumerate() {
                let v = &grid.verdicts[i][j];
                let label = match v.classification {
                    Classification::Stable => "stable",
                    Classification::Marginal => "marginal",
                    Classification::Unstable => "unstable",
                };
                csv.push_str(&format!(
                    "{},{},{},{label}\n",
                    fmt12(*k),
                    fmt12(*eta),
                    fmt12(v.max_real_part)
                ));
            }
        }
        boundary = grid
            .boundary_eta()
            .iter()
            .zip(grid.k_grid.iter())
            .map(|(b, k)| json!({"k": k, "eta_boundary": b.map(num)}))
            .collect();
    }
    write_out(out_dir, "sweep.csv", &csv)?;
    let doc = json!({
        "schema_version": 1,
        "mu": loaded.controller.mu,
        "k_points": k_grid.len(),
        "eta_points": eta_grid.len(),
        "boundary": boundary,
    });
    write_json(out_dir, "sweep_summary.json", &doc)?;
    println!("swept {} x {} cells", k_grid.len(), eta_grid.len());
    Ok(0)
}

