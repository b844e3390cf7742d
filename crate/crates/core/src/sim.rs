//! Time-domain integration of closed loops: a Dormand–Prince 5(4)
//! embedded pair with step-size control (default) and a fixed-step
//! classical RK4, piecewise-constant reference and disturbance schedules,
//! trajectory recording and step-response metrics.

use nalgebra::DVector;

use crate::controllers::ClosedLoop;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sysmodel::LtiSystem;

/// Integration method.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Method<T> {
    /// Classical fourth-order Runge–Kutta with a fixed step.
    Rk4Fixed { dt: T },
    /// Dormand–Prince 5(4) embedded pair with adaptive steps.
    Rk45,
}

/// Simulation configuration. Schedules are piecewise constant, sorted by
/// time; integration restarts at each schedule event so discontinuities
/// fall on step boundaries.
#[derive(Clone, Debug)]
pub struct SimConfig<T: Scalar> {
    pub t_end: T,
    pub method: Method<T>,
    pub rel_tol: T,
    pub abs_tol: T,
    pub max_step: Option<T>,
    pub initial_state: DVector<T>,
    /// `(time, magnitude)` steps for the disturbance magnitude.
    pub disturbance_schedule: Vec<(T, T)>,
    /// `(time, mu)` steps for the reference.
    pub reference_schedule: Vec<(T, T)>,
    /// When set, steps land exactly on multiples of this interval.
    pub sample_dt: Option<T>,
}

impl<T: Scalar> SimConfig<T> {
    pub fn new(t_end: T, initial_state: DVector<T>) -> Self {
        Self {
            t_end,
            method: Method::Rk45,
            rel_tol: T::lit(1e-8),
            abs_tol: T::lit(1e-10),
            max_step: None,
            initial_state,
            disturbance_schedule: Vec::new(),
            reference_schedule: Vec::new(),
            sample_dt: None,
        }
    }

    pub fn with_method(mut self, method: Method<T>) -> Self {
        self.method = method;
        self
    }

    pub fn with_tolerances(mut self, rel_tol: T, abs_tol: T) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    fn validate(&self, state_dim: usize) -> Result<()> {
        if self.initial_state.len() != state_dim {
            return Err(Error::DimensionMismatch {
                expected: state_dim,
                got: self.initial_state.len(),
            });
        }
        if self.rel_tol <= T::zero() || self.abs_tol <= T::zero() {
            return Err(Error::InvalidParameter("tolerances must be positive".into()));
        }
        for sched in [&self.disturbance_schedule, &self.reference_schedule] {
            if sched.windows(2).any(|w| w[1].0 < w[0].0) {
                return Err(Error::InvalidParameter(
                    "schedules must be sorted by time".into(),
                ));
            }
        }
        Ok(())
    }
}

/// A state coordinate dipping below `-10 abs_tol` on a positive-flagged
/// plant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NegativityEvent<T> {
    pub time: T,
    pub index: usize,
    pub value: T,
}

/// Recorded trajectory: strictly increasing times, full states, output and
/// control input per point, plus the negativity event log.
#[derive(Clone, Debug)]
pub struct Trajectory<T: Scalar> {
    pub times: Vec<T>,
    pub states: Vec<DVector<T>>,
    pub outputs: Vec<T>,
    pub inputs: Vec<T>,
    pub negativity_events: Vec<NegativityEvent<T>>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn final_state(&self) -> &DVector<T> {
        self.states.last().expect("nonempty trajectory")
    }

    pub fn final_output(&self) -> T {
        *self.outputs.last().expect("nonempty trajectory")
    }

    /// Output at the recorded time nearest to `t`.
    pub fn output_at(&self, t: T) -> T {
        let mut best = 0;
        let mut dist = T::infinity();
        for (i, &ti) in self.times.iter().enumerate() {
            let d = (ti - t).abs();
            if d < dist {
                dist = d;
                best = i;
            }
        }
        self.outputs[best]
    }
}

// Dormand-Prince 5(4) tableau
const DP_C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 6] = [
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const DP_B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

struct Recorder<'a, T: Scalar> {
    traj: Trajectory<T>,
    check_negativity: bool,
    abs_tol: T,
    cl: &'a ClosedLoop<T>,
}

impl<'a, T: Scalar> Recorder<'a, T> {
    fn push(&mut self, t: T, state: &DVector<T>) {
        let n = self.cl.plant_dim();
        let ctrl: Vec<T> = state.iter().skip(n).copied().collect();
        self.traj.times.push(t);
        self.traj.outputs.push(match self.cl.plant() {
            crate::controllers::Plant::Lti(sys) => {
                sys.output(&DVector::from_iterator(n, state.iter().take(n).copied()))
            }
            crate::controllers::Plant::Nonlinear(sys) => {
                sys.h(&DVector::from_iterator(n, state.iter().take(n).copied()))
            }
        });
        self.traj.inputs.push(self.cl.control_input(&ctrl));
        if self.check_negativity {
            let floor = -T::lit(10.0) * self.abs_tol;
            for (i, &v) in state.iter().enumerate() {
                if v < floor {
                    self.traj.negativity_events.push(NegativityEvent {
                        time: t,
                        index: i,
                        value: v,
                    });
                }
            }
        }
        self.traj.states.push(state.clone());
    }
}

/// Piecewise-constant value of a schedule at time `t` (the last entry with
/// time `<= t`), falling back to `base`.
fn schedule_value<T: Scalar>(schedule: &[(T, T)], t: T, base: T) -> T {
    let mut value = base;
    for &(ti, vi) in schedule {
        if ti <= t {
            value = vi;
        } else {
            break;
        }
    }
    value
}

/// Integrate the closed loop under the given configuration.
///
/// Schedule events split the horizon into segments; each segment runs with
/// the reference and disturbance magnitude in force at its start. States
/// whose controller coordinate must stay inside an image interval (the
/// logistic family) are never clamped: a step that would exit the interval
/// is rejected and retried with half the step size.
pub fn integrate<T: Scalar>(cl: &ClosedLoop<T>, cfg: &SimConfig<T>) -> Result<Trajectory<T>> {
    cfg.validate(cl.state_dim())?;
    let base_mu = cl.controller().mu;
    let base_d = cl.disturbance().map(|d| d.magnitude).unwrap_or_else(T::zero);

    // segment boundaries: all schedule event times inside (0, t_end)
    let mut events: Vec<T> = cfg
        .disturbance_schedule
        .iter()
        .chain(cfg.reference_schedule.iter())
        .map(|&(t, _)| t)
        .filter(|&t| t > T::zero() && t < cfg.t_end)
        .collect();
    events.sort_by(|a, b| a.partial_cmp(b).unwrap());
    events.dedup();
    events.push(cfg.t_end);

    let mut recorder = Recorder {
        traj: Trajectory {
            times: Vec::new(),
            states: Vec::new(),
            outputs: Vec::new(),
            inputs: Vec::new(),
            negativity_events: Vec::new(),
        },
        check_negativity: cl.plant().is_internally_positive(),
        abs_tol: cfg.abs_tol,
        cl,
    };

    let mut t = T::zero();
    let mut state = cfg.initial_state.clone();
    recorder.push(t, &state);

    for &t_stop in &events {
        if t_stop <= t {
            continue;
        }
        let mu = schedule_value(&cfg.reference_schedule, t, base_mu);
        let d = schedule_value(&cfg.disturbance_schedule, t, base_d);
        let segment_cl = cl.clone().with_reference(mu).with_disturbance_magnitude(d);
        match cfg.method {
            Method::Rk45 => integrate_adaptive(
                &segment_cl,
                cfg,
                &mut t,
                &mut state,
                t_stop,
                &mut recorder,
            )?,
            Method::Rk4Fixed { dt } => integrate_fixed(
                &segment_cl,
                dt,
                &mut t,
                &mut state,
                t_stop,
                &mut recorder,
            )?,
        }
    }
    Ok(recorder.traj)
}

/// True when the candidate state violates the controller image interval.
fn violates_interval<T: Scalar>(cl: &ClosedLoop<T>, state: &DVector<T>) -> bool {
    match cl.controller_state_interval() {
        None => false,
        Some((lo, hi)) => {
            let v = state[cl.plant_dim()];
            v <= lo || v >= hi
        }
    }
}

fn rk_stages<T: Scalar>(
    cl: &ClosedLoop<T>,
    t: T,
    state: &DVector<T>,
    h: T,
) -> Result<Vec<DVector<T>>> {
    let mut ks: Vec<DVector<T>> = Vec::with_capacity(7);
    ks.push(cl.rhs(state, t)?);
    for stage in 0..6 {
        let mut y = state.clone();
        for (j, k) in ks.iter().enumerate() {
            let a = T::lit(DP_A[stage][j]);
            if a != T::zero() {
                y += k * (a * h);
            }
        }
        ks.push(cl.rhs(&y, t + T::lit(DP_C[stage + 1]) * h)?);
    }
    Ok(ks)
}

fn integrate_adaptive<T: Scalar>(
    cl: &ClosedLoop<T>,
    cfg: &SimConfig<T>,
    t: &mut T,
    state: &mut DVector<T>,
    t_stop: T,
    recorder: &mut Recorder<'_, T>,
) -> Result<()> {
    let dim = state.len();
    let span = t_stop - *t;
    let mut h = cfg.max_step.unwrap_or(span * T::lit(0.01)).minv(span);
    let h_floor = T::lit(1e-14) * (T::one() + t_stop.abs());

    while t_stop - *t > h_floor {
        // land exactly on the horizon, the sample grid and schedule events
        let mut h_eff = h.minv(t_stop - *t);
        if let Some(dt) = cfg.sample_dt {
            let next_mark = (((*t / dt).floor()) + T::one()) * dt;
            if next_mark > *t + h_floor {
                h_eff = h_eff.minv(next_mark - *t);
            }
        }
        if let Some(hm) = cfg.max_step {
            h_eff = h_eff.minv(hm);
        }
        if h_eff < h_floor {
            return Err(Error::StepSizeUnderflow(
                (*t).to_subset().unwrap_or(f64::NAN),
            ));
        }

        let ks = rk_stages(cl, *t, state, h_eff)?;
        let mut y5 = state.clone();
        let mut y4 = state.clone();
        for (j, k) in ks.iter().enumerate() {
            y5 += k * (T::lit(DP_B5[j]) * h_eff);
            y4 += k * (T::lit(DP_B4[j]) * h_eff);
        }

        let finite = y5.iter().all(|v| v.is_finite());
        let mut err = T::zero();
        if finite {
            for i in 0..dim {
                let scale = cfg.abs_tol + cfg.rel_tol * state[i].abs().maxv(y5[i].abs());
                let e = (y5[i] - y4[i]) / scale;
                err += e * e;
            }
            err = (err / T::lit(dim as f64)).sqrt();
        }

        let interval_ok = finite && !violates_interval(cl, &y5);
        if finite && interval_ok && err <= T::one() {
            *t += h_eff;
            *state = y5;
            recorder.push(*t, state);
            let grow = if err > T::zero() {
                (T::one() / err).powf(T::lit(0.2)) * T::lit(0.9)
            } else {
                T::lit(5.0)
            };
            h = h_eff * grow.minv(T::lit(5.0)).maxv(T::lit(0.2));
        } else if !finite {
            h = h_eff * T::lit(0.25);
        } else if !interval_ok {
            h = h_eff * T::lit(0.5);
        } else {
            let shrink = (T::one() / err).powf(T::lit(0.2)) * T::lit(0.9);
            h = h_eff * shrink.maxv(T::lit(0.1));
        }
        if h < h_floor {
            return Err(Error::StepSizeUnderflow(
                (*t).to_subset().unwrap_or(f64::NAN),
            ));
        }
        if state.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState((*t).to_subset().unwrap_or(f64::NAN)));
        }
    }
    *t = t_stop;
    Ok(())
}

fn rk4_step<T: Scalar>(
    cl: &ClosedLoop<T>,
    t: T,
    state: &DVector<T>,
    h: T,
) -> Result<DVector<T>> {
    let half = T::lit(0.5);
    let k1 = cl.rhs(state, t)?;
    let k2 = cl.rhs(&(state + &k1 * (h * half)), t + h * half)?;
    let k3 = cl.rhs(&(state + &k2 * (h * half)), t + h * half)?;
    let k4 = cl.rhs(&(state + &k3 * h), t + h)?;
    let sixth = T::lit(1.0 / 6.0);
    let third = T::lit(1.0 / 3.0);
    Ok(state + (k1 * sixth + k2 * third + k3 * third + k4 * sixth) * h)
}

fn integrate_fixed<T: Scalar>(
    cl: &ClosedLoop<T>,
    dt: T,
    t: &mut T,
    state: &mut DVector<T>,
    t_stop: T,
    recorder: &mut Recorder<'_, T>,
) -> Result<()> {
    if dt <= T::zero() {
        return Err(Error::InvalidParameter("dt must be positive".into()));
    }
    let h_floor = T::lit(1e-14) * (T::one() + t_stop.abs());
    while t_stop - *t > h_floor {
        let mut target = *t + dt;
        if t_stop - target < h_floor {
            target = t_stop;
        }
        // sub-steps shrink only to honor the image-interval guard
        let mut tt = *t;
        let mut s = state.clone();
        let mut h = target - tt;
        while tt < target {
            let h_eff = h.minv(target - tt);
            if h_eff < h_floor {
                return Err(Error::StepSizeUnderflow(tt.to_subset().unwrap_or(f64::NAN)));
            }
            let next = rk4_step(cl, tt, &s, h_eff)?;
            if next.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteState(tt.to_subset().unwrap_or(f64::NAN)));
            }
            if violates_interval(cl, &next) {
                h = h_eff * T::lit(0.5);
                continue;
            }
            tt += h_eff;
            s = next;
        }
        *t = target;
        *state = s;
        recorder.push(*t, state);
    }
    Ok(())
}

/// Largest output gap between the antithetic loop (annihilation rate
/// `k eta = keta`) and the standard integral loop with the same gain,
/// from matched initial conditions (given plant state, controller states
/// at zero), sampled on a shared uniform grid.
pub struct ComparisonResult<T: Scalar> {
    pub max_output_gap: T,
    pub antithetic: Trajectory<T>,
    pub standard: Trajectory<T>,
}

pub fn compare_to_standard_integral<T: Scalar>(
    sys: &LtiSystem<T>,
    k: T,
    keta: T,
    mu: T,
    cfg: &SimConfig<T>,
) -> Result<ComparisonResult<T>> {
    use crate::controllers::ControllerSpec;
    if cfg.initial_state.len() != sys.n() {
        return Err(Error::DimensionMismatch {
            expected: sys.n(),
            got: cfg.initial_state.len(),
        });
    }
    let sample_dt = cfg
        .sample_dt
        .unwrap_or_else(|| cfg.t_end / T::lit(2000.0));

    let mut plant_state: Vec<T> = cfg.initial_state.iter().copied().collect();
    let mut aic_state = plant_state.clone();
    aic_state.extend_from_slice(&[T::zero(), T::zero()]);
    plant_state.push(T::zero());

    let mut aic_cfg = cfg.clone();
    aic_cfg.initial_state = DVector::from_vec(aic_state);
    aic_cfg.sample_dt = Some(sample_dt);
    let aic = ClosedLoop::linear(
        sys.clone(),
        ControllerSpec::antithetic_from_annihilation_rate(k, keta, mu)?,
    )?;
    let aic_traj = integrate(&aic, &aic_cfg)?;

    let mut std_cfg = cfg.clone();
    std_cfg.initial_state = DVector::from_vec(plant_state);
    std_cfg.sample_dt = Some(sample_dt);
    let standard = ClosedLoop::linear(sys.clone(), ControllerSpec::standard_integral(k, mu)?)?;
    let std_traj = integrate(&standard, &std_cfg)?;

    // compare on the shared grid marks present in both trajectories
    let tol = sample_dt * T::lit(1e-6);
    let mut gap = T::zero();
    let mut j = 0;
    for (i, &ta) in aic_traj.times.iter().enumerate() {
        let mark = (ta / sample_dt).round() * sample_dt;
        if (ta - mark).abs() > tol {
            continue;
        }
        while j < std_traj.times.len() && std_traj.times[j] < ta - tol {
            j += 1;
        }
        if j < std_traj.times.len() && (std_traj.times[j] - ta).abs() <= tol {
            gap = gap.maxv((aic_traj.outputs[i] - std_traj.outputs[j]).abs());
        }
    }
    Ok(ComparisonResult {
        max_output_gap: gap,
        antithetic: aic_traj,
        standard: std_traj,
    })
}

/// Step-response metrics of a trajectory against the reference `mu`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrackingMetrics<T> {
    /// First time after which the output stays within the 2% band;
    /// `None` when the trajectory never settles.
    pub settling_time_2pct: Option<T>,
    /// Peak overshoot above the reference, relative to it.
    pub overshoot: T,
    /// `|y(t_end) - mu|`.
    pub steady_state_error: T,
}

pub fn tracking_metrics<T: Scalar>(traj: &Trajectory<T>, mu: T) -> Result<TrackingMetrics<T>> {
    if traj.times.is_empty() {
        return Err(Error::InvalidParameter("empty trajectory".into()));
    }
    let band = T::lit(0.02) * mu;
    let mut settle_idx = None;
    for (i, &y) in traj.outputs.iter().enumerate().rev() {
        if (y - mu).abs() <= band {
            settle_idx = Some(i);
        } else {
            break;
        }
    }
    // the band must hold through the end of the run
    let settling_time_2pct = match settle_idx {
        Some(0) => Some(traj.times[0]),
        Some(i) => Some(traj.times[i]),
        None => None,
    };
    let y_max = traj
        .outputs
        .iter()
        .fold(-T::infinity(), |acc, &y| acc.maxv(y));
    let overshoot = ((y_max - mu) / mu).maxv(T::zero());
    let steady_state_error = (traj.final_output() - mu).abs();
    Ok(TrackingMetrics {
        settling_time_2pct,
        overshoot,
        steady_state_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins;
    use crate::controllers::{ControllerSpec, SteadyStateConfig};
    use approx::assert_relative_eq;

    fn gene_expression_aic(k: f64, keta: f64, mu: f64) -> ClosedLoop<f64> {
        let sys = builtins::GeneExpression::<f64>::default().lti();
        ClosedLoop::linear(
            sys,
            ControllerSpec::antithetic_from_annihilation_rate(k, keta, mu).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn constant_at_equilibrium() {
        let cl = gene_expression_aic(1.0 / 3.0, 10.0, 1.0);
        let eq = &cl.equilibria().unwrap()[0];
        let cfg = SimConfig::new(5.0, eq.full_state());
        let traj = integrate(&cl, &cfg).unwrap();
        for s in &traj.states {
            for (a, b) in s.iter().zip(eq.full_state().iter()) {
                assert_relative_eq!(a, b, epsilon = 1e-7);
            }
        }
    }

    #[test]
    fn gene_expression_tracks_reference() {
        let cl = gene_expression_aic(1.0 / 3.0, 10.0, 1.0);
        let cfg = SimConfig::new(50.0, DVector::from_vec(vec![0.0; 4]));
        let traj = integrate(&cl, &cfg).unwrap();
        assert!((traj.final_output() - 1.0).abs() < 1e-3);
        assert!(traj.negativity_events.is_empty());
        assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn sis_tracks_reference() {
        let builtin = builtins::Sis::<f64> {
            beta: 1.0,
            n_total: 100.0,
        };
        let cl = ClosedLoop::nonlinear(
            builtin.nonlinear(),
            ControllerSpec::antithetic_from_annihilation_rate(2.0, 13.0, 99.0).unwrap(),
            SteadyStateConfig {
                u_range: builtin.steady_state_u_range(),
                seed: builtin.steady_state_seed(),
            },
        )
        .unwrap();
        let cfg = SimConfig::new(50.0, DVector::from_vec(vec![90.0, 0.0, 0.0]));
        let traj = integrate(&cl, &cfg).unwrap();
        assert!((traj.final_state()[0] - 99.0).abs() < 1e-2);
        assert!(traj.negativity_events.is_empty());
    }

    #[test]
    fn rk4_order_of_convergence() {
        // dt and dt/2 difference shrinks like O(dt^4): observed order >= 3.5
        let cl = gene_expression_aic(1.0 / 3.0, 10.0, 1.0);
        let x0 = DVector::from_vec(vec![0.0; 4]);
        let run = |dt: f64| {
            let cfg = SimConfig::new(10.0, x0.clone())
                .with_method(Method::Rk4Fixed { dt });
            integrate(&cl, &cfg).unwrap().final_output()
        };
        let reference = run(1.0 / 512.0);
        let e1 = (run(0.1) - reference).abs();
        let e2 = (run(0.05) - reference).abs();
        let order = (e1 / e2).log2();
        assert!(order >= 3.5, "observed order {order} (e1 = {e1:.3e}, e2 = {e2:.3e})");
    }

    #[test]
    fn exponential_closed_form() {
        // v(t) = v0 exp(alpha int (mu - y)), with the integral from the
        // same trajectory via the trapezoidal rule
        let sys = builtins::GeneExpression::<f64>::default().lti();
        let cl = ClosedLoop::linear(sys, ControllerSpec::exponential(1.0, 0.5, 1.0).unwrap())
            .unwrap();
        let v0 = 0.2;
        let cfg = SimConfig::new(8.0, DVector::from_vec(vec![0.0, 0.0, v0]))
            .with_tolerances(1e-10, 1e-12);
        let traj = integrate(&cl, &cfg).unwrap();
        let mut integral = 0.0;
        for i in 1..traj.times.len() {
            let dt = traj.times[i] - traj.times[i - 1];
            let e0 = 1.0 - traj.outputs[i - 1];
            let e1 = 1.0 - traj.outputs[i];
            integral += 0.5 * dt * (e0 + e1);
            let predicted = v0 * (0.5 * integral).exp();
            let actual = traj.states[i][2];
            assert_relative_eq!(actual, predicted, max_relative = 1e-4);
        }
    }

    #[test]
    fn logistic_confinement() {
        let sys = builtins::GeneExpression::<f64>::default().lti();
        let beta = 2.0;
        let cl = ClosedLoop::linear(
            sys,
            ControllerSpec::logistic(1.0, 0.8, beta, 1.0).unwrap(),
        )
        .unwrap();
        let cfg = SimConfig::new(40.0, DVector::from_vec(vec![0.0, 0.0, 0.01]));
        let traj = integrate(&cl, &cfg).unwrap();
        for s in &traj.states {
            assert!(s[2] > 0.0 && s[2] < beta, "v = {} escaped (0, beta)", s[2]);
        }
        assert!((traj.final_output() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn standard_integral_comparison_gaps_decrease() {
        let sys = builtins::GeneExpression::<f64>::default().lti();
        let cfg = SimConfig::new(50.0, DVector::from_vec(vec![0.0, 0.0]));
        let gap10 = compare_to_standard_integral(&sys, 1.0 / 3.0, 10.0, 1.0, &cfg)
            .unwrap()
            .max_output_gap;
        let gap1000 = compare_to_standard_integral(&sys, 1.0 / 3.0, 1000.0, 1.0, &cfg)
            .unwrap()
            .max_output_gap;
        assert!(gap1000 < 0.05);
        assert!(gap10 > gap1000);
    }

    #[test]
    fn identical_standard_controllers_have_zero_gap() {
        let sys = builtins::GeneExpression::<f64>::default().lti();
        let cl = ClosedLoop::linear(
            sys,
            ControllerSpec::standard_integral(0.5, 1.0).unwrap(),
        )
        .unwrap();
        let mut cfg = SimConfig::new(20.0, DVector::from_vec(vec![0.0, 0.0, 0.0]));
        cfg.sample_dt = Some(0.01);
        let a = integrate(&cl, &cfg).unwrap();
        let b = integrate(&cl, &cfg).unwrap();
        let gap = a
            .outputs
            .iter()
            .zip(b.outputs.iter())
            .fold(0.0f64, |acc, (x, y)| acc.max((x - y).abs()));
        assert_eq!(gap, 0.0);
    }

    #[test]
    fn disturbance_rejection_and_controller_channel_offset() {
        use crate::controllers::{Disturbance, DisturbanceChannel};
        let sys = builtins::GeneExpression::<f64>::default().lti();
        let sys = sys.clone().with_disturbance(sys.b().clone()).unwrap();

        // admissible input-channel step at t = 25: output returns to mu
        let cl = ClosedLoop::linear(
            sys.clone(),
            ControllerSpec::antithetic_from_annihilation_rate(1.0 / 3.0, 10.0, 1.0).unwrap(),
        )
        .unwrap()
        .with_disturbance(Disturbance {
            channel: DisturbanceChannel::PlantInput,
            magnitude: 0.0,
        })
        .unwrap();
        let mut cfg = SimConfig::new(100.0, DVector::from_vec(vec![0.0; 4]));
        cfg.disturbance_schedule = vec![(25.0, 0.5)];
        let traj = integrate(&cl, &cfg).unwrap();
        assert!((traj.final_output() - 1.0).abs() < 1e-3);
        // the disturbance visibly perturbs the output before adaptation
        let perturbed = traj
            .times
            .iter()
            .zip(traj.outputs.iter())
            .filter(|(t, _)| **t > 25.0 && **t < 40.0)
            .fold(0.0f64, |acc, (_, y)| acc.max((y - 1.0).abs()));
        assert!(perturbed > 0.05);

        // same magnitude on the controller state: persistent offset mu - d
        let cl2 = ClosedLoop::linear(
            sys,
            ControllerSpec::antithetic_from_annihilation_rate(1.0 / 3.0, 10.0, 1.0).unwrap(),
        )
        .unwrap()
        .with_disturbance(Disturbance {
            channel: DisturbanceChannel::ControllerState,
            magnitude: 0.0,
        })
        .unwrap();
        let mut cfg2 = SimConfig::new(100.0, DVector::from_vec(vec![0.0; 4]));
        cfg2.disturbance_schedule = vec![(25.0, 0.5)];
        let traj2 = integrate(&cl2, &cfg2).unwrap();
        assert!((traj2.final_output() - 1.0).abs() > 0.01);
        assert_relative_eq!(traj2.final_output(), 0.5, max_relative = 1e-2);
    }

    #[test]
    fn reference_schedule_steps() {
        let cl = gene_expression_aic(1.0 / 3.0, 10.0, 1.0);
        let mut cfg = SimConfig::new(100.0, DVector::from_vec(vec![0.0; 4]));
        cfg.reference_schedule = vec![(0.0, 1.0), (50.0, 2.0)];
        let traj = integrate(&cl, &cfg).unwrap();
        assert!((traj.output_at(49.0) - 1.0).abs() < 1e-2);
        assert!((traj.final_output() - 2.0).abs() < 1e-2);
    }

    #[test]
    fn tracking_metrics_cases() {
        let constant = Trajectory {
            times: vec![0.0, 1.0, 2.0],
            states: vec![DVector::from_vec(vec![1.0]); 3],
            outputs: vec![1.0, 1.0, 1.0],
            inputs: vec![0.0; 3],
            negativity_events: vec![],
        };
        let m = tracking_metrics(&constant, 1.0).unwrap();
        assert_eq!(m.settling_time_2pct, Some(0.0));
        assert_eq!(m.overshoot, 0.0);
        assert_eq!(m.steady_state_error, 0.0);

        let cl = gene_expression_aic(1.0 / 3.0, 10.0, 1.0);
        let cfg = SimConfig::new(50.0, DVector::from_vec(vec![0.0; 4]));
        let traj = integrate(&cl, &cfg).unwrap();
        let m = tracking_metrics(&traj, 1.0).unwrap();
        assert!(m.steady_state_error < 1e-3);
        assert!(m.settling_time_2pct.is_some());

        // diverging run: flagged as non-settling
        let diverging = Trajectory {
            times: vec![0.0, 1.0, 2.0],
            states: vec![DVector::from_vec(vec![1.0]); 3],
            outputs: vec![0.0, 2.0, 5.0],
            inputs: vec![0.0; 3],
            negativity_events: vec![],
        };
        let m = tracking_metrics(&diverging, 1.0).unwrap();
        assert_eq!(m.settling_time_2pct, None);
        assert!(m.steady_state_error > 1.0);
    }

    #[test]
    fn stiff_strong_binding_regime() {
        // keta = 1e4 with capped max step
        let cl = gene_expression_aic(1.0 / 3.0, 1e4, 1.0);
        let mut cfg = SimConfig::new(20.0, DVector::from_vec(vec![0.0; 4]));
        cfg.max_step = Some(0.5);
        let traj = integrate(&cl, &cfg).unwrap();
        assert!((traj.final_output() - 1.0).abs() < 1e-2);
    }
}
