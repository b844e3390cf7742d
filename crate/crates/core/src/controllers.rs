//! Controller families and closed-loop assembly.
//!
//! Four controller families act on a scalar tracking error against the
//! reference `mu`:
//!
//! * antithetic: two nonnegative states `z1, z2` annihilating at rate
//!   `k eta z1 z2`, control `u = k z1` (or `u = k z2` when the plant gain
//!   is negative);
//! * exponential: `v' = alpha v (mu - y)`, `u = k v`;
//! * logistic: `v' = (alpha/beta) v (beta - v)(mu - y)`, `u = k v`;
//! * standard integrator `v' = mu - y`, `u = k v`, kept as the reference
//!   against which the antithetic strong-binding limit is compared.
//!
//! A fifth variant exposes the tabulated regularized-integrator dynamics
//! (hyperbolic, arctangent, algebraic, generalized logistic and the two
//! families above) for simulation only; no closed-form equilibrium or
//! stability theory is attached to it.
//!
//! The strong-binding limit `eta -> infinity` is never evaluated
//! numerically: analysis paths route to the `M(k)` matrix in
//! [`crate::analysis::m_matrix`] instead.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Scalar;
use crate::sysmodel::{steady_state_map, LtiSystem, Monotonicity, NonlinearSystem};

/// Requested actuation orientation. `Auto` resolves from the plant's
/// steady-state gain direction when the loop is assembled: positive local
/// gain selects `u = k z1`, negative selects `u = k z2` (and the swapped
/// error sign for the single-state controllers).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ActuationSign {
    PositiveGain,
    NegativeGain,
    Auto,
}

/// Actuation orientation after resolution against a concrete plant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ResolvedSign {
    PositiveGain,
    NegativeGain,
}

impl ResolvedSign {
    fn factor<T: Scalar>(self) -> T {
        match self {
            ResolvedSign::PositiveGain => T::one(),
            ResolvedSign::NegativeGain => -T::one(),
        }
    }
}

/// Regularized-integrator kinds with the tabulated dynamics
/// `v' = phi'(phi^{-1}(v)) w` for `v = phi(I)`, `I' = w`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Regularizer<T> {
    /// `phi(x) = exp(alpha x)`: `v' = alpha v w`, image `(0, inf)`.
    Exponential { alpha: T },
    /// `phi(x) = beta/(1 + exp(-alpha x))`: `v' = (alpha/beta) v (beta - v) w`,
    /// image `(0, beta)`.
    Logistic { alpha: T, beta: T },
    /// `phi(x) = beta/(1 + exp(-alpha x))^theta`:
    /// `v' = (alpha theta / beta^(1/theta)) v (beta^(1/theta) - v) w`, on the
    /// interval `(0, beta^(1/theta))` implied by the tabulated dynamics.
    GeneralizedLogistic { alpha: T, beta: T, theta: T },
    /// `phi(x) = beta tanh(alpha x)`: `v' = alpha (1 - v^2/beta^2) w`,
    /// image `(-beta, beta)`.
    Hyperbolic { alpha: T, beta: T },
    /// `phi(x) = beta arctan(alpha x)`: `v' = alpha beta / (1 + tan(v/beta)^2) w`,
    /// image `(-beta pi/2, beta pi/2)`.
    Arctangent { alpha: T, beta: T },
    /// `phi(x) = beta alpha x / sqrt(1 + alpha^2 x^2)`:
    /// `v' = (alpha/beta^2) (beta^2 - v^2)^(3/2) w`, image `(-beta, beta)`.
    Algebraic { alpha: T, beta: T },
}

impl<T: Scalar> Regularizer<T> {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: T, name: &str| {
            if v > T::zero() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be positive")))
            }
        };
        match *self {
            Regularizer::Exponential { alpha } => positive(alpha, "alpha"),
            Regularizer::Logistic { alpha, beta }
            | Regularizer::Hyperbolic { alpha, beta }
            | Regularizer::Arctangent { alpha, beta }
            | Regularizer::Algebraic { alpha, beta } => {
                positive(alpha, "alpha").and(positive(beta, "beta"))
            }
            Regularizer::GeneralizedLogistic { alpha, beta, theta } => positive(alpha, "alpha")
                .and(positive(beta, "beta"))
                .and(positive(theta, "theta")),
        }
    }

    /// Interval of admissible controller states. Closed-over endpoints are
    /// tolerated by [`Regularizer::rhs`] except where the dynamics are
    /// singular there (arctangent).
    pub fn image(&self) -> (T, T) {
        match *self {
            Regularizer::Exponential { .. } => (T::zero(), T::infinity()),
            Regularizer::Logistic { beta, .. } => (T::zero(), beta),
            Regularizer::GeneralizedLogistic { beta, theta, .. } => {
                (T::zero(), beta.powf(T::one() / theta))
            }
            Regularizer::Hyperbolic { beta, .. } | Regularizer::Algebraic { beta, .. } => {
                (-beta, beta)
            }
            Regularizer::Arctangent { beta, .. } => {
                let half_pi = T::pi() * T::lit(0.5);
                (-beta * half_pi, beta * half_pi)
            }
        }
    }

    /// Tabulated right-hand side of the regularized integrator driven by
    /// the input `w`.
    pub fn rhs(&self, v: T, w: T) -> Result<T> {
        let (lo, hi) = self.image();
        let strict = matches!(self, Regularizer::Arctangent { .. });
        let inside = if strict { v > lo && v < hi } else { v >= lo && v <= hi };
        if !inside {
            return Err(Error::OutOfImage(v.to_subset().unwrap_or(f64::NAN)));
        }
        Ok(match *self {
            Regularizer::Exponential { alpha } => alpha * v * w,
            Regularizer::Logistic { alpha, beta } => alpha / beta * v * (beta - v) * w,
            Regularizer::GeneralizedLogistic { alpha, beta, theta } => {
                let cap = beta.powf(T::one() / theta);
                alpha * theta / cap * v * (cap - v) * w
            }
            Regularizer::Hyperbolic { alpha, beta } => {
                alpha * (T::one() - v * v / (beta * beta)) * w
            }
            Regularizer::Arctangent { alpha, beta } => {
                let t = (v / beta).tan();
                alpha * beta / (T::one() + t * t) * w
            }
            Regularizer::Algebraic { alpha, beta } => {
                let rem = beta * beta - v * v;
                alpha / (beta * beta) * rem.powf(T::lit(1.5)) * w
            }
        })
    }
}

/// Controller family and parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ControllerVariant<T> {
    Antithetic { k: T, eta: T },
    Exponential { k: T, alpha: T },
    Logistic { k: T, alpha: T, beta: T },
    StandardIntegral { k: T },
    Regularized { k: T, regularizer: Regularizer<T> },
}

impl<T: Scalar> ControllerVariant<T> {
    pub fn gain(&self) -> T {
        match *self {
            ControllerVariant::Antithetic { k, .. }
            | ControllerVariant::Exponential { k, .. }
            | ControllerVariant::Logistic { k, .. }
            | ControllerVariant::StandardIntegral { k }
            | ControllerVariant::Regularized { k, .. } => k,
        }
    }

    /// Number of controller states (2 antithetic, 1 otherwise).
    pub fn state_count(&self) -> usize {
        match self {
            ControllerVariant::Antithetic { .. } => 2,
            _ => 1,
        }
    }
}

/// Full controller specification: family, reference set-point and
/// actuation orientation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ControllerSpec<T> {
    pub variant: ControllerVariant<T>,
    pub mu: T,
    pub sign: ActuationSign,
}

impl<T: Scalar> ControllerSpec<T> {
    fn validated(variant: ControllerVariant<T>, mu: T) -> Result<Self> {
        let spec = Self {
            variant,
            mu,
            sign: ActuationSign::Auto,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Antithetic controller with annihilation term `k eta z1 z2`.
    pub fn antithetic(k: T, eta: T, mu: T) -> Result<Self> {
        Self::validated(ControllerVariant::Antithetic { k, eta }, mu)
    }

    /// Antithetic controller given the raw annihilation rate `r` (the
    /// coefficient of `z1 z2`), i.e. the substitution `eta <- r / k`.
    pub fn antithetic_from_annihilation_rate(k: T, rate: T, mu: T) -> Result<Self> {
        if k <= T::zero() {
            return Err(Error::InvalidParameter("gain k must be positive".into()));
        }
        Self::validated(ControllerVariant::Antithetic { k, eta: rate / k }, mu)
    }

    pub fn exponential(k: T, alpha: T, mu: T) -> Result<Self> {
        Self::validated(ControllerVariant::Exponential { k, alpha }, mu)
    }

    pub fn logistic(k: T, alpha: T, beta: T, mu: T) -> Result<Self> {
        Self::validated(ControllerVariant::Logistic { k, alpha, beta }, mu)
    }

    pub fn standard_integral(k: T, mu: T) -> Result<Self> {
        Self::validated(ControllerVariant::StandardIntegral { k }, mu)
    }

    pub fn regularized(k: T, regularizer: Regularizer<T>, mu: T) -> Result<Self> {
        Self::validated(ControllerVariant::Regularized { k, regularizer }, mu)
    }

    pub fn with_sign(mut self, sign: ActuationSign) -> Self {
        self.sign = sign;
        self
    }

    pub fn with_reference(mut self, mu: T) -> Self {
        self.mu = mu;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: T, name: &str| {
            if v > T::zero() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be positive")))
            }
        };
        positive(self.mu, "mu")?;
        match self.variant {
            ControllerVariant::Antithetic { k, eta } => {
                positive(k, "k").and(positive(eta, "eta"))
            }
            ControllerVariant::Exponential { k, alpha } => {
                positive(k, "k").and(positive(alpha, "alpha"))
            }
            ControllerVariant::Logistic { k, alpha, beta } => positive(k, "k")
                .and(positive(alpha, "alpha"))
                .and(positive(beta, "beta")),
            ControllerVariant::StandardIntegral { k } => positive(k, "k"),
            ControllerVariant::Regularized { k, regularizer } => {
                positive(k, "k").and(regularizer.validate())
            }
        }
    }
}

/// The plant side of a closed loop.
#[derive(Clone)]
pub enum Plant<T: Scalar> {
    Lti(LtiSystem<T>),
    Nonlinear(NonlinearSystem<T>),
}

impl<T: Scalar> Plant<T> {
    pub fn dim(&self) -> usize {
        match self {
            Plant::Lti(sys) => sys.n(),
            Plant::Nonlinear(sys) => sys.dim(),
        }
    }

    pub fn is_internally_positive(&self) -> bool {
        match self {
            Plant::Lti(sys) => sys.is_internally_positive(),
            Plant::Nonlinear(sys) => sys.is_internally_positive(),
        }
    }

    fn output(&self, x: &DVector<T>) -> T {
        match self {
            Plant::Lti(sys) => sys.output(x),
            Plant::Nonlinear(sys) => sys.h(x),
        }
    }

    fn dynamics(&self, x: &DVector<T>, u: T) -> DVector<T> {
        match self {
            Plant::Lti(sys) => sys.a() * x + sys.b() * u,
            Plant::Nonlinear(sys) => sys.f(x, u),
        }
    }
}

/// Which derivative the constant disturbance enters.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DisturbanceChannel {
    /// Through the plant's `E` direction: `x' += E d`.
    PlantInput,
    /// Additively on the second controller state (`z2'` for the antithetic
    /// controller, `v'` for single-state controllers).
    ControllerState,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Disturbance<T> {
    pub channel: DisturbanceChannel,
    pub magnitude: T,
}

/// Steady-state solver configuration for nonlinear plants.
#[derive(Clone, Debug)]
pub struct SteadyStateConfig<T: Scalar> {
    pub u_range: (T, T),
    pub seed: DVector<T>,
}

/// Closed loop: plant, controller (with resolved actuation sign) and an
/// optional constant disturbance. State layout: plant states first, then
/// controller states (`z1, z2` antithetic; `v` otherwise).
#[derive(Clone)]
pub struct ClosedLoop<T: Scalar> {
    plant: Plant<T>,
    controller: ControllerSpec<T>,
    sign: ResolvedSign,
    disturbance: Option<Disturbance<T>>,
    ss_config: Option<SteadyStateConfig<T>>,
}

/// Kind of closed-loop fixed point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EquilibriumLabel {
    /// The tracking equilibrium with `y = mu`.
    Positive,
    /// Controller state at zero (absorbing in the controller coordinate).
    Zero,
    /// Logistic controller pinned at its saturation bound.
    Saturating,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquilibriumPoint<T: Scalar> {
    pub x: DVector<T>,
    pub ctrl: Vec<T>,
    pub label: EquilibriumLabel,
    pub u: T,
    pub y: T,
}

impl<T: Scalar> EquilibriumPoint<T> {
    /// Plant and controller states concatenated in simulation layout.
    pub fn full_state(&self) -> DVector<T> {
        let mut v: Vec<T> = self.x.iter().copied().collect();
        v.extend_from_slice(&self.ctrl);
        DVector::from_vec(v)
    }
}

impl<T: Scalar> ClosedLoop<T> {
    /// Assemble a loop around a linear plant; `Auto` resolves the actuation
    /// sign from the sign of the DC gain.
    pub fn linear(plant: LtiSystem<T>, controller: ControllerSpec<T>) -> Result<Self> {
        controller.validate()?;
        let sign = match controller.sign {
            ActuationSign::PositiveGain => ResolvedSign::PositiveGain,
            ActuationSign::NegativeGain => ResolvedSign::NegativeGain,
            ActuationSign::Auto => {
                if plant.dc_gain()? > T::zero() {
                    ResolvedSign::PositiveGain
                } else {
                    ResolvedSign::NegativeGain
                }
            }
        };
        Ok(Self {
            plant: Plant::Lti(plant),
            controller,
            sign,
            disturbance: None,
            ss_config: None,
        })
    }

    /// Assemble a loop around a nonlinear plant. The steady-state
    /// configuration drives equilibrium solves and, for `Auto`, sign
    /// resolution from the monotonicity direction of the steady-state map.
    pub fn nonlinear(
        plant: NonlinearSystem<T>,
        controller: ControllerSpec<T>,
        ss_config: SteadyStateConfig<T>,
    ) -> Result<Self> {
        controller.validate()?;
        let sign = match controller.sign {
            ActuationSign::PositiveGain => ResolvedSign::PositiveGain,
            ActuationSign::NegativeGain => ResolvedSign::NegativeGain,
            ActuationSign::Auto => {
                let map = steady_state_map(&plant, ss_config.u_range, &ss_config.seed)?;
                match map.direction() {
                    Monotonicity::Increasing => ResolvedSign::PositiveGain,
                    Monotonicity::Decreasing => ResolvedSign::NegativeGain,
                }
            }
        };
        Ok(Self {
            plant: Plant::Nonlinear(plant),
            controller,
            sign,
            disturbance: None,
            ss_config: Some(ss_config),
        })
    }

    /// Attach a constant disturbance. Plant-input disturbances require a
    /// linear plant with an `E` direction.
    pub fn with_disturbance(mut self, disturbance: Disturbance<T>) -> Result<Self> {
        if disturbance.magnitude < T::zero() {
            return Err(Error::InvalidParameter(
                "disturbance magnitude must be nonnegative".into(),
            ));
        }
        if disturbance.channel == DisturbanceChannel::PlantInput {
            match &self.plant {
                Plant::Lti(sys) if sys.e().is_some() => {}
                Plant::Lti(_) => {
                    return Err(Error::InvalidParameter(
                        "plant-input disturbance requires an E direction on the system".into(),
                    ))
                }
                Plant::Nonlinear(_) => {
                    return Err(Error::Unsupported(
                        "plant-input disturbances on nonlinear plants".into(),
                    ))
                }
            }
        }
        self.disturbance = Some(disturbance);
        Ok(self)
    }

    pub fn plant(&self) -> &Plant<T> {
        &self.plant
    }

    pub fn controller(&self) -> &ControllerSpec<T> {
        &self.controller
    }

    pub fn resolved_sign(&self) -> ResolvedSign {
        self.sign
    }

    pub fn disturbance(&self) -> Option<&Disturbance<T>> {
        self.disturbance.as_ref()
    }

    pub fn plant_dim(&self) -> usize {
        self.plant.dim()
    }

    pub fn controller_dim(&self) -> usize {
        self.controller.variant.state_count()
    }

    pub fn state_dim(&self) -> usize {
        self.plant_dim() + self.controller_dim()
    }

    /// Replace the reference set-point (used by simulation schedules).
    pub fn with_reference(mut self, mu: T) -> Self {
        self.controller = self.controller.with_reference(mu);
        self
    }

    /// Replace the disturbance magnitude, keeping the channel (used by
    /// simulation schedules). No-op when no disturbance is attached.
    pub fn with_disturbance_magnitude(mut self, magnitude: T) -> Self {
        if let Some(d) = &mut self.disturbance {
            d.magnitude = magnitude;
        }
        self
    }

    /// Interval the controller coordinate must stay inside, when the
    /// controller dynamics are only defined there (logistic and the
    /// tabulated regularizers).
    pub fn controller_state_interval(&self) -> Option<(T, T)> {
        match self.controller.variant {
            ControllerVariant::Logistic { beta, .. } => Some((T::zero(), beta)),
            ControllerVariant::Regularized { regularizer, .. } => Some(regularizer.image()),
            _ => None,
        }
    }

    /// Control input as a function of the controller states.
    pub fn control_input(&self, ctrl: &[T]) -> T {
        let k = self.controller.variant.gain();
        match self.controller.variant {
            ControllerVariant::Antithetic { .. } => match self.sign {
                ResolvedSign::PositiveGain => k * ctrl[0],
                ResolvedSign::NegativeGain => k * ctrl[1],
            },
            _ => k * ctrl[0],
        }
    }

    /// Closed-loop vector field at `state` (time enters only through
    /// schedules, which the simulator resolves into piecewise-constant
    /// loops, so the field itself is autonomous).
    pub fn rhs(&self, state: &DVector<T>, _t: T) -> Result<DVector<T>> {
        let n = self.plant_dim();
        let expected = self.state_dim();
        if state.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: state.len(),
            });
        }
        let x = DVector::from_iterator(n, state.iter().take(n).copied());
        let ctrl: Vec<T> = state.iter().skip(n).copied().collect();
        let u = self.control_input(&ctrl);
        let y = self.plant.output(&x);
        let mu = self.controller.mu;

        let mut dx = self.plant.dynamics(&x, u);
        let mut d_ctrl_state = T::zero();
        if let Some(dist) = &self.disturbance {
            match dist.channel {
                DisturbanceChannel::PlantInput => {
                    if let Plant::Lti(sys) = &self.plant {
                        if let Some(e) = sys.e() {
                            dx += e * dist.magnitude;
                        }
                    }
                }
                DisturbanceChannel::ControllerState => d_ctrl_state = dist.magnitude,
            }
        }

        let err = self.sign.factor::<T>() * (mu - y);
        let mut out: Vec<T> = dx.iter().copied().collect();
        match self.controller.variant {
            ControllerVariant::Antithetic { k, eta } => {
                let ann = k * eta * ctrl[0] * ctrl[1];
                out.push(mu - ann);
                out.push(y - ann + d_ctrl_state);
            }
            ControllerVariant::Exponential { alpha, .. } => {
                out.push(alpha * ctrl[0] * err + d_ctrl_state);
            }
            ControllerVariant::Logistic { alpha, beta, .. } => {
                out.push(alpha / beta * ctrl[0] * (beta - ctrl[0]) * err + d_ctrl_state);
            }
            ControllerVariant::StandardIntegral { .. } => {
                out.push(err + d_ctrl_state);
            }
            ControllerVariant::Regularized { regularizer, .. } => {
                out.push(regularizer.rhs(ctrl[0], err)? + d_ctrl_state);
            }
        }
        Ok(DVector::from_vec(out))
    }

    /// Infinity norm of the closed-loop field at an equilibrium point.
    pub fn residual(&self, eq: &EquilibriumPoint<T>) -> Result<T> {
        Ok(self.rhs(&eq.full_state(), T::zero())?.amax())
    }

    /// All closed-loop equilibrium points for the assembled combination.
    pub fn equilibria(&self) -> Result<Vec<EquilibriumPoint<T>>> {
        match &self.plant {
            Plant::Lti(sys) => self.equilibria_linear(sys),
            Plant::Nonlinear(sys) => self.equilibria_nonlinear(sys),
        }
    }

    fn equilibria_linear(&self, sys: &LtiSystem<T>) -> Result<Vec<EquilibriumPoint<T>>> {
        let g = sys.require_assumption1()?;
        if self.sign == ResolvedSign::NegativeGain {
            return Err(Error::Unsupported(
                "negative actuation with a linear plant (the DC gain of a stable internally \
                 positive linear system is positive)"
                    .into(),
            ));
        }
        let mu = self.controller.mu;
        let k = self.controller.variant.gain();

        // plant-input disturbance shifts the reference seen by the plant
        let (d_plant, d_ctrl) = match &self.disturbance {
            Some(d) if d.channel == DisturbanceChannel::PlantInput => (d.magnitude, T::zero()),
            Some(d) => (T::zero(), d.magnitude),
            None => (T::zero(), T::zero()),
        };
        let ca_inv_e = sys.ca_inv_e()?;
        let mu_eff = mu + ca_inv_e * d_plant;
        if d_plant > T::zero() && mu_eff <= T::zero() {
            return Err(Error::InadmissibleDisturbance);
        }

        // plant equilibrium for a constant input u: x = -A^{-1}(B u + E d)
        let plant_eq = |u: T| -> Result<DVector<T>> {
            let rhs = sys.b() * u + sys.e_or_zero() * d_plant;
            Ok(-linalg::solve(sys.a(), &rhs)?)
        };

        match self.controller.variant {
            ControllerVariant::Antithetic { k: _, eta } => {
                // tracked output: mu for plant-side disturbances, mu - d for
                // a disturbance acting on the z2 dynamics
                let y_star = mu - d_ctrl;
                let u_star = (mu_eff - d_ctrl) / g;
                if u_star <= T::zero() {
                    return Err(Error::EquilibriumOutOfRange(
                        "antithetic equilibrium requires a positive steady-state input".into(),
                    ));
                }
                let z1 = u_star / k;
                let z2 = mu / (k * eta * z1);
                Ok(vec![EquilibriumPoint {
                    x: plant_eq(u_star)?,
                    ctrl: vec![z1, z2],
                    label: EquilibriumLabel::Positive,
                    u: u_star,
                    y: y_star,
                }])
            }
            ControllerVariant::StandardIntegral { .. } => {
                let y_star = mu - d_ctrl;
                let u_star = (mu_eff - d_ctrl) / g;
                Ok(vec![EquilibriumPoint {
                    x: plant_eq(u_star)?,
                    ctrl: vec![u_star / k],
                    label: EquilibriumLabel::Positive,
                    u: u_star,
                    y: y_star,
                }])
            }
            ControllerVariant::Exponential { .. } => {
                if d_ctrl != T::zero() {
                    return Err(Error::Unsupported(
                        "controller-state disturbances on the exponential controller".into(),
                    ));
                }
                let x_zero = plant_eq(T::zero())?;
                let y_zero = sys.output(&x_zero);
                let zero = EquilibriumPoint {
                    x: x_zero,
                    ctrl: vec![T::zero()],
                    label: EquilibriumLabel::Zero,
                    u: T::zero(),
                    y: y_zero,
                };
                let u_star = mu_eff / g;
                let positive = EquilibriumPoint {
                    x: plant_eq(u_star)?,
                    ctrl: vec![u_star / k],
                    label: EquilibriumLabel::Positive,
                    u: u_star,
                    y: mu,
                };
                Ok(vec![zero, positive])
            }
            ControllerVariant::Logistic { beta, .. } => {
                if self.disturbance.is_some() {
                    return Err(Error::Unsupported(
                        "disturbed logistic equilibria".into(),
                    ));
                }
                if mu >= g * k * beta {
                    return Err(Error::EquilibriumOutOfRange(
                        "logistic positive equilibrium requires mu < g k beta".into(),
                    ));
                }
                let zero = EquilibriumPoint {
                    x: DVector::zeros(sys.n()),
                    ctrl: vec![T::zero()],
                    label: EquilibriumLabel::Zero,
                    u: T::zero(),
                    y: T::zero(),
                };
                let u_sat = k * beta;
                let saturating = EquilibriumPoint {
                    x: plant_eq(u_sat)?,
                    ctrl: vec![beta],
                    label: EquilibriumLabel::Saturating,
                    u: u_sat,
                    y: g * u_sat,
                };
                let u_star = mu / g;
                let positive = EquilibriumPoint {
                    x: plant_eq(u_star)?,
                    ctrl: vec![u_star / k],
                    label: EquilibriumLabel::Positive,
                    u: u_star,
                    y: mu,
                };
                Ok(vec![zero, saturating, positive])
            }
            ControllerVariant::Regularized { .. } => Err(Error::Unsupported(
                "equilibria of tabulated regularized controllers; use the dedicated \
                 exponential/logistic variants for analysis"
                    .into(),
            )),
        }
    }

    fn equilibria_nonlinear(&self, sys: &NonlinearSystem<T>) -> Result<Vec<EquilibriumPoint<T>>> {
        let cfg = self.ss_config.as_ref().ok_or_else(|| {
            Error::InvalidParameter("nonlinear loop missing steady-state configuration".into())
        })?;
        if self.disturbance.is_some() {
            return Err(Error::Unsupported(
                "disturbed equilibria on nonlinear plants".into(),
            ));
        }
        let ControllerVariant::Antithetic { k, eta } = self.controller.variant else {
            return Err(Error::Unsupported(
                "closed-form equilibria on nonlinear plants are available for the antithetic \
                 controller only"
                    .into(),
            ));
        };
        let mu = self.controller.mu;
        let map = steady_state_map(sys, cfg.u_range, &cfg.seed)?;
        let u_star = map.invert(mu)?;
        if u_star <= T::zero() {
            return Err(Error::EquilibriumOutOfRange(
                "steady-state input for the requested set-point is not positive".into(),
            ));
        }
        let x_star = map.state(u_star)?;
        let (z1, z2) = match self.sign {
            ResolvedSign::PositiveGain => (u_star / k, mu / (eta * u_star)),
            ResolvedSign::NegativeGain => (mu / (eta * u_star), u_star / k),
        };
        Ok(vec![EquilibriumPoint {
            x: x_star,
            ctrl: vec![z1, z2],
            label: EquilibriumLabel::Positive,
            u: u_star,
            y: mu,
        }])
    }

    /// Exact block Jacobian of the closed loop at an equilibrium point.
    /// Nonlinear plants are linearized at `(x*, u*)`.
    pub fn jacobian(&self, eq: &EquilibriumPoint<T>) -> Result<DMatrix<T>> {
        let (a, b, c) = match &self.plant {
            Plant::Lti(sys) => (sys.a().clone(), sys.b().clone(), sys.c().clone()),
            Plant::Nonlinear(sys) => {
                let lin = sys.linearize(&eq.x, eq.u)?;
                (lin.a().clone(), lin.b().clone(), lin.c().clone())
            }
        };
        let n = a.nrows();
        let m = self.controller_dim();
        let k = self.controller.variant.gain();
        let sigma = self.sign.factor::<T>();
        let mu = self.controller.mu;
        let mut j = DMatrix::zeros(n + m, n + m);
        j.view_mut((0, 0), (n, n)).copy_from(&a);

        match self.controller.variant {
            ControllerVariant::Antithetic { k: _, eta } => {
                let u_col = match self.sign {
                    ResolvedSign::PositiveGain => n,
                    ResolvedSign::NegativeGain => n + 1,
                };
                for i in 0..n {
                    j[(i, u_col)] = b[i] * k;
                }
                let r = k * eta;
                let dz1 = -r * eq.ctrl[1];
                let dz2 = -r * eq.ctrl[0];
                j[(n, n)] = dz1;
                j[(n, n + 1)] = dz2;
                j[(n + 1, n)] = dz1;
                j[(n + 1, n + 1)] = dz2;
                for i in 0..n {
                    j[(n + 1, i)] = c[i];
                }
            }
            ControllerVariant::Exponential { alpha, .. } => {
                for i in 0..n {
                    j[(i, n)] = b[i] * k;
                    j[(n, i)] = -sigma * alpha * eq.ctrl[0] * c[i];
                }
                j[(n, n)] = sigma * alpha * (mu - eq.y);
            }
            ControllerVariant::Logistic { alpha, beta, .. } => {
                let v = eq.ctrl[0];
                for i in 0..n {
                    j[(i, n)] = b[i] * k;
                    j[(n, i)] = -sigma * alpha / beta * v * (beta - v) * c[i];
                }
                j[(n, n)] = sigma * alpha / beta * (beta - (v + v)) * (mu - eq.y);
            }
            ControllerVariant::StandardIntegral { .. } => {
                for i in 0..n {
                    j[(i, n)] = b[i] * k;
                    j[(n, i)] = -sigma * c[i];
                }
            }
            ControllerVariant::Regularized { .. } => {
                return Err(Error::Unsupported(
                    "Jacobians of tabulated regularized controllers".into(),
                ))
            }
        }
        Ok(j)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins;
    use approx::assert_relative_eq;

    fn gene_expression_loop(k: f64, eta: f64, mu: f64) -> ClosedLoop<f64> {
        let sys = builtins::GeneExpression::<f64>::default().lti();
        ClosedLoop::linear(sys, ControllerSpec::antithetic(k, eta, mu).unwrap()).unwrap()
    }

    #[test]
    fn antithetic_equilibrium_gene_expression() {
        // unit parameters, mu = 1, k = 1/3: z1* = mu/(g k) = 3, z2* = g/eta
        let eta = 2.0;
        let cl = gene_expression_loop(1.0 / 3.0, eta, 1.0);
        let eqs = cl.equilibria().unwrap();
        assert_eq!(eqs.len(), 1);
        let eq = &eqs[0];
        assert_relative_eq!(eq.ctrl[0], 3.0, epsilon = 1e-12);
        assert_relative_eq!(eq.ctrl[1], 1.0 / eta, epsilon = 1e-12);
        assert_relative_eq!(eq.y, 1.0, epsilon = 1e-12);
        assert!(cl.residual(eq).unwrap() < 1e-12);
    }

    #[test]
    fn antithetic_rhs_vanishes_at_equilibrium() {
        let cl = gene_expression_loop(0.5, 3.0, 2.0);
        let eq = &cl.equilibria().unwrap()[0];
        assert!(cl.residual(eq).unwrap() < 1e-9);
    }

    #[test]
    fn antithetic_integrator_identity() {
        // d/dt (z1 - z2) = mu - y, read off the rhs at arbitrary states
        let cl = gene_expression_loop(0.7, 5.0, 1.3);
        let state = DVector::from_vec(vec![0.4, 1.9, 0.8, 0.2]);
        let dz = cl.rhs(&state, 0.0).unwrap();
        let y = 1.9;
        assert_relative_eq!(dz[2] - dz[3], 1.3 - y, epsilon = 1e-14);
    }

    #[test]
    fn exponential_zero_is_absorbing() {
        let sys = builtins::GeneExpression::<f64>::default().lti();
        let cl =
            ClosedLoop::linear(sys, ControllerSpec::exponential(1.0, 0.5, 1.0).unwrap()).unwrap();
        let state = DVector::from_vec(vec![0.3, 0.9, 0.0]);
        let d = cl.rhs(&state, 0.0).unwrap();
        assert_eq!(d[2], 0.0);
    }

    #[test]
    fn exponential_equilibria() {
        let sys = builtins::GeneExpression::<f64>::default().lti();
        let cl =
            ClosedLoop::linear(sys, ControllerSpec::exponential(2.0, 0.5, 1.5).unwrap()).unwrap();
        let eqs = cl.equilibria().unwrap();
        assert_eq!(eqs.len(), 2);
        assert_eq!(eqs[0].label, EquilibriumLabel::Zero);
        assert_eq!(eqs[1].label, EquilibriumLabel::Positive);
        // v* = mu/(g k)
        assert_relative_eq!(eqs[1].ctrl[0], 1.5 / 2.0, epsilon = 1e-12);
        for eq in &eqs {
            assert!(cl.residual(eq).unwrap() < 1e-12);
        }
    }

    #[test]
    fn logistic_three_equilibria_and_range() {
        let sys = builtins::GeneExpression::<f64>::default().lti();
        let cl = ClosedLoop::linear(
            sys.clone(),
            ControllerSpec::logistic(1.0, 0.5, 2.0, 1.0).unwrap(),
        )
        .unwrap();
        let eqs = cl.equilibria().unwrap();
        assert_eq!(eqs.len(), 3);
        assert_eq!(eqs[0].label, EquilibriumLabel::Zero);
        assert_eq!(eqs[1].label, EquilibriumLabel::Saturating);
        assert_relative_eq!(eqs[1].ctrl[0], 2.0, epsilon = 1e-12);
        assert_eq!(eqs[2].label, EquilibriumLabel::Positive);
        for eq in &eqs {
            assert!(cl.residual(eq).unwrap() < 1e-12, "label {:?}", eq.label);
        }
        // mu >= g k beta: positive equilibrium does not exist
        let too_large = ClosedLoop::linear(
            sys,
            ControllerSpec::logistic(1.0, 0.5, 2.0, 2.5).unwrap(),
        )
        .unwrap();
        assert!(matches!(
            too_large.equilibria(),
            Err(Error::EquilibriumOutOfRange(_))
        ));
    }

    #[test]
    fn sis_equilibrium_matches_closed_form() {
        // (x1*, z1*, z2*) = (mu, beta mu / k, 1/(beta eta))
        let (beta, n_total, k, eta, mu) = (1.0, 100.0, 2.0, 6.5, 99.0);
        let builtin = builtins::Sis { beta, n_total };
        let cl = ClosedLoop::nonlinear(
            builtin.nonlinear(),
            ControllerSpec::antithetic(k, eta, mu).unwrap(),
            SteadyStateConfig {
                u_range: builtin.steady_state_u_range(),
                seed: builtin.steady_state_seed(),
            },
        )
        .unwrap();
        assert_eq!(cl.resolved_sign(), ResolvedSign::PositiveGain);
        let eq = &cl.equilibria().unwrap()[0];
        assert_relative_eq!(eq.x[0], mu, max_relative = 1e-9);
        assert_relative_eq!(eq.ctrl[0], beta * mu / k, max_relative = 1e-8);
        assert_relative_eq!(eq.ctrl[1], 1.0 / (beta * eta), max_relative = 1e-8);
        assert!(cl.residual(eq).unwrap() < 1e-9);
    }

    #[test]
    fn repressed_translation_equilibrium() {
        // z2* = (1/k)(k1 k2/(g1 g2 mu) - 1), actuation resolves to u = k z2
        let (k1, k2, g1, g2) = (2.0, 3.0, 0.8, 1.1);
        let builtin = builtins::RepressedTranslation {
            k1,
            k2,
            gamma1: g1,
            gamma2: g2,
        };
        let (k, eta, mu) = (0.9, 4.0, 2.0);
        let cl = ClosedLoop::nonlinear(
            builtin.nonlinear(),
            ControllerSpec::antithetic(k, eta, mu).unwrap(),
            SteadyStateConfig {
                u_range: (0.1, 20.0),
                seed: builtin.steady_state_seed(),
            },
        )
        .unwrap();
        assert_eq!(cl.resolved_sign(), ResolvedSign::NegativeGain);
        let eq = &cl.equilibria().unwrap()[0];
        let expected_z2 = (k1 * k2 / (g1 * g2 * mu) - 1.0) / k;
        assert_relative_eq!(eq.ctrl[1], expected_z2, max_relative = 1e-7);
        assert_relative_eq!(eq.x[0], k1 / g1, max_relative = 1e-9);
        assert_relative_eq!(eq.x[1], mu, max_relative = 1e-9);
        assert!(cl.residual(eq).unwrap() < 1e-9);
    }

    #[test]
    fn example1_jacobian_rows() {
        // [[-1,0,k,0],[1,-1,0,0],[0,0,-k,-eta mu],[0,1,-k,-eta mu]]
        let (k, eta, mu) = (1.0, 1.0, 10.0);
        let cl = ClosedLoop::linear(
            builtins::Example1.lti(),
            ControllerSpec::antithetic(k, eta, mu).unwrap(),
        )
        .unwrap();
        let eq = &cl.equilibria().unwrap()[0];
        let j = cl.jacobian(eq).unwrap();
        let expected = DMatrix::from_row_slice(
            4,
            4,
            &[
                -1.0, 0.0, k, 0.0, //
                1.0, -1.0, 0.0, 0.0, //
                0.0, 0.0, -k, -eta * mu, //
                0.0, 1.0, -k, -eta * mu,
            ],
        );
        for i in 0..4 {
            for jj in 0..4 {
                assert_relative_eq!(j[(i, jj)], expected[(i, jj)], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let cases: Vec<ClosedLoop<f64>> = vec![
            gene_expression_loop(0.4, 2.5, 1.2),
            ClosedLoop::linear(
                builtins::GeneExpression::<f64>::default().lti(),
                ControllerSpec::exponential(1.3, 0.7, 0.9).unwrap(),
            )
            .unwrap(),
            ClosedLoop::linear(
                builtins::GeneExpression::<f64>::default().lti(),
                ControllerSpec::logistic(1.1, 0.6, 3.0, 1.4).unwrap(),
            )
            .unwrap(),
            ClosedLoop::linear(
                builtins::GeneExpression::<f64>::default().lti(),
                ControllerSpec::standard_integral(0.8, 1.1).unwrap(),
            )
            .unwrap(),
        ];
        for cl in cases {
            let eqs = cl.equilibria().unwrap();
            let eq = eqs.last().unwrap();
            let j = cl.jacobian(eq).unwrap();
            let s0 = eq.full_state();
            let dim = s0.len();
            let h = 1e-6;
            for col in 0..dim {
                let mut sp = s0.clone();
                let mut sm = s0.clone();
                sp[col] += h;
                sm[col] -= h;
                let fp = cl.rhs(&sp, 0.0).unwrap();
                let fm = cl.rhs(&sm, 0.0).unwrap();
                for row in 0..dim {
                    let fd = (fp[row] - fm[row]) / (2.0 * h);
                    assert!(
                        (j[(row, col)] - fd).abs() < 1e-5 * (1.0 + fd.abs()),
                        "mismatch at ({row},{col}): {} vs {fd}",
                        j[(row, col)]
                    );
                }
            }
        }
    }

    #[test]
    fn regularizer_table_rows() {
        let w = 1.0;
        let exp = Regularizer::Exponential { alpha: 0.7 };
        assert_eq!(exp.rhs(1.0, 0.0).unwrap(), 0.0);
        assert_relative_eq!(exp.rhs(2.0, w).unwrap(), 0.7 * 2.0, epsilon = 1e-14);

        let (alpha, beta) = (0.9f64, 2.0f64);
        let logistic = Regularizer::Logistic { alpha, beta };
        // v = beta/2, w = 1 -> alpha beta / 4
        assert_relative_eq!(
            logistic.rhs(beta / 2.0, w).unwrap(),
            alpha * beta / 4.0,
            epsilon = 1e-14
        );

        let hyper = Regularizer::Hyperbolic { alpha, beta };
        assert_relative_eq!(hyper.rhs(0.0, w).unwrap(), alpha, epsilon = 1e-14);

        let arct = Regularizer::Arctangent { alpha, beta };
        assert_relative_eq!(arct.rhs(0.0, w).unwrap(), alpha * beta, epsilon = 1e-14);

        let alg = Regularizer::Algebraic { alpha, beta };
        assert_relative_eq!(
            alg.rhs(0.0, w).unwrap(),
            alpha / (beta * beta) * (beta * beta).powf(1.5),
            epsilon = 1e-12
        );

        let gl = Regularizer::GeneralizedLogistic {
            alpha,
            beta,
            theta: 2.0,
        };
        let cap = beta.powf(0.5);
        assert_relative_eq!(
            gl.rhs(1.0, w).unwrap(),
            alpha * 2.0 / cap * (cap - 1.0),
            epsilon = 1e-12
        );
    }

    #[test]
    fn regularizer_out_of_image() {
        let logistic = Regularizer::Logistic {
            alpha: 1.0,
            beta: 2.0,
        };
        assert!(matches!(logistic.rhs(2.5, 1.0), Err(Error::OutOfImage(_))));
        assert!(matches!(logistic.rhs(-0.1, 1.0), Err(Error::OutOfImage(_))));
        let hyper = Regularizer::Hyperbolic {
            alpha: 1.0,
            beta: 1.0,
        };
        assert!(matches!(hyper.rhs(1.5, 1.0), Err(Error::OutOfImage(_))));
    }

    #[test]
    fn parameter_validation() {
        assert!(ControllerSpec::antithetic(0.0, 1.0, 1.0).is_err());
        assert!(ControllerSpec::antithetic(1.0, -2.0, 1.0).is_err());
        assert!(ControllerSpec::exponential(1.0, 1.0, 0.0).is_err());
        assert!(ControllerSpec::logistic(1.0, 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn annihilation_rate_constructor() {
        // rate r = k eta: eta = r/k
        let spec = ControllerSpec::antithetic_from_annihilation_rate(0.5, 10.0, 1.0).unwrap();
        match spec.variant {
            ControllerVariant::Antithetic { k, eta } => {
                assert_eq!(k, 0.5);
                assert_relative_eq!(eta, 20.0, epsilon = 1e-14);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let cl = gene_expression_loop(1.0, 1.0, 1.0);
        let bad = DVector::from_vec(vec![0.0, 0.0, 0.0]);
        assert!(matches!(
            cl.rhs(&bad, 0.0),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
