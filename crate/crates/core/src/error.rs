use thiserror::Error;

/// Errors produced by the analysis, modelling and simulation routines.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("the zero polynomial has no roots")]
    ZeroPolynomial,
    #[error("constant polynomial of degree zero has no roots")]
    DegreeZero,
    #[error("eigenvalue iteration failed to converge")]
    EigenFailure,
    #[error("state matrix A is singular")]
    SingularA,
    #[error("system has zero DC gain")]
    ZeroDcGain,
    #[error("Jacobian evaluation produced a non-finite entry")]
    NonFiniteJacobian,
    #[error("steady-state output map is not strictly monotonic over the sampled range")]
    NonMonotone,
    #[error("Newton iteration diverged while solving for the equilibrium state")]
    NewtonDiverged,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("assumption violated: {0}")]
    AssumptionViolated(String),
    #[error("requested equilibrium does not exist: {0}")]
    EquilibriumOutOfRange(String),
    #[error("disturbance magnitude is outside the admissible set")]
    InadmissibleDisturbance,
    #[error("controller state {0} lies outside the regularizer image interval")]
    OutOfImage(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unsupported plant/controller combination: {0}")]
    Unsupported(String),
    #[error("integration step size underflowed at t = {0}")]
    StepSizeUnderflow(f64),
    #[error("integration produced a non-finite state at t = {0}")]
    NonFiniteState(f64),
    #[error("bracket expansion failed while inverting the steady-state map")]
    BracketFailure,
}

pub type Result<T> = std::result::Result<T, Error>;
