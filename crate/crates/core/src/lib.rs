//! Analysis and simulation of integral control for positive dynamical
//! systems.
//!
//! The crate provides four nonnegative integral controller families
//! (antithetic, exponential, logistic and a standard integrator for
//! reference), models of linear and nonlinear positive plants, exact
//! stability-bound computations (`k_bar_inf`, `eta_bar_inf`,
//! `alpha_bar_inf`, `xi_bar_inf`) via stability-crossing analysis,
//! strict-positive-realness certificates, disturbance admissibility and
//! rejection checks, root loci, bifurcation sweeps and time-domain
//! simulation of the closed loops.
//!
//! All numerics are generic over the scalar type through [`Scalar`]
//! (`f32` or `f64`); the `*64` aliases below fix `f64`, which is what the
//! command-line front-end and the test suites use.

pub mod analysis;
pub mod builtins;
pub mod controllers;
pub mod error;
pub mod linalg;
pub mod poly;
pub mod scalar;
pub mod sim;
pub mod sysmodel;

pub use error::{Error, Result};
pub use scalar::Scalar;

// re-exported so downstream crates construct matrices with the same version
pub use nalgebra;

/// `f64` polynomial.
pub type Poly64 = poly::Polynomial<f64>;
/// `f64` linear state-space system.
pub type Lti64 = sysmodel::LtiSystem<f64>;
/// `f64` nonlinear system.
pub type Nonlinear64 = sysmodel::NonlinearSystem<f64>;
/// `f64` transfer function.
pub type Tf64 = sysmodel::TransferFunction<f64>;
/// `f64` controller specification.
pub type Controller64 = controllers::ControllerSpec<f64>;
/// `f64` closed loop.
pub type ClosedLoop64 = controllers::ClosedLoop<f64>;
/// `f64` simulation configuration.
pub type SimConfig64 = sim::SimConfig<f64>;
/// `f64` trajectory.
pub type Trajectory64 = sim::Trajectory<f64>;
