//! Built-in example systems used by the test suites and the command-line
//! front-end: two-species gene expression, gene expression with protein
//! maturation, a strictly passive reaction network, the two-state worked
//! example, the reduced SIS epidemic model and gene expression with
//! repressed translation.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, RowDVector};

use crate::scalar::Scalar;
use crate::sysmodel::{AnalyticJacobians, LtiSystem, NonlinearSystem};

/// Identifiers of the built-in systems, in registry order.
pub const BUILTIN_IDS: [&str; 6] = [
    "example1",
    "gene_expression",
    "maturation",
    "sis",
    "repressed_translation",
    "spr_network",
];

/// Note attached to `example1` reports: the sign convention of `A[1][1]`.
pub const EXAMPLE1_NOTE: &str = "example1 uses A = [[-1, 0], [1, -1]]: the lower-right entry is \
taken as -1 so that the open-loop state matrix is Hurwitz stable; the variant with +1 in that \
position fails the stability prerequisite and is not provided";

/// Two-species gene expression: transcription drives `x1` (mRNA), which is
/// translated into `x2` (protein); the protein level is the output.
///
/// `x1' = -gamma1 x1 + u`, `x2' = k2 x1 - gamma2 x2`, `y = x2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeneExpression<T> {
    pub gamma1: T,
    pub gamma2: T,
    pub k2: T,
}

impl<T: Scalar> Default for GeneExpression<T> {
    fn default() -> Self {
        Self {
            gamma1: T::one(),
            gamma2: T::one(),
            k2: T::one(),
        }
    }
}

impl<T: Scalar> GeneExpression<T> {
    pub fn lti(&self) -> LtiSystem<T> {
        let a = DMatrix::from_row_slice(2, 2, &[-self.gamma1, T::zero(), self.k2, -self.gamma2]);
        let b = DVector::from_vec(vec![T::one(), T::zero()]);
        let c = RowDVector::from_vec(vec![T::zero(), T::one()]);
        LtiSystem::new(a, b, c).expect("consistent dimensions")
    }

    pub fn nonlinear(&self) -> NonlinearSystem<T> {
        NonlinearSystem::from_lti(&self.lti()).with_builtin_id("gene_expression")
    }
}

/// Gene expression with protein maturation: mRNA `x1`, protein `x2`,
/// maturated protein `x3` (the output). The transcription rate is the
/// control input; `k1` is its open-loop (basal) value and does not enter
/// the controlled system.
///
/// `x1' = u - gamma1 x1`, `x2' = k2 x1 - (gamma2 + k3) x2`,
/// `x3' = k3 x2 - gamma3 x3`, `y = x3`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Maturation<T> {
    pub k1: T,
    pub k2: T,
    pub k3: T,
    pub gamma1: T,
    pub gamma2: T,
    pub gamma3: T,
}

impl<T: Scalar> Default for Maturation<T> {
    fn default() -> Self {
        Self {
            k1: T::one(),
            k2: T::one(),
            k3: T::one(),
            gamma1: T::one(),
            gamma2: T::one(),
            gamma3: T::one(),
        }
    }
}

impl<T: Scalar> Maturation<T> {
    pub fn lti(&self) -> LtiSystem<T> {
        let z = T::zero();
        let a = DMatrix::from_row_slice(
            3,
            3,
            &[
                -self.gamma1,
                z,
                z,
                self.k2,
                -(self.gamma2 + self.k3),
                z,
                z,
                self.k3,
                -self.gamma3,
            ],
        );
        let b = DVector::from_vec(vec![T::one(), z, z]);
        let c = RowDVector::from_vec(vec![z, z, T::one()]);
        LtiSystem::new(a, b, c).expect("consistent dimensions")
    }
}

/// Two-species reaction network with mutual activation, strictly passive
/// when `gamma^2 > k1 k2`.
///
/// `A = [[-gamma, k1], [k2, -gamma]]`, `B = [0, 1]^T`, `C = [0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SprNetwork<T> {
    pub gamma: T,
    pub k1: T,
    pub k2: T,
}

impl<T: Scalar> Default for SprNetwork<T> {
    fn default() -> Self {
        Self {
            gamma: T::lit(2.0),
            k1: T::one(),
            k2: T::one(),
        }
    }
}

impl<T: Scalar> SprNetwork<T> {
    pub fn lti(&self) -> LtiSystem<T> {
        let a = DMatrix::from_row_slice(2, 2, &[-self.gamma, self.k1, self.k2, -self.gamma]);
        let b = DVector::from_vec(vec![T::zero(), T::one()]);
        let c = RowDVector::from_vec(vec![T::zero(), T::one()]);
        LtiSystem::new(a, b, c).expect("consistent dimensions")
    }
}

/// Two-state worked example with `A = [[-1, 0], [1, -1]]`, `B = [1, 0]^T`,
/// `C = [0, 1]`. See [`EXAMPLE1_NOTE`] for the sign convention of `A[1][1]`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Example1;

impl Example1 {
    pub fn lti<T: Scalar>(&self) -> LtiSystem<T> {
        let one = T::one();
        let a = DMatrix::from_row_slice(2, 2, &[-one, T::zero(), one, -one]);
        let b = DVector::from_vec(vec![one, T::zero()]);
        let c = RowDVector::from_vec(vec![T::zero(), one]);
        LtiSystem::new(a, b, c).expect("consistent dimensions")
    }
}

/// Reduced SIS epidemic model with controlled recovery rate: `x1` is the
/// susceptible population, `N - x1` the infectious one, and the recovery
/// rate is the control input.
///
/// `x1' = (N - x1)(u - beta x1)`, `y = x1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sis<T> {
    pub beta: T,
    pub n_total: T,
}

impl<T: Scalar> Default for Sis<T> {
    fn default() -> Self {
        Self {
            beta: T::one(),
            n_total: T::lit(100.0),
        }
    }
}

impl<T: Scalar> Sis<T> {
    pub fn nonlinear(&self) -> NonlinearSystem<T> {
        let (beta, n_total) = (self.beta, self.n_total);
        let f = Arc::new(move |x: &DVector<T>, u: T| {
            DVector::from_vec(vec![(n_total - x[0]) * (u - beta * x[0])])
        });
        let h = Arc::new(move |x: &DVector<T>| x[0]);
        let jac = AnalyticJacobians {
            fx: Arc::new(move |x: &DVector<T>, u: T| {
                DMatrix::from_row_slice(1, 1, &[-(u - beta * x[0]) - beta * (n_total - x[0])])
            }),
            fu: Arc::new(move |x: &DVector<T>, _| DVector::from_vec(vec![n_total - x[0]])),
            hx: Arc::new(move |_: &DVector<T>| RowDVector::from_vec(vec![T::one()])),
        };
        NonlinearSystem::new(1, f, h)
            .with_analytic_jacobians(jac)
            .with_positive_flag(true)
            .with_builtin_id("sis")
    }

    /// Newton seed for the steady-state map (interior branch `x1 = u/beta`).
    pub fn steady_state_seed(&self) -> DVector<T> {
        DVector::from_vec(vec![T::zero()])
    }

    /// Input range on which the interior branch stays below `N` and the
    /// steady-state map is strictly increasing.
    pub fn steady_state_u_range(&self) -> (T, T) {
        let top = self.beta * self.n_total;
        (T::lit(1e-3) * top, T::lit(0.9995) * top)
    }
}

/// Gene expression with repressed translation: the control input represses
/// the translation of mRNA `x1` into protein `x2` (the output), so the
/// steady-state gain is negative.
///
/// `x1' = -gamma1 x1 + k1`, `x2' = k2 x1 / (1 + u) - gamma2 x2`, `y = x2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RepressedTranslation<T> {
    pub k1: T,
    pub k2: T,
    pub gamma1: T,
    pub gamma2: T,
}

impl<T: Scalar> Default for RepressedTranslation<T> {
    fn default() -> Self {
        Self {
            k1: T::one(),
            k2: T::one(),
            gamma1: T::one(),
            gamma2: T::one(),
        }
    }
}

impl<T: Scalar> RepressedTranslation<T> {
    pub fn nonlinear(&self) -> NonlinearSystem<T> {
        let (k1, k2, g1, g2) = (self.k1, self.k2, self.gamma1, self.gamma2);
        let f = Arc::new(move |x: &DVector<T>, u: T| {
            DVector::from_vec(vec![
                -g1 * x[0] + k1,
                k2 * x[0] / (T::one() + u) - g2 * x[1],
            ])
        });
        let h = Arc::new(move |x: &DVector<T>| x[1]);
        let jac = AnalyticJacobians {
            fx: Arc::new(move |_: &DVector<T>, u: T| {
                DMatrix::from_row_slice(2, 2, &[-g1, T::zero(), k2 / (T::one() + u), -g2])
            }),
            fu: Arc::new(move |x: &DVector<T>, u: T| {
                let denom = (T::one() + u) * (T::one() + u);
                DVector::from_vec(vec![T::zero(), -k2 * x[0] / denom])
            }),
            hx: Arc::new(move |_: &DVector<T>| RowDVector::from_vec(vec![T::zero(), T::one()])),
        };
        NonlinearSystem::new(2, f, h)
            .with_analytic_jacobians(jac)
            .with_positive_flag(true)
            .with_builtin_id("repressed_translation")
    }

    pub fn steady_state_seed(&self) -> DVector<T> {
        DVector::from_vec(vec![T::one(), T::one()])
    }

    /// Input range for the steady-state map (`F` is decreasing on all of
    /// `u >= 0`; bracket expansion covers set-points outside this window).
    pub fn steady_state_u_range(&self) -> (T, T) {
        (T::lit(1e-2), T::lit(100.0))
    }
}
