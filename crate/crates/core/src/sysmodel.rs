//! Plant models: linear state-space systems with positivity metadata,
//! nonlinear systems with analytic or finite-difference Jacobians,
//! transfer-function extraction and steady-state input/output maps.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, RowDVector};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg;
use crate::poly::Polynomial;
use crate::scalar::Scalar;

/// SISO linear system `x' = A x + B u (+ E d), y = C x`.
#[derive(Clone, Debug, PartialEq)]
pub struct LtiSystem<T: Scalar> {
    a: DMatrix<T>,
    b: DVector<T>,
    c: RowDVector<T>,
    e: Option<DVector<T>>,
}

/// Result of checking that `A` is Hurwitz stable with nonzero DC gain.
#[derive(Clone, Debug, PartialEq)]
pub struct Assumption1Report<T> {
    pub hurwitz: bool,
    /// `g = -C A^{-1} B`; `None` when `A` is singular.
    pub dc_gain: Option<T>,
}

impl<T: Scalar> LtiSystem<T> {
    pub fn new(a: DMatrix<T>, b: DVector<T>, c: RowDVector<T>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: a.ncols(),
            });
        }
        if b.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: b.len(),
            });
        }
        if c.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: c.len(),
            });
        }
        Ok(Self { a, b, c, e: None })
    }

    /// Attach a disturbance input direction `E` (defaults to zero).
    pub fn with_disturbance(mut self, e: DVector<T>) -> Result<Self> {
        if e.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: e.len(),
            });
        }
        self.e = Some(e);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn a(&self) -> &DMatrix<T> {
        &self.a
    }

    pub fn b(&self) -> &DVector<T> {
        &self.b
    }

    pub fn c(&self) -> &RowDVector<T> {
        &self.c
    }

    pub fn e(&self) -> Option<&DVector<T>> {
        self.e.as_ref()
    }

    pub fn e_or_zero(&self) -> DVector<T> {
        self.e.clone().unwrap_or_else(|| DVector::zeros(self.n()))
    }

    pub fn output(&self, x: &DVector<T>) -> T {
        (&self.c * x)[0]
    }

    /// True iff `A` is Metzler and `B`, `C`, `E` are elementwise nonnegative.
    pub fn is_internally_positive(&self) -> bool {
        let n = self.n();
        for i in 0..n {
            for j in 0..n {
                if i != j && self.a[(i, j)] < T::zero() {
                    return false;
                }
            }
        }
        if self.b.iter().any(|&v| v < T::zero()) || self.c.iter().any(|&v| v < T::zero()) {
            return false;
        }
        if let Some(e) = &self.e {
            if e.iter().any(|&v| v < T::zero()) {
                return false;
            }
        }
        true
    }

    pub fn eigenvalues(&self) -> Result<Vec<Complex<T>>> {
        linalg::eigenvalues(&self.a)
    }

    pub fn a_is_hurwitz(&self) -> Result<bool> {
        let eigs = self.eigenvalues()?;
        Ok(linalg::max_real_part(&eigs) < -T::lit(crate::poly::HURWITZ_MARGIN))
    }

    /// DC gain `g = -C A^{-1} B`.
    pub fn dc_gain(&self) -> Result<T> {
        let x = linalg::solve(&self.a, &self.b)?;
        Ok(-(&self.c * x)[0])
    }

    /// `C A^{-1} E` (zero when no disturbance direction is set).
    pub fn ca_inv_e(&self) -> Result<T> {
        match &self.e {
            None => Ok(T::zero()),
            Some(e) => {
                let x = linalg::solve(&self.a, e)?;
                Ok((&self.c * x)[0])
            }
        }
    }

    pub fn check_assumption1(&self) -> Result<Assumption1Report<T>> {
        let hurwitz = self.a_is_hurwitz()?;
        let dc_gain = match self.dc_gain() {
            Ok(g) => Some(g),
            Err(Error::SingularA) => None,
            Err(e) => return Err(e),
        };
        Ok(Assumption1Report { hurwitz, dc_gain })
    }

    /// DC gain, with an error unless `A` is Hurwitz and the gain nonzero.
    pub fn require_assumption1(&self) -> Result<T> {
        let report = self.check_assumption1()?;
        if !report.hurwitz {
            return Err(Error::AssumptionViolated(
                "state matrix A is not Hurwitz stable".into(),
            ));
        }
        match report.dc_gain {
            Some(g) if g != T::zero() => Ok(g),
            Some(_) => Err(Error::AssumptionViolated("DC gain C A^-1 B is zero".into())),
            None => Err(Error::SingularA),
        }
    }

    /// Transfer function `G(s) = C (sI - A)^{-1} B = N(s)/D(s)` with `D`
    /// the monic characteristic polynomial of `A`, via the
    /// Faddeev–LeVerrier recursion.
    pub fn transfer_function(&self) -> TransferFunction<T> {
        let n = self.n();
        let mut den_desc = vec![T::one()];
        let mut num_desc = Vec::with_capacity(n);
        let mut m = DMatrix::<T>::identity(n, n);
        for k in 1..=n {
            num_desc.push((&self.c * &m * &self.b)[0]);
            let am = &self.a * &m;
            let ck = -am.trace() / T::lit(k as f64);
            den_desc.push(ck);
            m = am + DMatrix::from_diagonal_element(n, n, ck);
        }
        den_desc.reverse();
        num_desc.reverse();
        TransferFunction {
            num: Polynomial::new(num_desc),
            den: Polynomial::new(den_desc),
        }
    }

    /// Transfer function scaled so that the DC value is one:
    /// `H_n(s) = N_n(s)/D(s)` with `N_n := N * D(0)/N(0)`.
    pub fn normalized_transfer(&self) -> Result<TransferFunction<T>> {
        let tf = self.transfer_function();
        let n0 = tf.num.eval(T::zero());
        let d0 = tf.den.eval(T::zero());
        if d0 == T::zero() {
            return Err(Error::SingularA);
        }
        if n0 == T::zero() {
            return Err(Error::ZeroDcGain);
        }
        Ok(TransferFunction {
            num: tf.num.scale(d0 / n0),
            den: tf.den,
        })
    }
}

/// Rational transfer function `N(s)/D(s)`, strictly proper by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct TransferFunction<T> {
    pub num: Polynomial<T>,
    pub den: Polynomial<T>,
}

impl<T: Scalar> TransferFunction<T> {
    pub fn eval(&self, s: Complex<T>) -> Complex<T> {
        self.num.eval_complex(s) / self.den.eval_complex(s)
    }

    pub fn relative_degree(&self) -> Option<usize> {
        match (self.den.degree(), self.num.degree()) {
            (Some(d), Some(n)) => d.checked_sub(n),
            (Some(d), None) => Some(d + 1),
            _ => None,
        }
    }
}

type DynamicsFn<T> = Arc<dyn Fn(&DVector<T>, T) -> DVector<T> + Send + Sync>;
type OutputFn<T> = Arc<dyn Fn(&DVector<T>) -> T + Send + Sync>;
type StateJacFn<T> = Arc<dyn Fn(&DVector<T>, T) -> DMatrix<T> + Send + Sync>;
type InputJacFn<T> = Arc<dyn Fn(&DVector<T>, T) -> DVector<T> + Send + Sync>;
type OutputJacFn<T> = Arc<dyn Fn(&DVector<T>) -> RowDVector<T> + Send + Sync>;

/// Analytic Jacobian callbacks for a [`NonlinearSystem`].
#[derive(Clone)]
pub struct AnalyticJacobians<T> {
    pub fx: StateJacFn<T>,
    pub fu: InputJacFn<T>,
    pub hx: OutputJacFn<T>,
}

/// Nonlinear SISO system `x' = f(x, u), y = h(x)` on the nonnegative
/// orthant. Positivity is a validated flag, not inferred: the defining
/// condition (`f_i(x, u) >= 0` whenever `x_i = 0`) is not decidable for a
/// black-box `f`, so built-in systems carry proven flags and user-supplied
/// systems declare their own.
#[derive(Clone)]
pub struct NonlinearSystem<T> {
    dim: usize,
    f: DynamicsFn<T>,
    h: OutputFn<T>,
    jacobians: Option<AnalyticJacobians<T>>,
    internally_positive: bool,
    builtin_id: Option<String>,
}

impl<T: Scalar> NonlinearSystem<T> {
    pub fn new(dim: usize, f: DynamicsFn<T>, h: OutputFn<T>) -> Self {
        Self {
            dim,
            f,
            h,
            jacobians: None,
            internally_positive: false,
            builtin_id: None,
        }
    }

    pub fn with_analytic_jacobians(mut self, jac: AnalyticJacobians<T>) -> Self {
        self.jacobians = Some(jac);
        self
    }

    /// Declare the system internally positive (caller-proven).
    pub fn with_positive_flag(mut self, positive: bool) -> Self {
        self.internally_positive = positive;
        self
    }

    pub fn with_builtin_id(mut self, id: &str) -> Self {
        self.builtin_id = Some(id.to_string());
        self
    }

    /// Drop analytic Jacobians, forcing finite-difference linearization.
    pub fn without_analytic_jacobians(mut self) -> Self {
        self.jacobians = None;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_internally_positive(&self) -> bool {
        self.internally_positive
    }

    pub fn builtin_id(&self) -> Option<&str> {
        self.builtin_id.as_deref()
    }

    pub fn f(&self, x: &DVector<T>, u: T) -> DVector<T> {
        (self.f)(x, u)
    }

    pub fn h(&self, x: &DVector<T>) -> T {
        (self.h)(x)
    }

    /// Wrap a linear system as a nonlinear one (analytic Jacobians attached).
    pub fn from_lti(sys: &LtiSystem<T>) -> Self {
        let a = sys.a().clone();
        let b = sys.b().clone();
        let c = sys.c().clone();
        let af = a.clone();
        let bf = b.clone();
        let cf = c.clone();
        let positive = sys.is_internally_positive();
        Self::new(
            sys.n(),
            Arc::new(move |x, u| &af * x + &bf * u),
            Arc::new(move |x| (&cf * x)[0]),
        )
        .with_analytic_jacobians(AnalyticJacobians {
            fx: Arc::new(move |_, _| a.clone()),
            fu: Arc::new(move |_, _| b.clone()),
            hx: Arc::new(move |_| c.clone()),
        })
        .with_positive_flag(positive)
    }

    /// Jacobian linearization at `(x_star, u_star)`: analytic when the
    /// system carries callbacks, central finite differences otherwise
    /// (step `1e-6 * max(1, |x_i|)`).
    pub fn linearize(&self, x_star: &DVector<T>, u_star: T) -> Result<LtiSystem<T>> {
        let n = self.dim;
        if x_star.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: x_star.len(),
            });
        }
        let (a, b, c) = match &self.jacobians {
            Some(jac) => (
                (jac.fx)(x_star, u_star),
                (jac.fu)(x_star, u_star),
                (jac.hx)(x_star),
            ),
            None => self.fd_jacobians(x_star, u_star),
        };
        if a.iter().any(|v| !v.is_finite())
            || b.iter().any(|v| !v.is_finite())
            || c.iter().any(|v| !v.is_finite())
        {
            return Err(Error::NonFiniteJacobian);
        }
        LtiSystem::new(a, b, c)
    }

    fn fd_jacobians(&self, x: &DVector<T>, u: T) -> (DMatrix<T>, DVector<T>, RowDVector<T>) {
        let n = self.dim;
        let base = T::lit(1e-6);
        let mut a = DMatrix::zeros(n, n);
        let mut c = RowDVector::zeros(n);
        for i in 0..n {
            let step = base.maxv(base * x[i].abs());
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += step;
            xm[i] -= step;
            let fp = self.f(&xp, u);
            let fm = self.f(&xm, u);
            let two_h = step + step;
            for r in 0..n {
                a[(r, i)] = (fp[r] - fm[r]) / two_h;
            }
            c[i] = (self.h(&xp) - self.h(&xm)) / two_h;
        }
        let step = base.maxv(base * u.abs());
        let fp = self.f(x, u + step);
        let fm = self.f(x, u - step);
        let b = (fp - fm) / (step + step);
        (a, b, c)
    }
}

/// Direction of the steady-state input/output map.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Monotonicity {
    Increasing,
    Decreasing,
}

/// Steady-state map of a nonlinear system over an input interval:
/// `state(u)` solves `f(x, u) = 0` by damped Newton, `output(u)` is
/// `F(u) = h(state(u))`, and `invert` is the bisection inverse of the
/// monotone `F`.
pub struct SteadyStateMap<'a, T: Scalar> {
    sys: &'a NonlinearSystem<T>,
    u_range: (T, T),
    seed: DVector<T>,
    direction: Monotonicity,
}

const NEWTON_TOL: f64 = 1e-10;
const NEWTON_MAX_ITER: usize = 100;
const MONOTONICITY_SAMPLES: usize = 17;

/// Build the steady-state map, detecting the monotonicity direction by
/// sampling `F` over the range.
pub fn steady_state_map<'a, T: Scalar>(
    sys: &'a NonlinearSystem<T>,
    u_range: (T, T),
    seed: &DVector<T>,
) -> Result<SteadyStateMap<'a, T>> {
    if u_range.1 <= u_range.0 {
        return Err(Error::InvalidParameter("empty input range".into()));
    }
    let map = SteadyStateMap {
        sys,
        u_range,
        seed: seed.clone(),
        direction: Monotonicity::Increasing,
    };
    let mut values = Vec::with_capacity(MONOTONICITY_SAMPLES);
    let width = u_range.1 - u_range.0;
    for i in 0..MONOTONICITY_SAMPLES {
        let frac = T::lit(i as f64 / (MONOTONICITY_SAMPLES - 1) as f64);
        values.push(map.output(u_range.0 + width * frac)?);
    }
    let increasing = values.windows(2).all(|w| w[1] > w[0]);
    let decreasing = values.windows(2).all(|w| w[1] < w[0]);
    let direction = match (increasing, decreasing) {
        (true, _) => Monotonicity::Increasing,
        (_, true) => Monotonicity::Decreasing,
        _ => return Err(Error::NonMonotone),
    };
    Ok(SteadyStateMap { direction, ..map })
}

impl<'a, T: Scalar> SteadyStateMap<'a, T> {
    pub fn direction(&self) -> Monotonicity {
        self.direction
    }

    /// Equilibrium state `g(u)` by damped Newton from the seed.
    pub fn state(&self, u: T) -> Result<DVector<T>> {
        let mut x = self.seed.clone();
        let tol = T::lit(NEWTON_TOL);
        for _ in 0..NEWTON_MAX_ITER {
            let fx = self.sys.f(&x, u);
            let res = fx.amax();
            if !res.is_finite() {
                return Err(Error::NewtonDiverged);
            }
            if res < tol {
                return Ok(x);
            }
            let lin = self.sys.linearize(&x, u)?;
            let step = linalg::solve(lin.a(), &(-&fx)).map_err(|_| Error::NewtonDiverged)?;
            let mut lambda = T::one();
            let mut accepted = false;
            for _ in 0..30 {
                let candidate = &x + &step * lambda;
                let cres = self.sys.f(&candidate, u).amax();
                if cres.is_finite() && cres < res {
                    x = candidate;
                    accepted = true;
                    break;
                }
                lambda *= T::lit(0.5);
            }
            if !accepted {
                return Err(Error::NewtonDiverged);
            }
        }
        Err(Error::NewtonDiverged)
    }

    /// Equilibrium output `F(u) = h(g(u))`.
    pub fn output(&self, u: T) -> Result<T> {
        Ok(self.sys.h(&self.state(u)?))
    }

    /// `F^{-1}(mu)` by bracketed bisection, expanding the bracket beyond
    /// the nominal range when needed.
    pub fn invert(&self, mu: T) -> Result<T> {
        let (mut lo, mut hi) = self.u_range;
        let sign = match self.direction {
            Monotonicity::Increasing => T::one(),
            Monotonicity::Decreasing => -T::one(),
        };
        // r(u) = sign * (F(u) - mu) is increasing in u
        let mut rlo = sign * (self.output(lo)? - mu);
        let mut rhi = sign * (self.output(hi)? - mu);
        let mut expansions = 0;
        while rlo > T::zero() && expansions < 60 {
            let width = hi - lo;
            lo -= width;
            rlo = sign * (self.output(lo)? - mu);
            expansions += 1;
        }
        while rhi < T::zero() && expansions < 60 {
            let width = hi - lo;
            hi += width;
            rhi = sign * (self.output(hi)? - mu);
            expansions += 1;
        }
        if rlo > T::zero() || rhi < T::zero() {
            return Err(Error::BracketFailure);
        }
        let tol = T::lit(1e-10);
        for _ in 0..200 {
            let mid = (lo + hi) * T::lit(0.5);
            if hi - lo <= tol {
                return Ok(mid);
            }
            let rm = sign * (self.output(mid)? - mu);
            if rm < T::zero() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok((lo + hi) * T::lit(0.5))
    }
}
