//! Stability machinery: eigenvalue verdicts, the `M(k)` gain matrix, the
//! stability-crossing computations behind the supremal parameter bounds
//! (`k_bar_inf`, `eta_bar_inf`, `alpha_bar_inf`, `xi_bar_inf`), strict
//! positive realness, disturbance admissibility and rejection, nonlinear
//! plant bounds, root loci and bifurcation sweeps.
//!
//! The crossing method looks for gains at which the closed-loop
//! characteristic polynomial acquires a pair of imaginary-axis roots.
//! A one-parameter pencil `P(s, l) = P0(s) + l P1(s)` has a root at
//! `s = j w` iff both the real and imaginary parts vanish, which reduces
//! to a polynomial root search in `w` followed by a division for the
//! critical gain `l`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::controllers::{
    ClosedLoop, ControllerSpec, Disturbance, DisturbanceChannel, EquilibriumLabel,
};
use crate::error::{Error, Result};
use crate::linalg;
use crate::poly::Polynomial;
use crate::scalar::Scalar;
use crate::sysmodel::{steady_state_map, LtiSystem, Monotonicity, NonlinearSystem};

/// Absolute margin on eigenvalue real parts separating the three verdicts.
pub const STABILITY_MARGIN: f64 = 1e-9;

/// Relative threshold certifying singularity of the bordered
/// disturbance-rejection matrix.
const REJECTION_SINGULARITY_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classification {
    Stable,
    Marginal,
    Unstable,
}

/// Spectrum of a Jacobian together with its stability classification.
#[derive(Clone, Debug, PartialEq)]
pub struct StabilityVerdict<T> {
    pub max_real_part: T,
    pub classification: Classification,
    pub eigenvalues: Vec<Complex<T>>,
}

impl<T: Scalar> StabilityVerdict<T> {
    pub fn is_stable(&self) -> bool {
        self.classification == Classification::Stable
    }
}

/// Classify the spectrum of a square matrix with margin `1e-9`.
pub fn local_stability<T: Scalar>(jac: &DMatrix<T>) -> Result<StabilityVerdict<T>> {
    if jac.nrows() != jac.ncols() {
        return Err(Error::DimensionMismatch {
            expected: jac.nrows(),
            got: jac.ncols(),
        });
    }
    let eigenvalues = linalg::eigenvalues(jac)?;
    let max_real_part = linalg::max_real_part(&eigenvalues);
    let margin = T::lit(STABILITY_MARGIN);
    let classification = if max_real_part < -margin {
        Classification::Stable
    } else if max_real_part > margin {
        Classification::Unstable
    } else {
        Classification::Marginal
    };
    Ok(StabilityVerdict {
        max_real_part,
        classification,
        eigenvalues,
    })
}

/// The `(n+1) x (n+1)` gain matrix `[[A, B kappa], [-C, 0]]`, the
/// closed-loop matrix of the plant under a standard integrator with gain
/// `kappa` and the strong-binding limit of the antithetic loop.
/// `sign_flip` builds `[[A, B kappa], [C, 0]]` for negative-gain plants.
pub fn m_matrix<T: Scalar>(sys: &LtiSystem<T>, kappa: T, sign_flip: bool) -> DMatrix<T> {
    let n = sys.n();
    let mut m = DMatrix::zeros(n + 1, n + 1);
    m.view_mut((0, 0), (n, n)).copy_from(sys.a());
    for i in 0..n {
        m[(i, n)] = sys.b()[i] * kappa;
        m[(n, i)] = if sign_flip { sys.c()[i] } else { -sys.c()[i] };
    }
    m
}

/// Stability verdict of the strong-binding (infinite coupling) limit: the
/// spectrum of `M(k)`.
pub fn strong_binding_verdict<T: Scalar>(sys: &LtiSystem<T>, k: T) -> Result<StabilityVerdict<T>> {
    local_stability(&m_matrix(sys, k, false))
}

/// An imaginary-axis crossing: frequency and the gain at which it occurs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Crossing<T> {
    pub omega: T,
    pub gain: T,
}

/// Result of a stability-crossing computation: the supremal gain (infinite
/// when no crossing exists) and the validated crossings sorted by gain.
#[derive(Clone, Debug, PartialEq)]
pub struct CrossingBound<T> {
    pub value: T,
    pub crossings: Vec<Crossing<T>>,
}

impl<T: Scalar> CrossingBound<T> {
    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
    }

    /// Frequency attaining the bound, when finite.
    pub fn binding_omega(&self) -> Option<T> {
        self.crossings.first().map(|c| c.omega)
    }
}

/// Magnitude bound `sum |c_i| |w|^i` used for relative tolerances.
fn magnitude_bound<T: Scalar>(p: &Polynomial<T>, w: T) -> T {
    let aw = w.abs();
    let mut pow = T::one();
    let mut acc = T::zero();
    for &c in p.coeffs() {
        acc += c.abs() * pow;
        pow *= aw;
    }
    acc
}

/// Positive crossings of the pencil `P0(s) + l P1(s)`: pairs `(w, l)` with
/// `w, l > 0` and `P0(jw) + l P1(jw) = 0`.
fn pencil_crossings<T: Scalar>(
    p0: &Polynomial<T>,
    p1: &Polynomial<T>,
) -> Result<Vec<Crossing<T>>> {
    let s0 = p0.jomega_split();
    let s1 = p1.jomega_split();
    let det = &(&s1.real_part * &s0.imag_part) - &(&s0.real_part * &s1.imag_part);
    let Some(deg) = det.degree() else {
        return Ok(Vec::new());
    };
    if deg == 0 {
        return Ok(Vec::new());
    }
    let mut crossings = Vec::new();
    for omega in det.positive_real_roots()? {
        let d_re = s1.real_part.eval(omega);
        let d_im = s1.imag_part.eval(omega);
        let denom_scale =
            T::one() + magnitude_bound(&s1.real_part, omega) + magnitude_bound(&s1.imag_part, omega);
        if d_re.abs().maxv(d_im.abs()) <= T::lit(1e-10) * denom_scale {
            log::debug!("discarding spurious crossing candidate: P1(jw) ~ 0 at w = {omega:?}");
            continue;
        }
        let n_re = s0.real_part.eval(omega);
        let n_im = s0.imag_part.eval(omega);
        let gain = if d_re.abs() >= d_im.abs() {
            -n_re / d_re
        } else {
            -n_im / d_im
        };
        if gain <= T::zero() {
            continue;
        }
        // confirm the candidate actually zeroes the pencil at jw
        let res_re = n_re + gain * d_re;
        let res_im = n_im + gain * d_im;
        let scale = T::one()
            + magnitude_bound(&s0.real_part, omega)
            + magnitude_bound(&s0.imag_part, omega)
            + gain * denom_scale;
        if (res_re * res_re + res_im * res_im).sqrt() >= T::lit(1e-6) * scale {
            log::debug!("discarding unconfirmed crossing candidate at w = {omega:?}");
            continue;
        }
        crossings.push(Crossing { omega, gain });
    }
    crossings.sort_by(|a, b| a.gain.partial_cmp(&b.gain).unwrap());
    Ok(crossings)
}

/// Supremal integrator gain `k_bar_inf`: the smallest `k > 0` at which the
/// characteristic polynomial `P(s, k) = s D(s) + k N(s)` of `M(k)` gains
/// imaginary-axis roots; infinite when no crossing exists.
pub fn k_bar_inf<T: Scalar>(sys: &LtiSystem<T>) -> Result<CrossingBound<T>> {
    sys.require_assumption1()?;
    let tf = sys.transfer_function();
    let p0 = tf.den.shift_up(1);
    let crossings = pencil_crossings(&p0, &tf.num)?;
    let bound = finish_bound(crossings);
    if bound.value.is_finite() {
        validate_gain_boundary(sys, bound.value, false);
    }
    Ok(bound)
}

fn finish_bound<T: Scalar>(crossings: Vec<Crossing<T>>) -> CrossingBound<T> {
    match crossings.first() {
        Some(first) => CrossingBound {
            value: first.gain,
            crossings,
        },
        None => CrossingBound {
            value: T::infinity(),
            crossings,
        },
    }
}

/// Eigenvalue sanity check on a computed gain boundary: `M(0.99 k)` should
/// be Hurwitz and `M(1.01 k)` should not.
fn validate_gain_boundary<T: Scalar>(sys: &LtiSystem<T>, k: T, sign_flip: bool) {
    let below = local_stability(&m_matrix(sys, T::lit(0.99) * k, sign_flip));
    let above = local_stability(&m_matrix(sys, T::lit(1.01) * k, sign_flip));
    match (below, above) {
        (Ok(b), Ok(a)) => {
            if !b.is_stable() || a.is_stable() {
                log::warn!("crossing bound failed the eigenvalue boundary check");
            }
        }
        _ => log::warn!("eigenvalue boundary check did not converge"),
    }
}

/// Supremal coupling `eta_bar_inf = g^2 k_bar_inf / mu_bar` for set-points
/// `mu` up to `mu_bar`.
pub fn eta_bar_inf<T: Scalar>(sys: &LtiSystem<T>, mu_bar: T) -> Result<T> {
    if mu_bar <= T::zero() {
        return Err(Error::InvalidParameter("mu_bar must be positive".into()));
    }
    let g = sys.require_assumption1()?;
    Ok(g * g * k_bar_inf(sys)?.value / mu_bar)
}

/// Strict-positive-realness certificate.
#[derive(Clone, Debug, PartialEq)]
pub struct SprReport<T> {
    pub spr: bool,
    /// A frequency with `Re[G(jw)] <= 0`, when one exists.
    pub witness: Option<T>,
}

/// Frequency-domain strict-positive-realness test:
/// `Re[G(jw)] > 0` for all `w >= 0` and `lim w^2 Re[G(jw)] > 0`.
///
/// Works on the polynomial `R(w) = N_R D_R + N_I D_I = Re[G(jw)] |D(jw)|^2`:
/// positivity at `w = 0`, no positive real root of odd multiplicity, and
/// the relative-degree-one tail condition `deg R = 2n - 2` with positive
/// leading coefficient.
pub fn spr_test<T: Scalar>(sys: &LtiSystem<T>) -> Result<SprReport<T>> {
    sys.require_assumption1()?;
    let tf = sys.transfer_function();
    let n = tf.den.degree().unwrap_or(0);
    let ns = tf.num.jomega_split();
    let ds = tf.den.jomega_split();
    let r = &(&ns.real_part * &ds.real_part) + &(&ns.imag_part * &ds.imag_part);

    if r.eval(T::zero()) <= T::zero() {
        return Ok(SprReport {
            spr: false,
            witness: Some(T::zero()),
        });
    }

    // odd-multiplicity positive roots flip the sign of Re[G(jw)]
    let mut sign_change_at = None;
    if r.degree().unwrap_or(0) >= 1 {
        let positive_roots = r.positive_real_roots()?;
        let clusters = cluster_roots(&positive_roots);
        for (root, multiplicity) in &clusters {
            if multiplicity % 2 == 1 {
                sign_change_at = Some(*root);
                break;
            }
        }
    }
    if let Some(w) = sign_change_at {
        return Ok(SprReport {
            spr: false,
            witness: Some(w),
        });
    }

    // tail: w^2 Re[G(jw)] -> R_{2n-2} requires deg R = 2n - 2, positive
    let tail_ok = n >= 1
        && r.degree() == Some(2 * n - 2)
        && r.leading() > T::zero();
    Ok(SprReport {
        spr: tail_ok,
        witness: None,
    })
}

/// Group nearby values (radius `1e-6 (1 + |v|)`) and report cluster sizes
/// as multiplicity estimates.
fn cluster_roots<T: Scalar>(sorted: &[T]) -> Vec<(T, usize)> {
    let mut out: Vec<(T, usize)> = Vec::new();
    for &v in sorted {
        match out.last_mut() {
            Some((rep, count)) if (v - *rep).abs() <= T::lit(1e-6) * (T::one() + rep.abs()) => {
                *count += 1;
            }
            _ => out.push((v, 1)),
        }
    }
    out
}

/// Supremal exponential rate `alpha_bar_inf(mu)`: smallest `alpha > 0` at
/// which `s D(s) + alpha mu N_n(s)` gains imaginary-axis roots, with
/// `H_n = N_n/D` the unity-DC-gain transfer function; infinite when the
/// crossing set is empty.
pub fn alpha_bar_inf<T: Scalar>(sys: &LtiSystem<T>, mu: T) -> Result<CrossingBound<T>> {
    if mu <= T::zero() {
        return Err(Error::InvalidParameter("mu must be positive".into()));
    }
    sys.require_assumption1()?;
    let hn = sys.normalized_transfer()?;
    let p0 = hn.den.shift_up(1);
    let p1 = hn.num.scale(mu);
    let crossings = pencil_crossings(&p0, &p1)?;
    let bound = finish_bound(crossings);
    if bound.value.is_finite() {
        validate_rate_boundary(sys, mu, bound.value);
    }
    Ok(bound)
}

/// Closed-loop matrix of the exponential controller's positive equilibrium
/// at unit gain: `[[A, B], [-alpha mu C / g, 0]]`. Its spectrum is
/// independent of the controller gain `k` (diagonal similarity in the
/// controller coordinate).
pub fn exponential_loop_matrix<T: Scalar>(sys: &LtiSystem<T>, mu: T, alpha: T) -> Result<DMatrix<T>> {
    let g = sys.require_assumption1()?;
    let n = sys.n();
    let mut m = DMatrix::zeros(n + 1, n + 1);
    m.view_mut((0, 0), (n, n)).copy_from(sys.a());
    for i in 0..n {
        m[(i, n)] = sys.b()[i];
        m[(n, i)] = -alpha * mu * sys.c()[i] / g;
    }
    Ok(m)
}

fn validate_rate_boundary<T: Scalar>(sys: &LtiSystem<T>, mu: T, alpha: T) {
    let check = |factor: f64| -> Option<bool> {
        let m = exponential_loop_matrix(sys, mu, T::lit(factor) * alpha).ok()?;
        Some(local_stability(&m).ok()?.is_stable())
    };
    match (check(0.99), check(1.01)) {
        (Some(true), Some(false)) => {}
        _ => log::warn!("rate bound failed the eigenvalue boundary check"),
    }
}

/// Supremal logistic rate-gain product `xi_bar_inf = 4 alpha_bar_inf mu /
/// (g beta)`, the threshold on `k alpha` for the logistic positive
/// equilibrium.
pub fn xi_bar_inf<T: Scalar>(sys: &LtiSystem<T>, mu: T, beta: T) -> Result<T> {
    if beta <= T::zero() {
        return Err(Error::InvalidParameter("beta must be positive".into()));
    }
    let g = sys.require_assumption1()?;
    let alpha = alpha_bar_inf(sys, mu)?.value;
    Ok(T::lit(4.0) * alpha * mu / (g * beta))
}

/// Admissibility of a constant disturbance: `mu + C A^{-1} E d > 0`.
pub fn disturbance_admissible<T: Scalar>(sys: &LtiSystem<T>, d: T, mu: T) -> Result<bool> {
    Ok(mu + sys.ca_inv_e()? * d > T::zero())
}

/// Disturbed exponential-rate bound
/// `alpha_bar_d = mu / (mu + C A^{-1} E d) alpha_bar_inf >= alpha_bar_inf`.
pub fn alpha_bar_disturbed<T: Scalar>(sys: &LtiSystem<T>, mu: T, d: T) -> Result<T> {
    let shift = sys.ca_inv_e()? * d;
    if mu + shift <= T::zero() {
        return Err(Error::InadmissibleDisturbance);
    }
    Ok(mu / (mu + shift) * alpha_bar_inf(sys, mu)?.value)
}

/// Outcome of the constant-disturbance rejection test.
#[derive(Clone, Debug, PartialEq)]
pub struct RejectionReport<T> {
    pub rejects: bool,
    /// Smallest singular value of the bordered matrix, relative to the
    /// largest; near-zero certifies a transmission zero at zero frequency.
    pub singularity_residual: T,
}

/// Zero-DC-gain test from disturbance to output: borders the closed-loop
/// Jacobian at the disturbed equilibrium with the disturbance input column
/// and the output row, and reports near-singularity. Rejection holds for
/// plant-input disturbances; it fails when the disturbance acts on the
/// controller dynamics instead.
pub fn rejection_check<T: Scalar>(
    sys: &LtiSystem<T>,
    controller: &ControllerSpec<T>,
    d: T,
    channel: DisturbanceChannel,
) -> Result<RejectionReport<T>> {
    if d < T::zero() {
        return Err(Error::InvalidParameter(
            "disturbance magnitude must be nonnegative".into(),
        ));
    }
    if !disturbance_admissible(sys, d, controller.mu)? {
        return Err(Error::InadmissibleDisturbance);
    }
    let cl = ClosedLoop::linear(sys.clone(), *controller)?.with_disturbance(Disturbance {
        channel,
        magnitude: d,
    })?;
    let eqs = cl.equilibria()?;
    let eq = eqs
        .iter()
        .find(|e| e.label == EquilibriumLabel::Positive)
        .ok_or_else(|| Error::EquilibriumOutOfRange("no tracking equilibrium".into()))?;
    let jac = cl.jacobian(eq)?;
    let dim = jac.nrows();
    let n = sys.n();

    // [[J, col], [C 0..0, 0]] with col the disturbance injection direction
    let mut bordered = DMatrix::zeros(dim + 1, dim + 1);
    bordered.view_mut((0, 0), (dim, dim)).copy_from(&jac);
    match channel {
        DisturbanceChannel::PlantInput => {
            let e = sys
                .e()
                .ok_or_else(|| Error::InvalidParameter("system has no E direction".into()))?;
            for i in 0..n {
                bordered[(i, dim)] = e[i];
            }
        }
        DisturbanceChannel::ControllerState => {
            bordered[(dim - 1, dim)] = T::one();
        }
    }
    for i in 0..n {
        bordered[(dim, i)] = sys.c()[i];
    }
    let (smin, smax) = linalg::singular_extrema(&bordered)?;
    let singularity_residual = if smax > T::zero() { smin / smax } else { T::zero() };
    Ok(RejectionReport {
        rejects: singularity_residual < T::lit(REJECTION_SINGULARITY_TOL),
        singularity_residual,
    })
}

/// Sign of the plant's local steady-state gain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GainSign {
    Positive,
    Negative,
}

/// Supremal antithetic gain for a nonlinear plant at set-point `mu`.
#[derive(Clone, Debug, PartialEq)]
pub struct NonlinearGainBound<T> {
    pub value: T,
    pub crossings: Vec<Crossing<T>>,
    pub sign: GainSign,
}

/// Crossing bound on the linearization of a nonlinear plant at the
/// equilibrium associated with set-point `mu`. The local gain sign is
/// detected from the monotonicity of the steady-state map; negative-gain
/// plants use the sign-flipped gain matrix, equivalently the linearization
/// with the output row negated.
pub fn k_bar_nonlinear<T: Scalar>(
    sys: &NonlinearSystem<T>,
    mu: T,
    u_range: (T, T),
    seed: &DVector<T>,
) -> Result<NonlinearGainBound<T>> {
    let map = steady_state_map(sys, u_range, seed)?;
    let u_star = map.invert(mu)?;
    let x_star = map.state(u_star)?;
    let lin = sys.linearize(&x_star, u_star)?;
    let (sign, effective) = match map.direction() {
        Monotonicity::Increasing => (GainSign::Positive, lin),
        Monotonicity::Decreasing => {
            let flipped = LtiSystem::new(lin.a().clone(), lin.b().clone(), -lin.c().clone())?;
            (GainSign::Negative, flipped)
        }
    };
    let bound = k_bar_inf(&effective)?;
    Ok(NonlinearGainBound {
        value: bound.value,
        crossings: bound.crossings,
        sign,
    })
}

/// Root-locus data over a one-parameter sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct LocusData<T> {
    pub parameter_grid: Vec<T>,
    /// All closed-loop roots at each grid point (unordered across points).
    pub branches: Vec<Vec<Complex<T>>>,
    /// Real-axis intersection of the single asymptote, from the pole/zero
    /// sums of the locus polynomials.
    pub asymptote_centroid: T,
}

impl<T: Scalar> LocusData<T> {
    /// Largest real part over every branch and grid point.
    pub fn max_real_part(&self) -> T {
        self.branches
            .iter()
            .flat_map(|roots| roots.iter().map(|z| z.re))
            .fold(-T::infinity(), |acc, re| acc.maxv(re))
    }
}

fn root_sum<T: Scalar>(p: &Polynomial<T>) -> T {
    match p.degree() {
        Some(d) if d >= 1 => -p.coeff(d - 1) / p.coeff(d),
        _ => T::zero(),
    }
}

/// Root locus of the antithetic loop in the coupling parameter: for each
/// `eta` in the grid the roots of
/// `F(s, theta) = s (s + g k) D(s) + theta (k N(s) + s D(s))` with
/// `theta = mu eta / g`. The asymptote centroid equals `C A^{-1} B k`.
pub fn root_locus<T: Scalar>(
    sys: &LtiSystem<T>,
    k: T,
    eta_grid: &[T],
    mu: T,
) -> Result<LocusData<T>> {
    let g = sys.require_assumption1()?;
    let tf = sys.transfer_function();
    let s = Polynomial::monomial(T::one(), 1);
    let poles = &(&s * &Polynomial::new(vec![g * k, T::one()])) * &tf.den;
    let zeros = &tf.num.scale(k) + &tf.den.shift_up(1);
    let centroid = root_sum(&poles) - root_sum(&zeros);
    let mut branches = Vec::with_capacity(eta_grid.len());
    for &eta in eta_grid {
        if eta <= T::zero() {
            return Err(Error::InvalidParameter("eta grid must be positive".into()));
        }
        let theta = mu * eta / g;
        let locus_poly = &poles + &zeros.scale(theta);
        branches.push(locus_poly.roots()?);
    }
    Ok(LocusData {
        parameter_grid: eta_grid.to_vec(),
        branches,
        asymptote_centroid: centroid,
    })
}

/// Dual root locus in the gain: for each `k` in the grid the roots of
/// `F(s, k) = (s + theta) s D(s) + k (g s D(s) + theta N(s))` at fixed
/// `theta = mu eta / g`.
pub fn root_locus_gain_sweep<T: Scalar>(
    sys: &LtiSystem<T>,
    eta: T,
    k_grid: &[T],
    mu: T,
) -> Result<LocusData<T>> {
    let g = sys.require_assumption1()?;
    if eta <= T::zero() {
        return Err(Error::InvalidParameter("eta must be positive".into()));
    }
    let theta = mu * eta / g;
    let tf = sys.transfer_function();
    let s = Polynomial::monomial(T::one(), 1);
    let poles = &(&s * &Polynomial::new(vec![theta, T::one()])) * &tf.den;
    let zeros = &tf.den.shift_up(1).scale(g) + &tf.num.scale(theta);
    let centroid = root_sum(&poles) - root_sum(&zeros);
    let mut branches = Vec::with_capacity(k_grid.len());
    for &k in k_grid {
        if k <= T::zero() {
            return Err(Error::InvalidParameter("k grid must be positive".into()));
        }
        let locus_poly = &poles + &zeros.scale(k);
        branches.push(locus_poly.roots()?);
    }
    Ok(LocusData {
        parameter_grid: k_grid.to_vec(),
        branches,
        asymptote_centroid: centroid,
    })
}

/// Per-cell stability verdicts of the antithetic loop over a `(k, eta)`
/// grid. Cells are independent; `verdicts[i][j]` corresponds to
/// `(k_grid[i], eta_grid[j])`.
#[derive(Clone, Debug)]
pub struct BifurcationGrid<T> {
    pub k_grid: Vec<T>,
    pub eta_grid: Vec<T>,
    pub verdicts: Vec<Vec<StabilityVerdict<T>>>,
}

impl<T: Scalar> BifurcationGrid<T> {
    /// For each `k`, the coupling at which `max Re` changes sign along the
    /// `eta` axis (linear interpolation), `None` when no sign change.
    pub fn boundary_eta(&self) -> Vec<Option<T>> {
        self.verdicts
            .iter()
            .map(|row| {
                row.windows(2).enumerate().find_map(|(j, w)| {
                    let (a, b) = (w[0].max_real_part, w[1].max_real_part);
                    if a < T::zero() && b >= T::zero() {
                        let frac = -a / (b - a);
                        Some(self.eta_grid[j] + frac * (self.eta_grid[j + 1] - self.eta_grid[j]))
                    } else {
                        None
                    }
                })
            })
            .collect()
    }
}

/// Classify the antithetic closed loop on every `(k, eta)` cell at
/// set-point `mu`.
pub fn bifurcation_sweep<T: Scalar>(
    sys: &LtiSystem<T>,
    k_grid: &[T],
    eta_grid: &[T],
    mu: T,
) -> Result<BifurcationGrid<T>> {
    let mut verdicts = Vec::with_capacity(k_grid.len());
    for &k in k_grid {
        let mut row = Vec::with_capacity(eta_grid.len());
        for &eta in eta_grid {
            let cl = ClosedLoop::linear(sys.clone(), ControllerSpec::antithetic(k, eta, mu)?)?;
            let eq = cl.equilibria()?;
            let jac = cl.jacobian(&eq[0])?;
            row.push(local_stability(&jac)?);
        }
        verdicts.push(row);
    }
    Ok(BifurcationGrid {
        k_grid: k_grid.to_vec(),
        eta_grid: eta_grid.to_vec(),
        verdicts,
    })
}

/// Bisection on the eigenvalue verdict of the antithetic closed loop:
/// the gain threshold `k_bar(mu, eta)` with stability below and
/// instability above. Requires a bracketing interval.
pub fn antithetic_k_threshold<T: Scalar>(
    sys: &LtiSystem<T>,
    eta: T,
    mu: T,
    k_lo: T,
    k_hi: T,
) -> Result<T> {
    let stable_at = |k: T| -> Result<bool> {
        let cl = ClosedLoop::linear(sys.clone(), ControllerSpec::antithetic(k, eta, mu)?)?;
        let eq = cl.equilibria()?;
        Ok(local_stability(&cl.jacobian(&eq[0])?)?.is_stable())
    };
    if !stable_at(k_lo)? || stable_at(k_hi)? {
        return Err(Error::InvalidParameter(
            "bisection bracket must be stable at k_lo and unstable at k_hi".into(),
        ));
    }
    let (mut lo, mut hi) = (k_lo, k_hi);
    for _ in 0..100 {
        let mid = (lo + hi) * T::lit(0.5);
        if stable_at(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= T::lit(1e-12) * (T::one() + lo.abs()) {
            break;
        }
    }
    Ok((lo + hi) * T::lit(0.5))
}

/// Full bounds record for a linear plant: all four supremal parameters,
/// the crossing frequencies of the gain bound and the SPR flag.
#[derive(Clone, Debug, PartialEq)]
pub struct StabilityBounds<T> {
    pub k_bar_inf: T,
    pub eta_bar_inf: T,
    pub alpha_bar_inf: T,
    pub xi_bar_inf: T,
    pub crossing_frequencies: Vec<T>,
    pub spr: bool,
    pub dc_gain: T,
}

/// Compute every bound at once: `eta_bar_inf` for set-points up to
/// `mu_bar`, `alpha_bar_inf` at `mu`, `xi_bar_inf` at `(mu, beta)`.
pub fn stability_bounds<T: Scalar>(
    sys: &LtiSystem<T>,
    mu: T,
    mu_bar: T,
    beta: T,
) -> Result<StabilityBounds<T>> {
    let g = sys.require_assumption1()?;
    let k_bound = k_bar_inf(sys)?;
    let eta = g * g * k_bound.value / mu_bar;
    let alpha_bound = alpha_bar_inf(sys, mu)?;
    let xi = T::lit(4.0) * alpha_bound.value * mu / (g * beta);
    let spr = spr_test(sys)?;
    Ok(StabilityBounds {
        k_bar_inf: k_bound.value,
        eta_bar_inf: eta,
        alpha_bar_inf: alpha_bound.value,
        xi_bar_inf: xi,
        crossing_frequencies: k_bound.crossings.iter().map(|c| c.omega).collect(),
        spr: spr.spr,
        dc_gain: g,
    })
}
