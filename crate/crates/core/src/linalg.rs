//! Small dense linear-algebra helpers shared by the polynomial and analysis
//! code: eigenvalue extraction via the real Schur form, matrix balancing and
//! the companion matrix of a monic polynomial.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// All eigenvalues of a real square matrix, computed from its Schur form.
///
/// The matrix is balanced first; balancing is a diagonal similarity and does
/// not change the spectrum.
pub fn eigenvalues<T: Scalar>(m: &DMatrix<T>) -> Result<Vec<Complex<T>>> {
    if m.is_empty() {
        return Ok(Vec::new());
    }
    let balanced = balance(m.clone());
    let schur = nalgebra::linalg::Schur::try_new(balanced, T::default_epsilon(), 100_000)
        .ok_or(Error::EigenFailure)?;
    let eig = schur.complex_eigenvalues();
    let values: Vec<Complex<T>> = eig.iter().copied().collect();
    if values.iter().any(|z| z.re.is_nan() || z.im.is_nan()) {
        return Err(Error::EigenFailure);
    }
    Ok(values)
}

/// Largest real part over the spectrum.
pub fn max_real_part<T: Scalar>(eigs: &[Complex<T>]) -> T {
    eigs.iter()
        .map(|z| z.re)
        .fold(-T::infinity(), |acc, re| acc.maxv(re))
}

/// Balance a matrix by diagonal similarity with powers of two, so that row
/// and column norms are of comparable magnitude (Parlett–Reinsch). Improves
/// eigenvalue accuracy for matrices with badly scaled entries, e.g. companion
/// matrices of polynomials with a wide coefficient spread.
pub fn balance<T: Scalar>(mut m: DMatrix<T>) -> DMatrix<T> {
    let n = m.nrows();
    let radix = T::lit(2.0);
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut row_norm = T::zero();
            let mut col_norm = T::zero();
            for j in 0..n {
                if j != i {
                    row_norm += m[(i, j)].abs();
                    col_norm += m[(j, i)].abs();
                }
            }
            if row_norm == T::zero() || col_norm == T::zero() {
                continue;
            }
            let mut factor = T::one();
            let mut c = col_norm;
            let target = row_norm / radix;
            while c < target {
                factor *= radix;
                c *= radix * radix;
            }
            let target = row_norm * radix;
            while c > target {
                factor /= radix;
                c /= radix * radix;
            }
            if factor != T::one() {
                done = false;
                let inv = T::one() / factor;
                for j in 0..n {
                    m[(i, j)] *= inv;
                }
                for j in 0..n {
                    m[(j, i)] *= factor;
                }
            }
        }
    }
    m
}

/// Companion matrix of a monic polynomial given by its low-order coefficients
/// `c[0] + c[1] s + ... + c[n-1] s^(n-1) + s^n`.
pub fn companion<T: Scalar>(monic_low_coeffs: &[T]) -> DMatrix<T> {
    let n = monic_low_coeffs.len();
    let mut m = DMatrix::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = T::one();
    }
    for (i, &c) in monic_low_coeffs.iter().enumerate() {
        m[(i, n - 1)] = -c;
    }
    m
}

/// Solve `A x = b` by LU with partial pivoting.
pub fn solve<T: Scalar>(a: &DMatrix<T>, b: &DVector<T>) -> Result<DVector<T>> {
    a.clone().lu().solve(b).ok_or(Error::SingularA)
}

/// Smallest singular value of a square matrix, relative to its largest.
/// Returns `(sigma_min, sigma_max)`.
pub fn singular_extrema<T: Scalar>(m: &DMatrix<T>) -> Result<(T, T)> {
    let svd = m.clone().svd(false, false);
    let mut smin = T::infinity();
    let mut smax = T::zero();
    for s in svd.singular_values.iter() {
        smin = smin.minv(*s);
        smax = smax.maxv(*s);
    }
    if smax.is_nan() || smin.is_nan() {
        return Err(Error::EigenFailure);
    }
    Ok((smin, smax))
}
