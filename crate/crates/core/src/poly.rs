//! Real-coefficient univariate polynomials: arithmetic, Horner evaluation,
//! companion-matrix root finding, Hurwitz testing and the decomposition of
//! `p(jw)` into real and imaginary parts.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Scalar;

/// Default absolute margin on root real parts for [`Polynomial::is_hurwitz`].
pub const HURWITZ_MARGIN: f64 = 1e-9;

/// Relative threshold below which leading coefficients are trimmed as zero.
const TRIM_REL: f64 = 1e-13;

/// Polynomial with real coefficients stored in ascending degree:
/// `coeffs[i]` multiplies `s^i`. The zero polynomial has no coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial<T> {
    coeffs: Vec<T>,
}

impl<T: Scalar> Polynomial<T> {
    /// Build a polynomial from ascending coefficients, trimming leading
    /// coefficients that are negligible relative to the largest one.
    pub fn new(coeffs: Vec<T>) -> Self {
        let mut p = Self { coeffs };
        p.trim();
        p
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(T::one())
    }

    pub fn constant(c: T) -> Self {
        Self::new(vec![c])
    }

    /// `c * s^degree`
    pub fn monomial(c: T, degree: usize) -> Self {
        let mut coeffs = vec![T::zero(); degree + 1];
        coeffs[degree] = c;
        Self::new(coeffs)
    }

    /// Monic polynomial with the given real roots.
    pub fn from_real_roots(roots: &[T]) -> Self {
        let mut p = Self::one();
        for &r in roots {
            p = &p * &Self::new(vec![-r, T::one()]);
        }
        p
    }

    fn trim(&mut self) {
        let max_abs = self
            .coeffs
            .iter()
            .fold(T::zero(), |acc, c| acc.maxv(c.abs()));
        if max_abs == T::zero() {
            self.coeffs.clear();
            return;
        }
        let tol = T::lit(TRIM_REL) * max_abs;
        while let Some(&last) = self.coeffs.last() {
            if last.abs() <= tol {
                self.coeffs.pop();
            } else {
                break;
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree after trimming; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// Coefficient of `s^i` (zero beyond the stored degree).
    pub fn coeff(&self, i: usize) -> T {
        self.coeffs.get(i).copied().unwrap_or_else(T::zero)
    }

    pub fn leading(&self) -> T {
        self.coeffs.last().copied().unwrap_or_else(T::zero)
    }

    pub fn scale(&self, factor: T) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * factor).collect())
    }

    /// Multiply by `s^k`.
    pub fn shift_up(&self, k: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![T::zero(); k];
        coeffs.extend_from_slice(&self.coeffs);
        Self::new(coeffs)
    }

    /// Horner evaluation at a real point.
    pub fn eval(&self, s: T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, &c| acc * s + c)
    }

    /// Horner evaluation at a complex point.
    pub fn eval_complex(&self, s: Complex<T>) -> Complex<T> {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex::new(T::zero(), T::zero()), |acc, &c| {
                acc * s + Complex::new(c, T::zero())
            })
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::zero();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| c * T::lit(i as f64))
            .collect();
        Self::new(coeffs)
    }

    /// All complex roots, counting multiplicity, as eigenvalues of the
    /// balanced companion matrix of the monic normalization.
    pub fn roots(&self) -> Result<Vec<Complex<T>>> {
        if self.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        let n = self.coeffs.len() - 1;
        if n == 0 {
            return Err(Error::DegreeZero);
        }
        let lead = self.leading();
        let monic: Vec<T> = self.coeffs[..n].iter().map(|&c| c / lead).collect();
        let comp = linalg::companion(&monic);
        linalg::eigenvalues(&comp)
    }

    /// True iff every root satisfies `Re < -margin`.
    pub fn is_hurwitz_with_margin(&self, margin: T) -> Result<bool> {
        let roots = self.roots()?;
        Ok(roots.iter().all(|z| z.re < -margin))
    }

    /// Hurwitz test with the default margin of `1e-9`.
    pub fn is_hurwitz(&self) -> Result<bool> {
        self.is_hurwitz_with_margin(T::lit(HURWITZ_MARGIN))
    }

    /// Decompose `p(jw)` as `real_part(w) + j imag_part(w)` with both parts
    /// real polynomials in `w`.
    pub fn jomega_split(&self) -> JOmegaSplit<T> {
        let n = self.coeffs.len();
        let mut re = vec![T::zero(); n];
        let mut im = vec![T::zero(); n];
        for (k, &c) in self.coeffs.iter().enumerate() {
            match k % 4 {
                0 => re[k] = c,
                1 => im[k] = c,
                2 => re[k] = -c,
                _ => im[k] = -c,
            }
        }
        JOmegaSplit {
            real_part: Polynomial::new(re),
            imag_part: Polynomial::new(im),
        }
    }

    /// Positive real roots, filtered from the complex root set. A root
    /// counts as positive real when `|Im| < 1e-7 (1 + |Re|)` and
    /// `Re > 1e-9`.
    pub fn positive_real_roots(&self) -> Result<Vec<T>> {
        let roots = self.roots()?;
        let mut out: Vec<T> = roots
            .iter()
            .filter(|z| z.im.abs() < T::lit(1e-7) * (T::one() + z.re.abs()) && z.re > T::lit(1e-9))
            .map(|z| z.re)
            .collect();
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(out)
    }
}

/// Real/imaginary decomposition of a polynomial evaluated on the imaginary
/// axis: `p(jw) = real_part(w) + j imag_part(w)`.
#[derive(Clone, Debug, PartialEq)]
pub struct JOmegaSplit<T> {
    pub real_part: Polynomial<T>,
    pub imag_part: Polynomial<T>,
}

impl<T: Scalar> Add for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn add(self, rhs: &Polynomial<T>) -> Polynomial<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect();
        Polynomial::new(coeffs)
    }
}

impl<T: Scalar> Sub for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn sub(self, rhs: &Polynomial<T>) -> Polynomial<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect();
        Polynomial::new(coeffs)
    }
}

impl<T: Scalar> Mul for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn mul(self, rhs: &Polynomial<T>) -> Polynomial<T> {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut coeffs = vec![T::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Polynomial::new(coeffs)
    }
}

impl<T: Scalar> Neg for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn neg(self) -> Polynomial<T> {
        Polynomial::new(self.coeffs.iter().map(|&c| -c).collect())
    }
}

impl<T: Scalar + fmt::Display> fmt::Display for Polynomial<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| match i {
                0 => format!("{c}"),
                1 => format!("{c}*s"),
                _ => format!("{c}*s^{i}"),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}
