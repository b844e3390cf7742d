//! Scalar abstraction: all numeric code in this crate is generic over a real
//! scalar type implementing [`Scalar`] (`f32` or `f64`).

use num_complex::Complex;

/// Real scalar usable by every algorithm in this crate.
///
/// Combines nalgebra's `RealField` (linear algebra, elementary functions)
/// with the handful of floating-point specifics the solvers need
/// (infinity, finiteness checks, literal conversion).
pub trait Scalar: nalgebra::RealField + num_traits::FromPrimitive + Copy {
    /// Positive infinity, used to encode unbounded stability margins.
    fn infinity() -> Self;

    fn is_finite(self) -> bool;

    fn is_nan(self) -> bool;

    /// Convert an `f64` literal (tolerances, table constants) into `Self`.
    fn lit(x: f64) -> Self;

    fn maxv(self, other: Self) -> Self {
        if self > other {
            self
        } else {
            other
        }
    }

    fn minv(self, other: Self) -> Self {
        if self < other {
            self
        } else {
            other
        }
    }
}

impl Scalar for f32 {
    fn infinity() -> Self {
        f32::INFINITY
    }
    fn is_finite(self) -> bool {
        f32::is_finite(self)
    }
    fn is_nan(self) -> bool {
        f32::is_nan(self)
    }
    fn lit(x: f64) -> Self {
        x as f32
    }
}

impl Scalar for f64 {
    fn infinity() -> Self {
        f64::INFINITY
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    fn is_nan(self) -> bool {
        f64::is_nan(self)
    }
    fn lit(x: f64) -> Self {
        x
    }
}

/// Modulus of a complex number over a generic scalar.
pub fn cmod<T: Scalar>(z: Complex<T>) -> T {
    (z.re * z.re + z.im * z.im).sqrt()
}
