//! Real scalar abstraction shared by every numeric module.
//!
//! All algebra in this crate is written over `Complex<T>` with `T: Real`.
//! The trait is implemented for `f32` and `f64`; each implementation carries
//! the default tolerances that make sense at that precision.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Complex scalar over a real field `T`.
pub type C<T> = Complex<T>;

pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + std::fmt::LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Absolute tolerance for idempotency, Hermiticity and commutation checks.
    const PROJECTOR_TOL: f64;
    /// Relative tolerance for constancy of restricted operator norms.
    const NORM_REL_TOL: f64;
    /// Increments `P_k M` shorter than this are treated as absent.
    const DEGENERATE: f64;
    /// Coefficients with modulus below this are dropped from sparse storage.
    const ZERO_DROP: f64;

    /// Converts an `f64` literal. Panics only if the value is not representable,
    /// which cannot happen for the finite literals used in this crate.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize fits in a float")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    const PROJECTOR_TOL: f64 = 1e-10;
    const NORM_REL_TOL: f64 = 1e-9;
    const DEGENERATE: f64 = 1e-12;
    const ZERO_DROP: f64 = 1e-300;
}

impl Real for f32 {
    const PROJECTOR_TOL: f64 = 1e-4;
    const NORM_REL_TOL: f64 = 1e-4;
    const DEGENERATE: f64 = 1e-6;
    const ZERO_DROP: f64 = 1e-37;
}

#[inline]
pub(crate) fn cplx<T: Real>(re: T) -> C<T> {
    Complex::new(re, T::zero())
}

/// `n!` as a real number.
pub fn factorial<T: Real>(n: usize) -> T {
    (1..=n).fold(T::one(), |acc, k| acc * T::from_usize_lossy(k))
}

/// Binomial coefficient `C(n, k)` as a real number (0 when `k > n`).
pub fn binomial<T: Real>(n: usize, k: usize) -> T {
    if k > n {
        return T::zero();
    }
    let k = k.min(n - k);
    let mut acc = T::one();
    for i in 0..k {
        acc = acc * T::from_usize_lossy(n - i) / T::from_usize_lossy(i + 1);
    }
    acc.round()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials_and_factorials() {
        assert_eq!(binomial::<f64>(4, 2), 6.0);
        assert_eq!(binomial::<f64>(6, 0), 1.0);
        assert_eq!(binomial::<f64>(2, 3), 0.0);
        assert_eq!(factorial::<f64>(0), 1.0);
        assert_eq!(factorial::<f32>(5), 120.0);
    }
}
