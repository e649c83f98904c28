//! Floating-point scalar abstraction.
//!
//! All numerical code in this crate is generic over [`Real`], so the same
//! routines run in `f32` or `f64`. Tolerances that depend on the working
//! precision live here as trait methods; the `f64` values are the ones the
//! crate's documented guarantees refer to, the `f32` values are scaled
//! analogues.

use std::fmt;
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + NumAssign + Sum + fmt::Debug + fmt::Display + Send + Sync + 'static
{
    /// Absolute tolerance for validating Hermiticity, positivity and unit trace.
    fn validation_tol() -> Self;

    /// Absolute tolerance for unit-norm state vectors.
    fn norm_tol() -> Self;

    /// Off-diagonal convergence threshold of the Jacobi eigensolver,
    /// relative to the matrix scale.
    fn eig_tol() -> Self;

    /// Probability floor below which an event probability is treated as zero.
    fn prob_floor() -> Self;

    /// Largest argument for which `exp` is finite.
    fn exp_overflow() -> Self;
}

impl Real for f64 {
    fn validation_tol() -> Self {
        1e-10
    }
    fn norm_tol() -> Self {
        1e-12
    }
    fn eig_tol() -> Self {
        1e-14
    }
    fn prob_floor() -> Self {
        1e-300
    }
    fn exp_overflow() -> Self {
        700.0
    }
}

impl Real for f32 {
    fn validation_tol() -> Self {
        1e-4
    }
    fn norm_tol() -> Self {
        1e-5
    }
    fn eig_tol() -> Self {
        1e-6
    }
    fn prob_floor() -> Self {
        1e-35
    }
    fn exp_overflow() -> Self {
        85.0
    }
}

/// Converts an `f64` constant into the working scalar type.
#[inline]
pub fn real<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 constant converts to any Real type")
}

/// Converts the working scalar into `f64` for diagnostics and serialization.
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
