//! Floating point abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::str::FromStr;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar type the solver is generic over (`f32` or `f64`).
///
/// The `faer::traits::RealField` bound lets the sparse direct solver factor
/// matrices of this type.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + LowerExp
    + FromStr
    + Default
    + Send
    + Sync
    + 'static
    + faer::traits::RealField
{
    /// Lossy conversion from `f64`, used for literal constants.
    fn lit(v: f64) -> Self;

    fn of_usize(n: usize) -> Self {
        <Self as Scalar>::lit(n as f64)
    }

    fn to_f64_lossy(self) -> f64;
}

impl Scalar for f64 {
    #[inline]
    fn lit(v: f64) -> Self {
        v
    }
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self
    }
}

impl Scalar for f32 {
    #[inline]
    fn lit(v: f64) -> Self {
        v as f32
    }
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self as f64
    }
}

/// Positive part `max{x, 0}`.
#[inline]
pub fn pos<T: Scalar>(x: T) -> T {
    if x > T::zero() {
        x
    } else {
        T::zero()
    }
}

/// Negative part `min{x, 0}`.
#[inline]
pub fn neg<T: Scalar>(x: T) -> T {
    if x < T::zero() {
        x
    } else {
        T::zero()
    }
}

#[inline]
pub(crate) fn max3<T: Scalar>(a: T, b: T, c: T) -> T {
    let m = if a > b { a } else { b };
    if m > c {
        m
    } else {
        c
    }
}
