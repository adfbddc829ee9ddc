//! Scalar abstraction so the geometry stack works at either precision.

use std::fmt;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, NumCast};

/// Floating-point scalar the geometric types are generic over: `f32` or `f64`.
///
/// Automatically implemented for every type that satisfies the bounds.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + NumCast
    + NumAssign
    + fmt::Debug
    + fmt::Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from `f64`, for constants and thresholds.
    #[inline]
    fn from_f64_lossy(v: f64) -> Self {
        <Self as NumCast>::from(v).expect("finite f64 converts to any float scalar")
    }

    /// Widening (or identity) conversion to `f64`.
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        <f64 as NumCast>::from(self).expect("float scalar converts to f64")
    }
}

impl<T> Scalar for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + NumCast
        + NumAssign
        + fmt::Debug
        + fmt::Display
        + Default
        + Send
        + Sync
        + 'static
{
}
