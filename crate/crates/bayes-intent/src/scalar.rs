//! Scalar abstraction: the numeric code is generic over `f32`/`f64`.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_traits::float::FloatConst;
use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar the library's math is written against.
///
/// `Debug` formatting of `f32`/`f64` is the shortest decimal that parses
/// back to the same bits, which is what the text serializers rely on.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + FromStr
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
}

impl<T> Scalar for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + ToPrimitive
        + FromStr
        + Debug
        + Display
        + Default
        + Send
        + Sync
        + 'static
{
}

/// Converts an `f64` constant into the working scalar type.
#[inline]
pub fn cast<S: Scalar>(x: f64) -> S {
    S::from_f64(x).expect("f64 constant must be representable in the scalar type")
}
