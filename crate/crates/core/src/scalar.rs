//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar type the spectral and mesh routines are generic over.
///
/// Implemented for `f32` and `f64`. Tolerances throughout the crate are
/// expressed as `f64` literals and converted with [`Scalar::lit`].
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into this scalar type.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Relative machine precision, used to size rounding slack.
    fn eps() -> Self {
        <Self as Float>::epsilon()
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// `true` when `a` and `b` agree to relative tolerance `rel`, measured
/// against the larger magnitude (absolute `rel` near zero).
pub fn approx_eq<T: Scalar>(a: T, b: T, rel: T) -> bool {
    let scale = a.abs().max(b.abs()).max(T::one());
    (a - b).abs() <= rel * scale
}
