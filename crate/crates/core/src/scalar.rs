//! Scalar abstraction: all geometry in this crate is generic over a
//! floating-point type implementing [`Real`].

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar used throughout the crate. Implemented for `f32`
/// and `f64`; default tolerances assume `f64` and are widened automatically
/// for lower-precision types via [`Real::tol`].
pub trait Real:
    Float
    + FloatConst
    + NumAssign
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Shorthand for `from_f64(x).unwrap()`.
    fn real(x: f64) -> Self {
        Self::from_f64(x).expect("f64 constant not representable in scalar type")
    }

    /// A tolerance that is `x` at f64 precision but never tighter than the
    /// type can resolve (floor of 64 ulps around 1).
    fn tol(x: f64) -> Self {
        let floor = Self::epsilon() * Self::real(64.0);
        Self::real(x).max(floor)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Free-function form of [`Real::real`], convenient at call sites.
#[inline]
pub fn real<T: Real>(x: f64) -> T {
    T::real(x)
}
