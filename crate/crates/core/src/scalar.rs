//! Scalar abstraction shared by every geometric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point type the algorithms are generic over (`f32` or `f64`).
///
/// Besides the arithmetic, each implementation carries the two tolerances the
/// geometry relies on: a snapping tolerance for intersection predicates
/// (applied to coordinates normalized by the problem diameter) and a
/// verification tolerance for metric identities.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Sum
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Relative snap tolerance for intersection predicates.
    fn snap_tol() -> Self;
    /// Relative tolerance used when checking metric identities.
    fn check_tol() -> Self;

    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn snap_tol() -> Self {
        1e-12
    }
    fn check_tol() -> Self {
        1e-9
    }
}

impl Scalar for f32 {
    fn snap_tol() -> Self {
        1e-6
    }
    fn check_tol() -> Self {
        1e-4
    }
}

/// Total order on scalars for sorting; NaN compares equal to everything.
#[inline]
pub(crate) fn cmp<T: Scalar>(a: &T, b: &T) -> std::cmp::Ordering {
    a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal)
}
