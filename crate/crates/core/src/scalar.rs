//! Scalar abstraction for the numeric core.
//!
//! Everything downstream (Hermitian algebra, geometric means, the conic
//! solver) is generic over a real scalar type implementing [`Real`].
//! In practice `f64` is the type you want; `f32` exists mostly for
//! experiments and will not reach the default solver tolerances.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, NumAssignOps};

/// Real scalar trait for all numeric kernels.
pub trait Real:
    Float + FloatConst + NumAssignOps + Sum + Debug + Display + LowerExp + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal (tolerances, step fractions...).
    fn of(v: f64) -> Self;
    /// Conversion to `f64` for reporting.
    fn to_f64(self) -> f64;
}

impl Real for f64 {
    #[inline]
    fn of(v: f64) -> Self {
        v
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self
    }
}

impl Real for f32 {
    #[inline]
    fn of(v: f64) -> Self {
        v as f32
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self as f64
    }
}

/// Base-2 logarithm used by every divergence in this crate.
#[inline]
pub fn log2<T: Real>(x: T) -> T {
    x.log2()
}
