//! Scalar abstraction: every numeric routine in this crate is generic over a
//! floating-point type so the same code runs in `f32` or `f64` precision.

use std::fmt::{Debug, Display};

use num_traits::Float;

/// Floating-point scalar usable throughout the crate.
///
/// Implemented for `f32` and `f64`. The bound set is what the numeric
/// pipeline actually needs: IEEE float operations, formatting for reports,
/// and thread-safety for parallel grid scans.
pub trait Real: Float + Debug + Display + Send + Sync + 'static {
    /// Lossless-enough conversion from an `f64` literal or precomputed
    /// constant. Panics only if the target type cannot represent any
    /// approximation of the value, which cannot happen for finite constants
    /// in `f32`/`f64`.
    fn from_f64(x: f64) -> Self {
        <Self as num_traits::NumCast>::from(x).expect("finite constant must convert")
    }

    /// Conversion from an unsigned count (pair counts can exceed 2^53; the
    /// nearest representable value is the correct statistical input).
    fn from_u64(n: u64) -> Self {
        <Self as num_traits::NumCast>::from(n).expect("count must convert")
    }

    /// Round-trip into `f64` for interop with integer samplers.
    fn as_f64(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).expect("scalar is a real number")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Shorthand used internally for embedding `f64` constants in generic code.
pub(crate) fn real<T: Real>(x: f64) -> T {
    T::from_f64(x)
}
