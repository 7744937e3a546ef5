//! Scalar abstraction: the geometry and metric code is generic over the
//! floating-point type; `f64` is what the pipeline and CLI use.

use num_traits::{Float, FromPrimitive};

/// Floating point scalar: f32 or f64.
pub trait Real:
    Float
    + FromPrimitive
    + core::iter::Sum
    + core::fmt::Debug
    + core::fmt::Display
    + core::fmt::LowerExp
    + Send
    + Sync
    + 'static
{
    fn from_f64_lossy(v: f64) -> Self;
    fn to_f64_lossy(self) -> f64;
}

impl Real for f32 {
    fn from_f64_lossy(v: f64) -> Self {
        v as f32
    }
    fn to_f64_lossy(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    fn from_f64_lossy(v: f64) -> Self {
        v
    }
    fn to_f64_lossy(self) -> f64 {
        self
    }
}

/// Shorthand for pulling an `f64` literal into the generic scalar type.
pub fn lit<S: Real>(v: f64) -> S {
    S::from_f64_lossy(v)
}
