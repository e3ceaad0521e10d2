//! Scalar abstraction for the numeric core.
//!
//! All solver and kernel code is generic over [`Float`], so the same
//! routines run in `f32` or `f64`. The CLI and the benchmark harness use
//! `f64` throughout.

use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Floating-point scalar usable by the solvers.
pub trait Float:
    num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + Sum
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Shorthand conversion from an `f64` literal.
    fn real(v: f64) -> Self {
        <Self as num_traits::FromPrimitive>::from_f64(v).expect("finite literal")
    }

    fn to_f64_lossy(self) -> f64 {
        <Self as num_traits::ToPrimitive>::to_f64(&self).expect("finite value")
    }
}

impl Float for f32 {}
impl Float for f64 {}
