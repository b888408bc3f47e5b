//! Scalar abstraction for the simulation kernels.
//!
//! All numerical code is generic over a real scalar `T` so the same kernels
//! run in single or double precision. The crate root exposes concrete `f64`
//! and `f32` aliases for the common instantiations.

use nalgebra::RealField;
use num_traits::ToPrimitive;

/// Real scalar usable as the base field of the simulation.
///
/// This is a blanket trait: anything that is a copyable [`RealField`] with a
/// lossy conversion to `f64` qualifies, which covers `f32` and `f64`.
pub trait Real: RealField + Copy + ToPrimitive {}

impl<T: RealField + Copy + ToPrimitive> Real for T {}

/// Converts an `f64` constant into the working scalar type.
#[inline]
pub fn real<T: Real>(x: f64) -> T {
    nalgebra::convert(x)
}

/// Converts a working scalar back to `f64` (used for reporting and I/O).
#[inline]
pub fn as_f64<T: Real>(x: T) -> f64 {
    x.to_f64().expect("scalar must be representable as f64")
}
