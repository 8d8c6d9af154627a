//! Floating-point abstraction for the whole crate.

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar every module is generic over.
///
/// Implemented for `f32` and `f64`. The bound set is deliberately small:
/// [`Float`] supplies the arithmetic and transcendentals, [`FromPrimitive`]
/// lets the crate inject exact `f64` constants (gamma-approximation
/// coefficients, π, dB factors) into the working precision.
pub trait Scalar:
    Float + FromPrimitive + std::fmt::Debug + std::fmt::Display + Send + Sync + 'static
{
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Converts an `f64` constant into the working scalar type.
///
/// Panics only if the target type cannot represent ordinary finite values,
/// which no `Float` implementor of interest exhibits.
#[inline]
pub(crate) fn lit<T: Scalar>(value: f64) -> T {
    T::from_f64(value).expect("f64 constant must convert into the scalar type")
}

/// π in the working precision.
#[inline]
pub(crate) fn pi<T: Scalar>() -> T {
    lit(std::f64::consts::PI)
}

/// `|v|^e` — the power-law kernel used throughout.
///
/// IEEE semantics make `0⁰ = 1`, so the damping product `μ|v|^{n−1}·v`
/// degenerates to `μ·v` at `n = 1` without a special case and is exactly
/// zero at `v = 0` for every `n ≥ 1`.
#[inline]
pub(crate) fn pow_abs<T: Scalar>(v: T, e: T) -> T {
    v.abs().powf(e)
}
