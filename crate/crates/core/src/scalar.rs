//! Floating-point abstraction the whole crate is generic over.
//!
//! Every numeric structure (matrices, densities, integrators, controllers)
//! takes a [`Scalar`] type parameter. `f64` is the intended default and is
//! what the concrete aliases at the crate root use; `f32` is available for
//! memory-bound parameter sweeps where reduced precision is acceptable.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use rand::Rng;
use rand_distr::StandardNormal;

/// Real scalar type: `f32` or `f64`.
///
/// Beyond the arithmetic bounds this adds two things generic numerical code
/// cannot get from `num-traits` alone: width-appropriate tolerances for
/// structural validation, and sampling hooks so integrators can draw
/// variates without threading distribution types through every signature.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Panics only if the value is not
    /// representable, which never happens for the constants used here.
    #[inline]
    fn real(x: f64) -> Self {
        Self::from_f64(x).expect("constant representable in scalar type")
    }

    /// Tolerance for structural checks on freshly constructed objects:
    /// hermiticity, unitarity, trace normalization of exact inputs.
    fn strict_tol() -> Self;

    /// Tolerance for quantities accumulated across many floating-point
    /// operations: eigenvalue floors, unbiasedness of derived bases,
    /// round-trip residuals.
    fn loose_tol() -> Self;

    /// One standard normal variate.
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// One uniform variate on `[0, 1)`.
    fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

impl Scalar for f64 {
    #[inline]
    fn strict_tol() -> Self {
        1e-12
    }

    #[inline]
    fn loose_tol() -> Self {
        1e-10
    }

    #[inline]
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }

    #[inline]
    fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.random()
    }
}

impl Scalar for f32 {
    #[inline]
    fn strict_tol() -> Self {
        1e-5
    }

    #[inline]
    fn loose_tol() -> Self {
        1e-4
    }

    #[inline]
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }

    #[inline]
    fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.random()
    }
}
