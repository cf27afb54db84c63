//! Scalar abstractions shared by the numerical kernels.
//!
//! Floating-point kernels (eigensolvers, transfer matrices, angle dynamics)
//! are generic over [`Scalar`], which covers `f32` and `f64`. Purely algebraic
//! code (polynomials, determinants, resultants) only needs [`Ring`], so it also
//! runs over exact types such as `num_rational::Rational64`.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{Float, FromPrimitive, One, Zero};

/// floating point: f32 or f64
pub trait Scalar: Float + FromPrimitive + Debug + Send + Sync + 'static {
    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Commutative ring with identity. Enough structure for polynomial
/// arithmetic and cofactor determinants.
pub trait Ring:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
}

impl<T> Ring for T where
    T: Clone
        + Debug
        + PartialEq
        + Zero
        + One
        + Add<Output = T>
        + Sub<Output = T>
        + Mul<Output = T>
        + Neg<Output = T>
{
}
