// `!(a < b)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod linalg;
pub mod model;
pub mod scalar;
pub mod seed;
pub mod sensitivity;
pub mod spectral;
pub mod stats;
pub mod transfer;

pub use error::{Error, ErrorCategory, Result};
pub use scalar::{Ring, Scalar};

/// Exact rationals for the algebraic identities (resultants, `det A`).
pub type Rational = num_rational::Rational64;

pub type Mat2f64 = linalg::Mat2<f64>;
pub type Mat2f32 = linalg::Mat2<f32>;
pub type Tridiagonal64 = linalg::Tridiagonal<f64>;
pub type Tridiagonal32 = linalg::Tridiagonal<f32>;
pub type Polynomial64 = linalg::Polynomial<f64>;
pub type PolynomialQ = linalg::Polynomial<Rational>;
pub type GramQ = transfer::Gram<Rational>;
pub type ProjectiveAngle32 = transfer::ProjectiveAngle<f32>;
