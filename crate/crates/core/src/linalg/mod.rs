//! Small dense and structured linear algebra used throughout the crate.

pub mod det;
pub mod mat2;
pub mod poly;
pub mod tridiag;

pub use det::{determinant, determinant4};
pub use mat2::Mat2;
pub use poly::Polynomial;
pub use tridiag::Tridiagonal;
