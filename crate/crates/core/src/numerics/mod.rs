//! Exact and arbitrary-precision linear algebra, polynomials, roots and
//! quadrature.

pub mod bigfloat;
pub mod matrix;
pub mod poly;
pub mod quadrature;
pub mod roots;
pub mod scalar;
pub mod special;

use thiserror::Error;

pub use bigfloat::BigFloat;
pub use matrix::{DenseMatrix, Echelon, LuFactors};
pub use poly::ScalarPoly;
pub use roots::{default_cluster_radius, poly_roots, poly_roots_clustered, Root};
pub use scalar::{parse_rational, FloatScalar, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumericsError {
    /// Leading principal minor of this (0-based) pivot index vanishes.
    #[error("leading principal minor {index} is singular")]
    SingularMinor { index: usize },
    #[error("matrix is singular")]
    Singular,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("linear system is inconsistent")]
    Inconsistent,
    #[error("division by zero")]
    DivisionByZero,
    #[error("no convergence: {0}")]
    NonConvergence(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("operation needs floating point: {0}")]
    NeedsFloat(String),
}
