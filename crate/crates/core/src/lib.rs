#![forbid(unsafe_code)]
//! Mixed multiple orthogonal polynomials on the step-line.

pub mod geronimus;
pub mod jacobi_pineiro;
pub mod kernels;
pub mod matpoly;
pub mod measures;
pub mod mops;
pub mod numerics;

pub use num::BigRational;
pub use numerics::{BigFloat, DenseMatrix, FloatScalar, Scalar, ScalarPoly};

pub type Rational = BigRational;
pub type Float256 = BigFloat<256>;
