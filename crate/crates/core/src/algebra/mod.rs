//! Exact arithmetic layer: rationals, multivariate polynomials over Q,
//! rational functions, dense rational matrices and canonical subspaces.

mod matrix;
mod poly;
mod ratfunc;
mod subspace;
mod symbolic;

pub use matrix::QMatrix;
pub use poly::{fmt_rat, rat_to_f64, MultiPoly, Rat};
pub use ratfunc::RatFunc;
pub use subspace::LinearSubspace;
pub use symbolic::{symbolic_kernel, PolyMatrix};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum AlgebraError {
    #[error("variable index {index} out of range (poly has {num_vars} variables)")]
    VarOutOfRange { index: usize, num_vars: usize },
    #[error("point has {got} coordinates, expected {expected}")]
    PointLengthMismatch { got: usize, expected: usize },
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("division by zero polynomial")]
    DivisionByZero,
}

/// Shorthand for an integer rational.
pub fn rat(n: i64) -> Rat {
    Rat::from_integer(n.into())
}

/// Shorthand for the rational n/d.
pub fn ratio(n: i64, d: i64) -> Rat {
    Rat::new(n.into(), d.into())
}
