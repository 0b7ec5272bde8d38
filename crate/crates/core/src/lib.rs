//! Exact-arithmetic toolkit for singular horizontal curves of polynomial
//! distributions: bracket calculus on the cotangent bundle, annihilator
//! kernels, stratified K/J/I analysis, minimal-rank distributions on the
//! base, and polarized-group computations from structure constants.

pub mod algebra;
pub mod carnot;
pub mod dsl;
pub mod models;
pub mod nonholonomy;
pub mod report;
pub mod special;
pub mod strata;
pub mod symplectic;
