//! Numerical engine for warped-product almost-Hermitian geometry over
//! almost-contact fibers: exact-derivative fields on coordinate charts,
//! tensor calculus, structure construction, and residual-based identity
//! verification.

pub mod calculus;
pub mod chart;
pub mod cli;
pub mod contact;
pub mod dual;
pub mod expr;
pub mod field;
pub mod models;
pub mod report;
pub mod tol;
pub mod warp;
