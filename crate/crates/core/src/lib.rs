//! Numerical verification of Hardy, critical Hardy and Rellich type
//! inequalities, and their stability remainders, on homogeneous groups.

// NaN-rejecting guards are written `!(x > 0.0)` on purpose, and tabulated
// constants keep their full printed precision.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod calculus;
pub mod corpus;
pub mod emit;
pub mod error;
pub mod functionals;
pub mod group;
pub mod profiles;
pub mod quadrature;
pub mod selftest;
pub mod sharpness;

pub use error::{Error, Result};
