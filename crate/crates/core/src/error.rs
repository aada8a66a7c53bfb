use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the verification toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid group: {0}")]
    InvalidGroup(String),

    #[error("invalid quasi-norm: {0}")]
    InvalidNorm(String),

    #[error("quasi-norm {norm} is not compatible with the group: {reason}")]
    IncompatibleNorm { norm: String, reason: String },

    #[error("point has {got} coordinates, group dimension is {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("quadrature did not converge: value {value:e}, error estimate {err_est:e} after {panels} panels")]
    NonConvergence {
        value: f64,
        err_est: f64,
        panels: usize,
    },

    #[error("integrand returned a non-finite value at x = {x:e}")]
    NonFiniteIntegrand { x: f64 },

    #[error("ambient integration is limited to dimension <= 3, got {0}")]
    DimensionTooLarge(usize),

    #[error("support violation: {0}")]
    SupportViolation(String),

    #[error("profile is not non-increasing: derivative {derivative:e} at r = {r:e}")]
    NotMonotone { r: f64, derivative: f64 },

    #[error("profile derivative check failed for {family}: {detail}")]
    DerivativeMismatch { family: String, detail: String },

    #[error("optimizer: {0}")]
    Optimizer(String),

    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn param(name: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.to_string(),
            reason: reason.into(),
        }
    }
}
