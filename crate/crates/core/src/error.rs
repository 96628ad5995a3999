use thiserror::Error;

/// Errors raised by the simulation modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} = {value} is outside its domain")]
    Domain { what: &'static str, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("adaptive quadrature did not converge on [{lo}, {hi}] (estimated error {residual:e})")]
    Quadrature { lo: f64, hi: f64, residual: f64 },

    #[error("degenerate spectrum: {0}")]
    Degenerate(String),

    #[error("integration aborted at s = {s}: {reason}")]
    Integration { s: f64, reason: String },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
