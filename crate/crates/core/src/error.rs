use thiserror::Error;

/// Errors raised by the numerical routines and I/O helpers.
#[derive(Debug, Error)]
pub enum GtsError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// The inverted density does not integrate to one; the frequency cutoff or
    /// the x-range of the grid is too small.
    #[error("density mass {mass:.6} deviates from 1 by more than {tolerance:e}")]
    Normalization { mass: f64, tolerance: f64 },

    #[error("quadrature did not converge: error estimate {estimate:e} after {intervals} intervals")]
    Quadrature { estimate: f64, intervals: usize },

    #[error("finite-difference step for `{param}` leaves the parameter domain")]
    StepCollision { param: &'static str },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: price {value} is not positive")]
    NonPositivePrice { line: usize, value: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, GtsError>;
