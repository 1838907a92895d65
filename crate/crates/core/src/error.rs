use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A point lies outside the domain of the space (e.g. |z| >= 1 on the ball).
    #[error("domain violation: {0}")]
    Domain(String),

    /// A parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A symbol exceeded its declared sup-norm bound at a quadrature node.
    #[error("symbol `{label}` violates sup bound {bound} at node {at}: |u| = {value}")]
    SupBound {
        label: String,
        at: String,
        value: f64,
        bound: f64,
    },

    /// Operator dimensions or spaces do not match.
    #[error("mismatch: {0}")]
    Mismatch(String),

    /// A numerical routine failed to produce a finite or converged result.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Requested combination is not implemented.
    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
