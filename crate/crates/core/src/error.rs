use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("{what}: {got} exceeds the limit of {limit}")]
    Limit {
        what: &'static str,
        got: usize,
        limit: usize,
    },

    #[error("observation contains non-finite values")]
    NonFinite,

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("quadrature did not converge on [{a}, {b}] (error estimate {estimate:e})")]
    Quadrature { a: f64, b: f64, estimate: f64 },

    #[error("empty grid")]
    EmptyGrid,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
