use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("deformation parameter must lie in (0, 1], got {0}")]
    InvalidQ(f64),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("floating-point range exceeded: {0}")]
    Range(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("cutoff insufficient: truncation error {err:e} exceeds tolerance {tol:e}")]
    CutoffInsufficient { err: f64, tol: f64 },
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
