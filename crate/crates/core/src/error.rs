use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// The interval or node set does not describe a valid compact domain.
    #[error("invalid domain: {0}")]
    Domain(String),

    /// A numeric argument violates the precondition of the operation it feeds.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Cyclic Jacobi ran out of sweeps before the off-diagonal mass vanished.
    #[error("jacobi did not converge after {sweeps} sweeps (off-diagonal norm {offdiag_norm:e})")]
    NoConvergence { sweeps: usize, offdiag_norm: f64 },

    /// Every eigenvalue fell at or below the drop tolerance.
    #[error("no eigenvalue exceeds the drop tolerance {0:e}")]
    EmptySpectrum(f64),

    /// A spectrum file parsed but failed validation; the message names the field.
    #[error("malformed spectrum: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
