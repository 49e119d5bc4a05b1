use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors shared by all toolkit modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("lattice mismatch: {0}")]
    LatticeMismatch(String),

    #[error("resource limit: {0}")]
    ResourceLimit(String),

    /// Norm blowup, wraparound of a scattered wave, or any other condition
    /// that invalidates a numerical run.
    #[error("numerical instability: {0}")]
    Instability(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
