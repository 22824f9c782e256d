use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("horizon must be positive and finite, got {0}")]
    InvalidHorizon(f64),

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("polynomial order must be at least 1, got {0}")]
    InvalidOrder(usize),

    #[error("element {0} lies in the interaction domain and cannot be refined")]
    ExteriorElementMarked(usize),

    #[error("element index {index} out of range for a mesh with {len} elements")]
    ElementOutOfRange { index: usize, len: usize },

    #[error("point {x} lies outside the extended domain [{lo}, {hi}]")]
    OutOfDomain { x: f64, lo: f64, hi: f64 },

    #[error("trial and test spaces are built on different meshes")]
    MeshMismatch,

    #[error("Gram matrix is not positive definite (assembly defect)")]
    IndefiniteGram,

    #[error("Schur complement is singular: discrete inf-sup failure, try a larger test enrichment")]
    InfSupFailure,

    #[error("nonlocal diffusion matrix is not positive definite")]
    DiffusionFactorization,

    #[error("exact solution has zero norm; relative error undefined")]
    ZeroExactNorm,

    #[error("config key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }
}
