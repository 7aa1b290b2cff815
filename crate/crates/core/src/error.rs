use thiserror::Error;

pub type Result<T> = std::result::Result<T, HomError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HomError {
    /// A model or grid parameter is out of range.
    #[error("configuration error: {0}")]
    Config(String),

    /// An argument to an operation violates its precondition.
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("degenerate two-photon state: superposition has zero norm")]
    DegenerateState,

    #[error("contract violation: {0}")]
    Contract(String),

    /// The Gaussian fit to a Fock curve left a residual above tolerance.
    #[error("model mismatch: fit residual {residual:e} exceeds {tolerance:e}")]
    ModelMismatch { residual: f64, tolerance: f64 },
}
