use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("field does not match the grid it is used with")]
    GridMismatch,

    #[error("singular banded system at row {row}")]
    Singular { row: usize },

    #[error("step rejected at t = {t}: non-finite values in the new state")]
    NonFinite { t: f64 },

    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    #[error("indeterminate: {0}")]
    Indeterminate(String),

    #[error("weighted tail dominates: top-10% mass fraction {fraction:.3e}")]
    WeightedTail { fraction: f64 },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("analytic weight overflow at rho = {rho}, k_y = {ky}")]
    WeightOverflow { rho: f64, ky: f64 },

    #[error("initial profile has nonzero first moment {moment:.6e}")]
    NonzeroMoment { moment: f64 },

    #[error("{path}: {message}")]
    Config { path: String, message: String },

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("plot: {0}")]
    Plot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}
