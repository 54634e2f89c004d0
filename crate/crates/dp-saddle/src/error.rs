use thiserror::Error;

/// Crate-wide error type. Variants mirror the contract failures of the
/// public operations rather than internal mechanics.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dataset must be nonempty")]
    EmptyDataset,

    #[error("privacy precondition violated: {0}")]
    PrivacyPrecondition(String),

    #[error("recursion schedule infeasible: {0}")]
    ScheduleInfeasible(String),

    #[error("solver stopped after {iterations} iterations with residual {residual:.3e} above tolerance")]
    NonConvergence { residual: f64, iterations: u64 },

    #[error("operation not supported: {0}")]
    Unsupported(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("column {0:?} not found in CSV header")]
    MissingColumn(String),

    #[error("rate fit needs at least {needed} rows with positive finite values, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
