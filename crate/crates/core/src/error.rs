use thiserror::Error;

/// Errors raised anywhere in the inversion pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not symmetric (relative asymmetry {0:e})")]
    NonSymmetric(f64),

    #[error("matrix is not positive definite (pivot {pivot} at row {row})")]
    NotSpd { row: usize, pivot: f64 },

    #[error("basis mismatch: expected {expected}, found {found}")]
    BasisMismatch { expected: String, found: String },

    #[error("covariance exponent alpha = {0} must exceed 1 for a trace-class operator in two dimensions")]
    AlphaTooSmall(f64),

    #[error("requested {requested} modes but only {available} eigenpairs are stored")]
    TooFewModes { requested: usize, available: usize },

    #[error("ensemble of {0} members is too small; need at least 2")]
    EnsembleTooSmall(usize),

    #[error("observation point ({0}, {1}) lies outside the domain")]
    PointOutsideDomain(f64, f64),

    #[error("forward solve failed: {0}")]
    SolveFailure(String),

    #[error("model `{0}` is not linear")]
    NotLinearModel(String),

    #[error("Levenberg-Marquardt stalled: damping {damping:e} after {iterations} iterations")]
    LmStalled { damping: f64, iterations: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no records to summarize")]
    EmptyInput,

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for failures of a numerical solver, as opposed to bad input.
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            Error::NotSpd { .. } | Error::SolveFailure(_) | Error::LmStalled { .. }
        )
    }
}
