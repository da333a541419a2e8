use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("asymmetric matrix: max |m - m^T| = {max_deviation:e} exceeds tolerance {tolerance:e}")]
    AsymmetricMatrix { max_deviation: f64, tolerance: f64 },

    #[error("matrix is not PSD: eigenvalue {eigenvalue:e} below -{tolerance:e}")]
    NotPsd { eigenvalue: f64, tolerance: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("invalid problem spec: {0}")]
    InvalidSpec(String),

    #[error("invalid estimator: {0}")]
    InvalidEstimator(String),

    #[error("empty sample list: {0}")]
    EmptySamples(&'static str),

    #[error("direction must be a unit vector, got norm {norm}")]
    NonUnitDirection { norm: f64 },

    #[error(
        "budget exhausted: covariance mismatch {cov_budget_sq:e} exceeds eps^2 = {eps_sq:e}; \
         fall back to the large-N adversary"
    )]
    BudgetExhausted { eps_sq: f64, cov_budget_sq: f64 },

    #[error("constraint satisfied; nothing to demonstrate (||A + B - I|| = {deviation:e})")]
    SumConstraintSatisfied { deviation: f64 },

    #[error("invalid interval: lo = {lo} must be below hi = {hi}")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
