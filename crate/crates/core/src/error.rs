use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("negative or non-finite probability {value} at row {row}, column {col}")]
    InvalidEntry { row: usize, col: usize, value: f64 },

    #[error("distribution is not normalized: entries sum to {sum}")]
    NotNormalized { sum: f64 },

    #[error("column {col} of the joint distribution has zero mass")]
    ZeroColumnMass { col: usize },

    #[error("quantizer column {col} sums to {sum}, expected 1")]
    NotStochastic { col: usize, sum: f64 },

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("solver did not converge (last residual {residual:e})")]
    NonConvergence { residual: f64 },

    #[error("I0 = {i0} is not achievable (maximum {max} for this class count)")]
    InfeasibleI0 { i0: f64, max: f64 },

    #[error("constraint gradient is numerically zero; constrained kernel is degenerate")]
    DegenerateKernel,

    #[error("non-finite gradient entry at class {class}, symbol {symbol}")]
    NonFiniteGradient { class: usize, symbol: usize },

    #[error("curve has no smooth segment with at least {needed} points")]
    SegmentTooShort { needed: usize },

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
