//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid frequency set: {0}")]
    InvalidFrequencySet(String),

    #[error("frequency set is not injective modulo the grid size q={q}: {detail}")]
    GridAliasing { q: u32, detail: String },

    #[error("cannot draw {requested} distinct grid points, grid has only {available}")]
    InsufficientGridPoints { requested: usize, available: u128 },

    #[error("shape mismatch: expected length {expected}, got {got}")]
    ShapeError { expected: usize, got: usize },

    #[error("invalid sparsity M={m}: must satisfy 1 <= M <= D={d}")]
    InvalidSparsity { m: usize, d: usize },

    #[error("coherence needs at least two columns, D={0}")]
    NeedTwoColumns(usize),

    #[error("subset must be non-empty")]
    EmptySubset,

    #[error("subset index {index} out of range for D={d}")]
    SubsetIndexOutOfRange { index: usize, d: usize },

    #[error("exhaustive enumeration of {count} subsets exceeds budget {budget}")]
    CombinatorialBudgetExceeded { count: u128, budget: u128 },

    #[error("selected columns are numerically rank-deficient (condition estimate {cond:.3e})")]
    RankDeficient {
        cond: f64,
        partial: Box<crate::omp::RecoveryResult>,
    },

    #[error("input vector is empty")]
    EmptyInput,

    #[error("constraint radius must be non-negative, got {0}")]
    InvalidRadius(f64),

    #[error("{name} must lie in (0,1), got {value}")]
    InvalidProbability { name: &'static str, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}
