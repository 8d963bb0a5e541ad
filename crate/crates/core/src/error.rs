use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("cannot mix affine and table transforms")]
    FamilyMismatch,

    #[error("matrix is not invertible over the integers (determinant {0})")]
    NotUnimodular(i128),

    #[error("invalid table transform: {0}")]
    InvalidTable(String),

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("partitions are defined over different windows")]
    WindowMismatch,

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("point {0:?} lies outside the transform domain")]
    OutOfDomain(Vec<i64>),

    #[error("transform does not map the window onto itself")]
    NotStabilizing,

    #[error("group closure exceeded {0} elements; undecidable within budget")]
    BudgetExceeded(usize),

    #[error("too many generators: {got} (limit {limit})")]
    TooManyGenerators { got: usize, limit: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("arithmetic overflow: {0}")]
    Overflow(String),

    #[error("relation graph contains a cycle")]
    Cycle,

    #[error("rules admit no joint distribution (max marginal error {max_error:e} after {iterations} sweeps)")]
    Infeasible { max_error: f64, iterations: usize },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("no data")]
    NoData,

    #[error("chord {midi:?} outside instrument range [{lo}, {hi}]")]
    OutOfRange { midi: Vec<i64>, lo: i64, hi: i64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
