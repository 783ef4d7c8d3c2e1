use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid series: {0}")]
    InvalidSeries(String),

    #[error("non-finite value at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },

    #[error("invalid direction: {0}")]
    InvalidDirection(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid block scheme: {0}")]
    InvalidScheme(String),

    #[error("order statistic {m} out of range for {len} values")]
    InvalidRank { m: usize, len: usize },

    #[error("component {component}: level {level} exceeds the {n_used} usable observations")]
    LevelTooDeep {
        component: usize,
        level: usize,
        n_used: usize,
    },

    #[error("every one of the {k_n} blocks contains an exceedance")]
    AllBlocksExceed { k_n: usize },

    #[error("no observation exceeds the estimated thresholds")]
    NoExceedances,

    #[error("at kappa = {kappa}: {source}")]
    AtKappa { kappa: f64, source: Box<Error> },

    #[error("no positive root: lambda = {lambda} must lie in (0, 2e^gamma)")]
    NoRoot { lambda: f64 },

    #[error("asymptotic variance must be positive, got {0}")]
    InvalidVariance(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{0} cell(s) had no successful replication: {1}")]
    CellEmpty(usize, String),
}
