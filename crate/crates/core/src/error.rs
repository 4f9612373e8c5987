use thiserror::Error;

/// Errors raised by model construction and the samplers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("unstable model: rho = {rho} >= c = {servers}")]
    Unstable { rho: f64, servers: usize },

    #[error("drift constant a = {a} outside ({lo}, {hi})")]
    InvalidDriftConstant { a: f64, lo: f64, hi: f64 },

    #[error("no positive root of the log-moment function: {0}")]
    NoRoot(String),

    #[error("moment generating function unavailable: {0}")]
    MgfUnavailable(String),

    #[error("step budget of {0} elementary steps exceeded")]
    BudgetExceeded(u64),

    #[error("no valid truncation level: {0}")]
    NoValidTruncation(String),

    #[error("sampler not applicable: {0}")]
    NotApplicable(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
