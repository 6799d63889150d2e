//! Error type for the influenza forecasting pipeline.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("series too short: {got} weeks, need at least {need}")]
    SeriesTooShort { got: usize, need: usize },

    #[error("weeks are not strictly consecutive at record {0}")]
    NonConsecutiveWeeks(usize),

    #[error("ILI percent {0} outside [0, 100]")]
    BadIliPercent(f64),

    #[error("bad epiweek {0}")]
    BadEpiweek(u32),

    #[error("insufficient history: {got} points for ARIMA({p},{d},{q})")]
    InsufficientHistory {
        got: usize,
        p: usize,
        d: usize,
        q: usize,
    },

    #[error("fitted MA polynomial is not invertible (|theta| = {0:.3})")]
    NonInvertible(f64),

    #[error("csv parse error: {0}")]
    Csv(String),

    #[error("invalid argument: {0}")]
    InvalidArg(String),

    #[error(transparent)]
    Model(#[from] wf_model::Error),

    #[error(transparent)]
    Tensor(#[from] wf_tensor::Error),
}
