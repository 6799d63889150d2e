//! Error type for the encoder model.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model config: {0}")]
    InvalidConfig(String),

    #[error("sequence of {got} rows exceeds the maximum length {max}")]
    TooLong { got: usize, max: usize },

    #[error("padding mask has {got} entries for {expected} rows")]
    MaskLength { got: usize, expected: usize },

    #[error("coordinate out of range: {0}")]
    BadCoordinate(String),

    #[error("granularity {0} outside 1..=30")]
    BadGranularity(u16),

    #[error(transparent)]
    Tensor(#[from] wf_tensor::Error),
}
