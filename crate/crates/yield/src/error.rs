//! Error type for the yield prediction pipeline.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("sample shape error: {0}")]
    BadSample(String),

    #[error("missing past yield for county {county} year {year}")]
    MissingPastYield { county: u32, year: i32 },

    #[error("county {county} lacks {need} consecutive years ending {year}")]
    MissingHistory { county: u32, year: i32, need: usize },

    #[error("validation fold is empty")]
    EmptyFold,

    #[error("csv parse error: {0}")]
    Csv(String),

    #[error("invalid argument: {0}")]
    InvalidArg(String),

    #[error(transparent)]
    Model(#[from] wf_model::Error),

    #[error(transparent)]
    Tensor(#[from] wf_tensor::Error),
}
