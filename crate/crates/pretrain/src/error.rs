//! Error type for pretraining.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("training diverged at epoch {epoch}: {detail}")]
    Diverged { epoch: u32, detail: String },

    #[error("target set is empty")]
    EmptyTargetSet,

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("invalid argument: {0}")]
    InvalidArg(String),

    #[error(transparent)]
    Model(#[from] wf_model::Error),

    #[error(transparent)]
    Tensor(#[from] wf_tensor::Error),

    #[error(transparent)]
    Weather(#[from] wf_weather::Error),
}
