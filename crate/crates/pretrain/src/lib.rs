//! Self-supervised pretraining: masked-feature prediction with per-batch
//! variable swapping, the timestep-masking ablation, and the training
//! loop with validation tracking.

pub mod bench;
pub mod config;
pub mod data;
pub mod error;
pub mod loss;
pub mod task;
pub mod trainer;

pub use config::{MlmConfig, PretrainConfig};
pub use data::{build_samples, PretrainSample};
pub use error::{Error, Result};
pub use loss::{masked_feature_loss, mlm_loss, mlm_mask};
pub use task::{validation_partition, PretrainTaskState, TARGET_COUNT};
pub use trainer::{pretrain, EpochStats, PretrainRun, PretrainTask, TrainOptions};
