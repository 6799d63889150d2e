//! Pretraining hyperparameters.

use crate::error::{Error, Result};

/// Optimization settings for pretraining. The defaults are the published
/// schedule: 75 epochs, batch 64, Adam at 5e-4 with a 10-epoch warmup and
/// 0.99 exponential decay.
#[derive(Clone, Debug, PartialEq)]
pub struct PretrainConfig {
    pub epochs: u32,
    pub batch_size: usize,
    pub base_lr: f64,
    pub warmup_epochs: u32,
    pub decay_factor: f64,
    pub seed: u64,
}

impl Default for PretrainConfig {
    fn default() -> Self {
        Self {
            epochs: 75,
            batch_size: 64,
            base_lr: 5e-4,
            warmup_epochs: 10,
            decay_factor: 0.99,
            seed: 0,
        }
    }
}

impl PretrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::InvalidArg("epochs and batch_size must be positive".into()));
        }
        if self.base_lr <= 0.0 {
            return Err(Error::InvalidArg(format!("base_lr {}", self.base_lr)));
        }
        if !(0.0 < self.decay_factor && self.decay_factor <= 1.0) {
            return Err(Error::InvalidArg(format!("decay_factor {}", self.decay_factor)));
        }
        Ok(())
    }
}

/// Timestep-masking ablation settings.
#[derive(Clone, Debug, PartialEq)]
pub struct MlmConfig {
    /// Fraction of real timesteps whose rows are zeroed.
    pub mask_rate: f64,
}

impl Default for MlmConfig {
    fn default() -> Self {
        Self { mask_rate: 0.15 }
    }
}

impl MlmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.mask_rate && self.mask_rate < 1.0) {
            return Err(Error::InvalidArg(format!("mask_rate {}", self.mask_rate)));
        }
        Ok(())
    }
}
