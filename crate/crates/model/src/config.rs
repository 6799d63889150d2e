//! Encoder configuration and the two published size presets.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

pub const IN_DIM: usize = 31;
pub const MAX_LEN: usize = 365;
pub const SCALER_GRANULARITIES: usize = 30;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub d_model: usize,
    pub n_heads: usize,
    pub n_layers: usize,
    pub d_ff: usize,
    pub in_dim: usize,
    pub out_dim: usize,
    pub max_len: usize,
    pub dropout: f64,
}

impl ModelConfig {
    pub fn new(
        d_model: usize,
        n_heads: usize,
        n_layers: usize,
        d_ff: usize,
        out_dim: usize,
    ) -> Result<Self> {
        let cfg = Self {
            d_model,
            n_heads,
            n_layers,
            d_ff,
            in_dim: IN_DIM,
            out_dim,
            max_len: MAX_LEN,
            dropout: 0.0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// The ~2M-parameter preset.
    pub fn size_2m() -> Self {
        Self::new(128, 4, 6, 512, IN_DIM).expect("preset is valid")
    }

    /// The ~8M-parameter preset.
    pub fn size_8m() -> Self {
        Self::new(256, 8, 8, 1024, IN_DIM).expect("preset is valid")
    }

    /// A small configuration for tests and desk-scale runs.
    pub fn tiny(d_model: usize, n_heads: usize, n_layers: usize, d_ff: usize, out_dim: usize) -> Result<Self> {
        Self::new(d_model, n_heads, n_layers, d_ff, out_dim)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d_model == 0 || self.d_model % 4 != 0 {
            // the positional encoding interleaves 4 channel roles
            return Err(Error::InvalidConfig(format!(
                "d_model {} must be a positive multiple of 4",
                self.d_model
            )));
        }
        if self.n_heads == 0 || self.d_model % self.n_heads != 0 {
            return Err(Error::InvalidConfig(format!(
                "d_model {} not divisible by {} heads",
                self.d_model, self.n_heads
            )));
        }
        if self.n_layers == 0 || self.d_ff == 0 || self.out_dim == 0 {
            return Err(Error::InvalidConfig("zero-sized dimension".into()));
        }
        if self.in_dim != IN_DIM {
            return Err(Error::InvalidConfig(format!(
                "in_dim {} must be {IN_DIM}",
                self.in_dim
            )));
        }
        if self.max_len != MAX_LEN {
            return Err(Error::InvalidConfig(format!(
                "max_len {} must be {MAX_LEN}",
                self.max_len
            )));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::InvalidConfig(format!("dropout {}", self.dropout)));
        }
        Ok(())
    }

    pub fn head_dim(&self) -> usize {
        self.d_model / self.n_heads
    }

    /// Learnable value count for this configuration.
    pub fn param_count(&self) -> usize {
        let d = self.d_model;
        let scalers = SCALER_GRANULARITIES * IN_DIM;
        let input = IN_DIM * d + d;
        let per_layer = 4 * (d * d + d)      // attention projections
            + 2 * 2 * d                      // two layer norms
            + d * self.d_ff + self.d_ff      // ff in
            + self.d_ff * d + d;             // ff out
        let output = d * self.out_dim + self.out_dim;
        scalers + input + self.n_layers * per_layer + output
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(json)
            .map_err(|e| Error::InvalidConfig(format!("bad config json: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }
}
