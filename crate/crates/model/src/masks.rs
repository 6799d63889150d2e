//! Feature and padding masks.

use crate::config::IN_DIM;
use crate::error::{Error, Result};

/// Which of the 31 measurements are observed. Unobserved columns are
/// zeroed before the input projection.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeatureMask([bool; IN_DIM]);

impl FeatureMask {
    pub fn all_present() -> Self {
        Self([true; IN_DIM])
    }

    pub fn none_present() -> Self {
        Self([false; IN_DIM])
    }

    pub fn from_present(indices: &[usize]) -> Result<Self> {
        let mut mask = [false; IN_DIM];
        for &i in indices {
            if i >= IN_DIM {
                return Err(Error::InvalidConfig(format!("feature index {i}")));
            }
            mask[i] = true;
        }
        Ok(Self(mask))
    }

    /// Everything present except the given indices.
    pub fn hiding(indices: &[usize]) -> Result<Self> {
        let mut mask = [true; IN_DIM];
        for &i in indices {
            if i >= IN_DIM {
                return Err(Error::InvalidConfig(format!("feature index {i}")));
            }
            mask[i] = false;
        }
        Ok(Self(mask))
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn is_present(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn present_count(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }
}

/// Which timesteps are real. Padded positions receive exactly zero
/// attention weight from every query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PaddingMask(Vec<bool>);

impl PaddingMask {
    /// First `valid_len` positions real, the rest padding.
    pub fn from_valid_len(n: usize, valid_len: usize) -> Result<Self> {
        if valid_len > n {
            return Err(Error::InvalidConfig(format!(
                "valid_len {valid_len} exceeds {n} rows"
            )));
        }
        if valid_len == 0 {
            return Err(Error::InvalidConfig("no real timesteps".into()));
        }
        Ok(Self((0..n).map(|i| i < valid_len).collect()))
    }

    pub fn all_real(n: usize) -> Self {
        Self(vec![true; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn is_real(&self, t: usize) -> bool {
        self.0[t]
    }

    pub fn real_count(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }
}
