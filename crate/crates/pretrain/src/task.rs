//! The rotating 10-target / 21-input variable partition.

use crate::error::{Error, Result};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wf_model::FeatureMask;
use wf_weather::MEASUREMENT_COUNT;

pub const TARGET_COUNT: usize = 10;

/// Current target/input split plus the swap RNG. The swap RNG is
/// independent of data shuffling so task rotation and data order can be
/// varied separately.
#[derive(Clone, Debug)]
pub struct PretrainTaskState {
    targets: Vec<usize>,
    inputs: Vec<usize>,
    rng: ChaCha8Rng,
    swaps: u64,
}

impl PretrainTaskState {
    /// Uniformly random 10/21 partition of the 31 measurements.
    pub fn init(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ids: Vec<usize> = (0..MEASUREMENT_COUNT).collect();
        ids.shuffle(&mut rng);
        let mut targets: Vec<usize> = ids[..TARGET_COUNT].to_vec();
        let mut inputs: Vec<usize> = ids[TARGET_COUNT..].to_vec();
        targets.sort_unstable();
        inputs.sort_unstable();
        Self {
            targets,
            inputs,
            rng,
            swaps: 0,
        }
    }

    /// Exchange one uniformly chosen target with one input. Called once
    /// per batch.
    pub fn swap_step(&mut self) {
        let ti = self.rng.random_range(0..self.targets.len());
        let ii = self.rng.random_range(0..self.inputs.len());
        std::mem::swap(&mut self.targets[ti], &mut self.inputs[ii]);
        self.targets.sort_unstable();
        self.inputs.sort_unstable();
        self.swaps += 1;
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn inputs(&self) -> &[usize] {
        &self.inputs
    }

    pub fn swap_count(&self) -> u64 {
        self.swaps
    }

    /// Feature mask that hides the current targets from the model input.
    pub fn input_mask(&self) -> Result<FeatureMask> {
        FeatureMask::hiding(&self.targets).map_err(Error::from)
    }

    pub fn check_invariants(&self) -> Result<()> {
        if self.targets.len() != TARGET_COUNT
            || self.inputs.len() != MEASUREMENT_COUNT - TARGET_COUNT
        {
            return Err(Error::InvalidArg("partition sizes drifted".into()));
        }
        let mut all: Vec<usize> = self.targets.iter().chain(self.inputs.iter()).copied().collect();
        all.sort_unstable();
        if all != (0..MEASUREMENT_COUNT).collect::<Vec<_>>() {
            return Err(Error::InvalidArg("partition does not cover all measurements".into()));
        }
        Ok(())
    }
}

/// Frozen partition used for validation, resampled once per epoch for
/// comparability across runs.
pub fn validation_partition(seed: u64, epoch: u32) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0000 ^ u64::from(epoch));
    let mut ids: Vec<usize> = (0..MEASUREMENT_COUNT).collect();
    ids.shuffle(&mut rng);
    let mut targets: Vec<usize> = ids[..TARGET_COUNT].to_vec();
    targets.sort_unstable();
    targets
}
