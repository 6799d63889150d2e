//! Pretraining losses and the timestep-masking corruption.

use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wf_model::PaddingMask;
use wf_tensor::{nn, NodeId, Real, Tape, Tensor};
use wf_weather::MEASUREMENT_COUNT;

/// Mean squared error over real timesteps and target measurements only.
/// Input-set columns and padded rows contribute exactly zero.
pub fn masked_feature_loss<T: Real>(
    tape: &mut Tape<T>,
    prediction: NodeId,
    truth: &Tensor<T>,
    targets: &[usize],
    padding_mask: &PaddingMask,
) -> Result<NodeId> {
    if targets.is_empty() {
        return Err(Error::EmptyTargetSet);
    }
    let (n, cols) = truth.dims2()?;
    if cols != MEASUREMENT_COUNT {
        return Err(Error::InvalidArg(format!("truth has {cols} columns")));
    }
    let mut weights = Tensor::<T>::zeros(&[n, cols]);
    let mut cells = 0usize;
    for t in 0..n {
        if !padding_mask.is_real(t) {
            continue;
        }
        for &m in targets {
            weights.set2(t, m, T::one());
            cells += 1;
        }
    }
    if cells == 0 {
        return Err(Error::InvalidArg("no real timesteps in loss".into()));
    }
    let truth_node = tape.constant(truth.clone())?;
    Ok(nn::weighted_mse(
        tape,
        prediction,
        truth_node,
        &weights,
        cells as f64,
    )?)
}

/// Mean squared error over the masked rows, all 31 measurements.
pub fn mlm_loss<T: Real>(
    tape: &mut Tape<T>,
    prediction: NodeId,
    truth: &Tensor<T>,
    masked_rows: &[usize],
) -> Result<NodeId> {
    let (n, cols) = truth.dims2()?;
    let mut weights = Tensor::<T>::zeros(&[n, cols]);
    let mut cells = 0usize;
    for &t in masked_rows {
        for m in 0..cols {
            weights.set2(t, m, T::one());
            cells += 1;
        }
    }
    if cells == 0 {
        return Err(Error::InvalidArg("no masked rows in loss".into()));
    }
    let truth_node = tape.constant(truth.clone())?;
    Ok(nn::weighted_mse(
        tape,
        prediction,
        truth_node,
        &weights,
        cells as f64,
    )?)
}

/// Independently select each real timestep with probability `rate` and
/// zero the whole row. Returns the corrupted copy and the selected rows.
pub fn mlm_mask<T: Real>(
    x: &Tensor<T>,
    padding_mask: &PaddingMask,
    rate: f64,
    rng: &mut ChaCha8Rng,
) -> Result<(Tensor<T>, Vec<usize>)> {
    if !(0.0 < rate && rate < 1.0) {
        return Err(Error::InvalidArg(format!("mask rate {rate}")));
    }
    let (n, cols) = x.dims2()?;
    let mut corrupted = x.clone();
    let mut rows = Vec::new();
    for t in 0..n {
        if padding_mask.is_real(t) && rng.random_range(0.0..1.0) < rate {
            for m in 0..cols {
                corrupted.set2(t, m, T::zero());
            }
            rows.push(t);
        }
    }
    Ok((corrupted, rows))
}

/// Deterministic per-(seed, epoch, sample) RNG for masking.
pub fn mask_rng(seed: u64, epoch: u32, sample: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(
        seed.wrapping_mul(0x9e37_79b9_7f4a_7c15)
            ^ (u64::from(epoch) << 32)
            ^ sample as u64,
    )
}
