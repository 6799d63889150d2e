//! The five-fold state-split protocol and RMSE arithmetic.

use crate::data::YieldDataset;
use crate::error::{Error, Result};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const TRAIN_STATES_PER_FOLD: usize = 7;
pub const VAL_STATES_PER_FOLD: usize = 2;

/// Five random 7-train / 2-validation state partitions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SplitPlan {
    pub seed: u64,
    pub folds: usize,
}

impl Default for SplitPlan {
    fn default() -> Self {
        Self { seed: 0, folds: 5 }
    }
}

impl SplitPlan {
    /// The (train, validation) states of one fold. Every fold is an
    /// exact partition of the nine states.
    pub fn fold_states(&self, dataset: &YieldDataset, fold: usize) -> Result<(Vec<u32>, Vec<u32>)> {
        let mut states = dataset.states();
        if states.len() != TRAIN_STATES_PER_FOLD + VAL_STATES_PER_FOLD {
            return Err(Error::InvalidArg(format!(
                "dataset has {} states, the protocol needs 9",
                states.len()
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed.wrapping_add(fold as u64));
        states.shuffle(&mut rng);
        let val = states.split_off(TRAIN_STATES_PER_FOLD);
        Ok((states, val))
    }
}

/// Root mean squared error in the target's units.
pub fn rmse(predictions: &[f64], truths: &[f64]) -> Result<f64> {
    if predictions.len() != truths.len() || predictions.is_empty() {
        return Err(Error::InvalidArg(format!(
            "{} predictions for {} truths",
            predictions.len(),
            truths.len()
        )));
    }
    let sq: f64 = predictions
        .iter()
        .zip(truths)
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    Ok((sq / predictions.len() as f64).sqrt())
}

/// Per-fold RMSEs and their mean.
#[derive(Clone, Debug)]
pub struct FoldReport {
    pub per_fold: Vec<f64>,
    pub mean: f64,
}

impl FoldReport {
    pub fn from_folds(per_fold: Vec<f64>) -> Result<Self> {
        if per_fold.is_empty() {
            return Err(Error::EmptyFold);
        }
        let mean = per_fold.iter().sum::<f64>() / per_fold.len() as f64;
        Ok(Self { per_fold, mean })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate_synthetic_yield, SynthYieldSpec};

    #[test]
    fn perfect_predictions_have_zero_rmse() {
        let t = vec![3.0, 4.0, 5.0];
        assert_eq!(rmse(&t, &t).unwrap(), 0.0);
    }

    #[test]
    fn constant_predictor_scores_the_population_std() {
        let truths = vec![1.0, 2.0, 3.0, 4.0];
        let mean = 2.5;
        let preds = vec![mean; 4];
        let expected = (truths.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / 4.0).sqrt();
        assert!((rmse(&preds, &truths).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn four_sample_fixture_matches_hand_arithmetic() {
        // errors 1, -2, 3, -4: mean square (1+4+9+16)/4 = 7.5
        let truths = vec![10.0, 20.0, 30.0, 40.0];
        let preds = vec![11.0, 18.0, 33.0, 36.0];
        assert!((rmse(&preds, &truths).unwrap() - 7.5f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn folds_partition_the_nine_states() {
        let d = generate_synthetic_yield(&SynthYieldSpec {
            counties_per_state: 1,
            year_start: 2000,
            year_end: 2003,
            ..Default::default()
        })
        .unwrap();
        let plan = SplitPlan { seed: 5, folds: 5 };
        for fold in 0..plan.folds {
            let (train, val) = plan.fold_states(&d, fold).unwrap();
            assert_eq!(train.len(), 7);
            assert_eq!(val.len(), 2);
            let mut all: Vec<u32> = train.iter().chain(val.iter()).copied().collect();
            all.sort_unstable();
            assert_eq!(all, d.states());
        }
        // folds differ from each other for this seed
        let (_, v0) = plan.fold_states(&d, 0).unwrap();
        let (_, v1) = plan.fold_states(&d, 1).unwrap();
        assert_ne!(v0, v1);
    }

    #[test]
    fn fold_report_averages() {
        let r = FoldReport::from_folds(vec![4.0, 6.0, 5.0, 7.0, 3.0]).unwrap();
        assert_eq!(r.mean, 5.0);
        assert_eq!(r.per_fold.len(), 5);
    }
}
