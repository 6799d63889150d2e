//! The pretraining loop: batch assembly, task rotation, optimization,
//! and per-epoch validation.

use crate::config::{MlmConfig, PretrainConfig};
use crate::data::PretrainSample;
use crate::error::{Error, Result};
use crate::loss::{mask_rng, masked_feature_loss, mlm_loss, mlm_mask};
use crate::task::{validation_partition, PretrainTaskState};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use wf_model::{forward, init_params, FeatureMask, ModelConfig, PaddingMask};
use wf_tensor::{AdamState, Gradients, LrSchedule, Params, Tape};
use wf_weather::MEASUREMENT_COUNT;

#[derive(Clone, Debug)]
pub enum PretrainTask {
    MaskedFeature,
    Mlm(MlmConfig),
}

#[derive(Clone, Copy, Debug)]
pub struct EpochStats {
    pub epoch: u32,
    pub lr: f64,
    pub train_loss: f64,
    pub val_loss: f64,
}

pub struct PretrainRun {
    pub history: Vec<EpochStats>,
    pub best_epoch: u32,
    pub best_val_loss: f64,
    pub best_params: Params<f32>,
    pub final_params: Params<f32>,
    /// How often each measurement sat in the target set, counted once
    /// per training batch.
    pub target_coverage: [u32; MEASUREMENT_COUNT],
}

#[derive(Clone, Copy, Debug)]
pub struct TrainOptions {
    pub threads: usize,
    /// Skip optimizer updates; the loss must then stay constant.
    pub frozen: bool,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self {
            threads: 1,
            frozen: false,
        }
    }
}

/// Train a model on the masked-feature or timestep-masking task.
///
/// Per-epoch train and validation losses are recorded; the parameters of
/// the best validation epoch are retained alongside the final ones. All
/// randomness flows from `pretrain_cfg.seed`.
pub fn pretrain(
    model_cfg: &ModelConfig,
    pretrain_cfg: &PretrainConfig,
    task: &PretrainTask,
    train: &[PretrainSample],
    val: &[PretrainSample],
    options: TrainOptions,
) -> Result<PretrainRun> {
    model_cfg.validate()?;
    pretrain_cfg.validate()?;
    if let PretrainTask::Mlm(mlm) = task {
        mlm.validate()?;
    }
    if train.is_empty() || val.is_empty() {
        return Err(Error::EmptyDataset);
    }

    let mut params = init_params::<f32>(model_cfg, pretrain_cfg.seed)?;
    let mut adam = AdamState::new();
    let schedule = LrSchedule::new(
        pretrain_cfg.base_lr,
        pretrain_cfg.warmup_epochs,
        pretrain_cfg.decay_factor,
    )?;
    let mut data_rng = ChaCha8Rng::seed_from_u64(pretrain_cfg.seed.wrapping_add(0xda7a));
    let mut task_state = PretrainTaskState::init(pretrain_cfg.seed.wrapping_add(0x5a9));
    let mut coverage = [0u32; MEASUREMENT_COUNT];

    let mut history = Vec::with_capacity(pretrain_cfg.epochs as usize);
    let mut best: Option<(u32, f64, Params<f32>)> = None;
    let mut final_params = params.clone();

    for epoch in 0..pretrain_cfg.epochs {
        let lr = schedule.lr_at(epoch);
        let mut order: Vec<usize> = (0..train.len()).collect();
        order.shuffle(&mut data_rng);

        let mut epoch_loss = 0.0f64;
        let mut batches = 0usize;
        for chunk in order.chunks(pretrain_cfg.batch_size) {
            let batch_task = match task {
                PretrainTask::MaskedFeature => {
                    task_state.swap_step();
                    for &t in task_state.targets() {
                        coverage[t] += 1;
                    }
                    BatchTask::MaskedFeature {
                        targets: task_state.targets().to_vec(),
                        mask: task_state.input_mask()?,
                    }
                }
                PretrainTask::Mlm(mlm) => BatchTask::Mlm { rate: mlm.mask_rate },
            };

            let results = run_batch(
                model_cfg,
                &params,
                train,
                chunk,
                &batch_task,
                pretrain_cfg.seed,
                epoch,
                options.threads,
            );
            let mut grads = Gradients::empty();
            let mut loss_sum = 0.0f64;
            let mut counted = 0usize;
            for r in results {
                let (loss, g) = r.map_err(|e| Error::Diverged {
                    epoch,
                    detail: e.to_string(),
                })?;
                if let Some(g) = g {
                    grads.add_assign(&g)?;
                    loss_sum += loss;
                    counted += 1;
                }
            }
            if counted == 0 {
                continue; // nothing masked in this batch
            }
            grads.scale(1.0 / counted as f64);
            let batch_loss = loss_sum / counted as f64;
            if !batch_loss.is_finite() {
                return Err(Error::Diverged {
                    epoch,
                    detail: format!("batch loss {batch_loss}"),
                });
            }
            if !options.frozen {
                adam.step(&mut params, &grads, lr)?;
            }
            epoch_loss += batch_loss;
            batches += 1;
        }
        let train_loss = epoch_loss / batches.max(1) as f64;

        let val_loss = validate(model_cfg, &params, val, task, pretrain_cfg.seed, epoch, options.threads)
            .map_err(|e| Error::Diverged {
                epoch,
                detail: e.to_string(),
            })?;

        if best.as_ref().map_or(true, |(_, b, _)| val_loss < *b) {
            best = Some((epoch, val_loss, params.clone()));
        }
        final_params = params.clone();
        history.push(EpochStats {
            epoch,
            lr,
            train_loss,
            val_loss,
        });
    }

    let (best_epoch, best_val_loss, best_params) = best.expect("at least one epoch ran");
    Ok(PretrainRun {
        history,
        best_epoch,
        best_val_loss,
        best_params,
        final_params,
        target_coverage: coverage,
    })
}

enum BatchTask {
    MaskedFeature { targets: Vec<usize>, mask: FeatureMask },
    Mlm { rate: f64 },
}

type SampleResult = Result<(f64, Option<Gradients<f32>>)>;

#[allow(clippy::too_many_arguments)]
fn run_batch(
    model_cfg: &ModelConfig,
    params: &Params<f32>,
    train: &[PretrainSample],
    chunk: &[usize],
    batch_task: &BatchTask,
    seed: u64,
    epoch: u32,
    threads: usize,
) -> Vec<SampleResult> {
    let eval = |&idx: &usize| -> SampleResult {
        let sample = &train[idx];
        sample_loss(model_cfg, params, sample, batch_task, seed, epoch, idx, true)
    };
    if threads > 1 {
        chunk.par_iter().map(eval).collect()
    } else {
        chunk.iter().map(eval).collect()
    }
}

/// Forward one sample, returning its loss and (optionally) gradients.
/// MLM samples where no row was masked contribute nothing.
#[allow(clippy::too_many_arguments)]
fn sample_loss(
    model_cfg: &ModelConfig,
    params: &Params<f32>,
    sample: &PretrainSample,
    batch_task: &BatchTask,
    seed: u64,
    epoch: u32,
    sample_idx: usize,
    with_grads: bool,
) -> SampleResult {
    let pmask = PaddingMask::from_valid_len(sample.x.shape()[0], sample.valid_len)?;
    let mut tape = Tape::new();
    let loss_node = match batch_task {
        BatchTask::MaskedFeature { targets, mask } => {
            let pred = forward(&mut tape, params, model_cfg, &sample.x, &sample.ctx, mask, &pmask, None)?;
            masked_feature_loss(&mut tape, pred, &sample.x, targets, &pmask)?
        }
        BatchTask::Mlm { rate } => {
            let mut rng = mask_rng(seed, epoch, sample_idx);
            let (corrupted, rows) = mlm_mask(&sample.x, &pmask, *rate, &mut rng)?;
            if rows.is_empty() {
                return Ok((0.0, None));
            }
            let pred = forward(
                &mut tape,
                params,
                model_cfg,
                &corrupted,
                &sample.ctx,
                &FeatureMask::all_present(),
                &pmask,
                None,
            )?;
            mlm_loss(&mut tape, pred, &sample.x, &rows)?
        }
    };
    let loss = tape.value(loss_node).first() as f64;
    let grads = if with_grads {
        Some(tape.backward(loss_node)?)
    } else {
        None
    };
    Ok((loss, grads))
}

/// Mean validation loss under the frozen per-epoch partition (or a
/// deterministic per-epoch mask for the timestep task).
fn validate(
    model_cfg: &ModelConfig,
    params: &Params<f32>,
    val: &[PretrainSample],
    task: &PretrainTask,
    seed: u64,
    epoch: u32,
    threads: usize,
) -> Result<f64> {
    let batch_task = match task {
        PretrainTask::MaskedFeature => {
            let targets = validation_partition(seed, epoch);
            let mask = FeatureMask::hiding(&targets)?;
            BatchTask::MaskedFeature { targets, mask }
        }
        PretrainTask::Mlm(mlm) => BatchTask::Mlm { rate: mlm.mask_rate },
    };
    // the mask stream is offset so validation masks differ from training
    let run = |(idx, sample): (usize, &PretrainSample)| -> SampleResult {
        sample_loss(model_cfg, params, sample, &batch_task, seed ^ 0x7a1, epoch, idx, false)
    };
    let results: Vec<SampleResult> = if threads > 1 {
        val.par_iter().enumerate().map(run).collect()
    } else {
        val.iter().enumerate().map(run).collect()
    };
    let mut sum = 0.0;
    let mut counted = 0usize;
    for r in results {
        let (loss, _) = r?;
        sum += loss;
        counted += 1;
    }
    Ok(sum / counted.max(1) as f64)
}
