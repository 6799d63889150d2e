//! Transformer forecasters over the ILI window, with and without
//! weather, plus the variant that runs temperature through the
//! pretrained weather encoder.

use crate::error::{Error, Result};
use crate::ili::{epiweek_start_date, epiweek_year, IliSeries};
use crate::tasks::{rolling_tasks, tasks_for_year, ForecastTask, SequentialSplit};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use wf_model::{
    forward_hidden, init_transformer_layer, spatiotemporal_encoding, transformer_layer,
    FeatureMask, LayerDims, ModelConfig, PaddingMask, SpatioTemporalContext,
};
use wf_tensor::params::init_uniform;
use wf_tensor::{nn, AdamState, Gradients, LrSchedule, NodeId, Params, Tape, Tensor};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FluVariant {
    /// ILI percent and patient counts only.
    NoWeather,
    /// Weekly mean temperature appended as a raw input column.
    Weather,
    /// Temperature encoded by the weather encoder, then concatenated.
    WfEncoder,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FluHeadConfig {
    pub hidden: usize,
    pub layers: usize,
    pub heads: usize,
    pub d_ff: usize,
    pub horizon: usize,
    /// Interpret outputs beyond step 1 as cumulative deltas from the
    /// last known value. Disabled, only the first step gets the
    /// last-value offset.
    pub cumulative_residual: bool,
}

impl Default for FluHeadConfig {
    fn default() -> Self {
        Self {
            hidden: 64,
            layers: 3,
            heads: 4,
            d_ff: 128,
            horizon: 10,
            cumulative_residual: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FluOptimConfig {
    pub lr: f64,
    pub epochs: u32,
    pub warmup_epochs: u32,
    pub decay_factor: f64,
    pub batch_size: usize,
    pub seed: u64,
    /// Take every n-th training task; 1 uses them all.
    pub task_stride: usize,
}

impl Default for FluOptimConfig {
    fn default() -> Self {
        Self {
            lr: 9e-4,
            epochs: 30,
            warmup_epochs: 5,
            decay_factor: 0.95,
            batch_size: 32,
            seed: 0,
            task_stride: 1,
        }
    }
}

/// Standardization statistics from the training span.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FluStats {
    pub ili_mean: f64,
    pub ili_std: f64,
    pub patients_mean: f64,
    pub patients_std: f64,
    pub temp_mean: f64,
    pub temp_std: f64,
}

impl FluStats {
    pub fn compute(series: &IliSeries, train_len: usize) -> Result<Self> {
        if train_len < 2 {
            return Err(Error::SeriesTooShort {
                got: train_len,
                need: 2,
            });
        }
        let stat = |values: &dyn Fn(usize) -> f64| {
            let n = train_len as f64;
            let mean = (0..train_len).map(values).sum::<f64>() / n;
            let var = (0..train_len)
                .map(|i| {
                    let d = values(i) - mean;
                    d * d
                })
                .sum::<f64>()
                / n;
            (mean, var.sqrt().max(1e-9))
        };
        let (ili_mean, ili_std) = stat(&|i| series.records[i].ili_percent);
        let (patients_mean, patients_std) = stat(&|i| series.records[i].num_patients);
        let (temp_mean, temp_std) = stat(&|i| series.mean_temp[i]);
        Ok(Self {
            ili_mean,
            ili_std,
            patients_mean,
            patients_std,
            temp_mean,
            temp_std,
        })
    }

    pub fn standardize_ili(&self, v: f64) -> f64 {
        (v - self.ili_mean) / self.ili_std
    }

    pub fn destandardize_ili(&self, v: f64) -> f64 {
        v * self.ili_std + self.ili_mean
    }
}

/// A trained forecaster with everything needed for inference.
pub struct FluForecaster {
    pub variant: FluVariant,
    pub head: FluHeadConfig,
    pub wf_config: Option<ModelConfig>,
    pub params: Params<f32>,
    pub stats: FluStats,
    pub window: usize,
    pub history: Vec<(u32, f64, f64)>,
    pub best_epoch: u32,
    pub best_val_mse: f64,
}

fn input_width(variant: FluVariant, wf: Option<&ModelConfig>) -> usize {
    match variant {
        FluVariant::NoWeather => 2,
        FluVariant::Weather => 3,
        FluVariant::WfEncoder => 2 + wf.map(|c| c.d_model).unwrap_or(0),
    }
}

/// Initialize head parameters (and keep any weather-encoder entries the
/// caller preloaded into `params`).
pub fn init_flu_head(
    params: &mut Params<f32>,
    variant: FluVariant,
    head: &FluHeadConfig,
    wf: Option<&ModelConfig>,
    seed: u64,
) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = input_width(variant, wf);
    params.insert("head.in.w", init_uniform(&[width, head.hidden], width, &mut rng));
    params.insert("head.in.b", Tensor::zeros(&[head.hidden]));
    let dims = LayerDims {
        d_model: head.hidden,
        n_heads: head.heads,
        d_ff: head.d_ff,
    };
    for layer in 0..head.layers {
        init_transformer_layer(params, &dims, &format!("head.layer{layer}"), &mut rng);
    }
    params.insert(
        "head.out.w",
        init_uniform(&[head.hidden, head.horizon], head.hidden, &mut rng),
    );
    params.insert("head.out.b", Tensor::zeros(&[head.horizon]));
}

/// Forward one window, returning standardized forecasts `[1, horizon]`.
#[allow(clippy::too_many_arguments)]
pub fn forward_flu(
    tape: &mut Tape<f32>,
    params: &Params<f32>,
    variant: FluVariant,
    head: &FluHeadConfig,
    wf_config: Option<&ModelConfig>,
    series: &IliSeries,
    stats: &FluStats,
    task: &ForecastTask,
) -> Result<NodeId> {
    let range = task.history();
    let w = range.len();
    let origin_week = series.records[task.origin].epiweek;
    let start_date = epiweek_start_date(series.records[range.start].epiweek)?;
    let ctx = SpatioTemporalContext::new(series.latitude, series.longitude, start_date, 7)?;

    let mut base = Vec::with_capacity(w * 2);
    for i in range.clone() {
        base.push(stats.standardize_ili(series.records[i].ili_percent) as f32);
        base.push(((series.records[i].num_patients - stats.patients_mean) / stats.patients_std) as f32);
    }
    let base = tape.constant(Tensor::from_vec(&[w, 2], base)?)?;

    let features = match variant {
        FluVariant::NoWeather => base,
        FluVariant::Weather => {
            let temp: Vec<f32> = range
                .clone()
                .map(|i| ((series.mean_temp[i] - stats.temp_mean) / stats.temp_std) as f32)
                .collect();
            let temp = tape.constant(Tensor::from_vec(&[w, 1], temp)?)?;
            tape.concat_cols(&[base, temp])?
        }
        FluVariant::WfEncoder => {
            let cfg = wf_config.ok_or_else(|| {
                Error::InvalidArg("weather-encoder variant needs a model config".into())
            })?;
            let mut x31 = Tensor::<f32>::zeros(&[w, wf_model::IN_DIM]);
            for (row, i) in range.clone().enumerate() {
                x31.set2(row, 0, ((series.mean_temp[i] - stats.temp_mean) / stats.temp_std) as f32);
            }
            let fmask = FeatureMask::from_present(&[0])?;
            let pmask = PaddingMask::all_real(w);
            let hidden = forward_hidden(tape, params, cfg, &x31, &ctx, &fmask, &pmask, None)?;
            tape.concat_cols(&[base, hidden])?
        }
    };

    let mut h = nn::linear(tape, params, features, "head.in.w", "head.in.b")?;
    let pe = spatiotemporal_encoding::<f32>(&ctx, w, head.hidden)?;
    let pe = tape.constant(pe)?;
    h = tape.add(h, pe)?;
    let dims = LayerDims {
        d_model: head.hidden,
        n_heads: head.heads,
        d_ff: head.d_ff,
    };
    for layer in 0..head.layers {
        h = transformer_layer(
            tape,
            params,
            &dims,
            h,
            None,
            &format!("head.layer{layer}"),
            0.0,
            &mut None,
        )?;
    }
    let last = tape.row(h, w - 1)?;
    let out = nn::linear(tape, params, last, "head.out.w", "head.out.b")?;

    // residual composition from the last known (standardized) value
    let last_ili = stats.standardize_ili(series.records[task.origin].ili_percent) as f32;
    let composed = if head.cumulative_residual {
        let mut tri = Tensor::<f32>::zeros(&[head.horizon, head.horizon]);
        for j in 0..head.horizon {
            for k in j..head.horizon {
                tri.set2(j, k, 1.0);
            }
        }
        let tri = tape.constant(tri)?;
        let cumsum = tape.matmul(out, tri)?;
        let offset = tape.constant(Tensor::filled(&[1, head.horizon], last_ili))?;
        tape.add(cumsum, offset)?
    } else {
        let mut offset = Tensor::<f32>::zeros(&[1, head.horizon]);
        offset.set2(0, 0, last_ili);
        let offset = tape.constant(offset)?;
        tape.add(out, offset)?
    };
    let _ = origin_week;
    Ok(composed)
}

/// Destandardized forecasts for a task.
pub fn forecast_flu(model: &FluForecaster, series: &IliSeries, task: &ForecastTask) -> Result<Vec<f64>> {
    let mut tape = Tape::new();
    let node = forward_flu(
        &mut tape,
        &model.params,
        model.variant,
        &model.head,
        model.wf_config.as_ref(),
        series,
        &model.stats,
        task,
    )?;
    Ok(tape
        .value(node)
        .data()
        .iter()
        .map(|&v| model.stats.destandardize_ili(v as f64))
        .collect())
}

/// Train a forecaster for one sequential split.
///
/// Training tasks roll over the training years only; the best epoch is
/// chosen on the validation year's pooled MSE.
#[allow(clippy::too_many_arguments)]
pub fn train_flu(
    series: &IliSeries,
    split: &SequentialSplit,
    variant: FluVariant,
    head: &FluHeadConfig,
    optim: &FluOptimConfig,
    wf: Option<(&ModelConfig, &Params<f32>)>,
    window: usize,
    threads: usize,
) -> Result<FluForecaster> {
    let train_len = series
        .records
        .iter()
        .take_while(|r| epiweek_year(r.epiweek) <= split.train_year_end)
        .count();
    let stats = FluStats::compute(series, train_len)?;

    let mut params = Params::new();
    if let Some((cfg, encoder)) = wf {
        params.load_from(encoder)?;
        // fresh runs may not have every encoder tensor preloaded
        let reference = wf_model::init_params::<f32>(cfg, optim.seed)?;
        for (name, tensor) in reference.iter() {
            if wf_model::is_encoder_param(name) && !params.contains(name) {
                params.insert(name.clone(), tensor.clone());
            }
        }
        params.remove("output_proj.w");
        params.remove("output_proj.b");
    }
    init_flu_head(&mut params, variant, head, wf.map(|(c, _)| c), optim.seed);

    let train_tasks: Vec<ForecastTask> = rolling_tasks(train_len, window, head.horizon)?
        .into_iter()
        .step_by(optim.task_stride.max(1))
        .collect();
    let val_tasks = tasks_for_year(series, window, head.horizon, split.val_year)?;
    if val_tasks.is_empty() {
        return Err(Error::InvalidArg(format!(
            "no validation tasks for {}",
            split.val_year
        )));
    }

    let schedule = LrSchedule::new(optim.lr, optim.warmup_epochs, optim.decay_factor)
        .map_err(Error::Tensor)?;
    let mut adam = AdamState::new();
    let mut data_rng = ChaCha8Rng::seed_from_u64(optim.seed.wrapping_add(0xf1));
    let wf_config = wf.map(|(c, _)| c.clone());

    let mut history = Vec::new();
    let mut best: Option<(u32, f64, Params<f32>)> = None;
    for epoch in 0..optim.epochs {
        let lr = schedule.lr_at(epoch);
        let mut order: Vec<usize> = (0..train_tasks.len()).collect();
        order.shuffle(&mut data_rng);

        let mut epoch_loss = 0.0;
        let mut batches = 0usize;
        for chunk in order.chunks(optim.batch_size) {
            let eval = |&ti: &usize| -> Result<(f64, Gradients<f32>)> {
                let task = &train_tasks[ti];
                let mut tape = Tape::new();
                let pred = forward_flu(
                    &mut tape,
                    &params,
                    variant,
                    head,
                    wf_config.as_ref(),
                    series,
                    &stats,
                    task,
                )?;
                let truth = target_tensor(series, &stats, task)?;
                let truth = tape.constant(truth)?;
                let loss = nn::mse(&mut tape, pred, truth)?;
                let value = tape.value(loss).first() as f64;
                let grads = tape.backward(loss)?;
                Ok((value, grads))
            };
            let results: Vec<Result<(f64, Gradients<f32>)>> = if threads > 1 {
                chunk.par_iter().map(eval).collect()
            } else {
                chunk.iter().map(eval).collect()
            };
            let mut grads = Gradients::empty();
            let mut loss_sum = 0.0;
            for r in results {
                let (l, g) = r?;
                grads.add_assign(&g)?;
                loss_sum += l;
            }
            grads.scale(1.0 / chunk.len() as f64);
            adam.step(&mut params, &grads, lr)?;
            epoch_loss += loss_sum / chunk.len() as f64;
            batches += 1;
        }
        let train_mse = epoch_loss / batches.max(1) as f64;

        let val_mse = {
            let eval = |task: &ForecastTask| -> Result<f64> {
                let mut tape = Tape::new();
                let pred = forward_flu(
                    &mut tape,
                    &params,
                    variant,
                    head,
                    wf_config.as_ref(),
                    series,
                    &stats,
                    task,
                )?;
                let truth = target_tensor(series, &stats, task)?;
                let truth = tape.constant(truth)?;
                let loss = nn::mse(&mut tape, pred, truth)?;
                Ok(tape.value(loss).first() as f64)
            };
            let losses: Vec<Result<f64>> = if threads > 1 {
                val_tasks.par_iter().map(eval).collect()
            } else {
                val_tasks.iter().map(eval).collect()
            };
            let mut sum = 0.0;
            for l in losses {
                sum += l?;
            }
            sum / val_tasks.len() as f64
        };

        if best.as_ref().map_or(true, |(_, b, _)| val_mse < *b) {
            best = Some((epoch, val_mse, params.clone()));
        }
        history.push((epoch, train_mse, val_mse));
    }

    let (best_epoch, best_val_mse, best_params) = best.expect("at least one epoch");
    Ok(FluForecaster {
        variant,
        head: head.clone(),
        wf_config,
        params: best_params,
        stats,
        window,
        history,
        best_epoch,
        best_val_mse,
    })
}

fn target_tensor(series: &IliSeries, stats: &FluStats, task: &ForecastTask) -> Result<Tensor<f32>> {
    let data: Vec<f32> = task
        .targets()
        .map(|i| stats.standardize_ili(series.records[i].ili_percent) as f32)
        .collect();
    Ok(Tensor::from_vec(&[1, task.horizon], data)?)
}
