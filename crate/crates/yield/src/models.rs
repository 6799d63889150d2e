//! The five yield predictors: least-squares baseline, CNN-RNN,
//! CNN-Transformer, and the two fine-tuned weather-encoder variants.

use crate::data::{YieldDataset, YieldSample, SOIL_DEPTHS, SOIL_PROPERTIES, WEATHER_SLOTS, WEATHER_VARS, WEEKS};
use crate::error::{Error, Result};
use crate::soil::{
    init_soil_cnn, init_weather_cnn, soil_cnn_features, weather_cnn_features, SOIL_FEATURES,
    WEATHER_CNN_FEATURES,
};
use chrono::NaiveDate;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use wf_model::{
    forward_hidden, init_transformer_layer, spatiotemporal_encoding, transformer_layer,
    FeatureMask, LayerDims, ModelConfig, PaddingMask, SpatioTemporalContext,
};
use wf_tensor::linalg::solve_least_squares;
use wf_tensor::params::init_uniform;
use wf_tensor::{nn, AdamState, Gradients, LrSchedule, NodeId, Params, Real, Tape, Tensor};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum YieldVariant {
    LinearRegression,
    CnnRnn,
    CnnTransformer,
    WfLinear,
    WfTransformer,
}

#[derive(Clone, Debug)]
pub struct YieldModelConfig {
    pub variant: YieldVariant,
    /// Consecutive years fed to the model, current year last.
    pub history_years: usize,
    /// Weather-encoder configuration for the fine-tuned variants.
    pub wf: Option<ModelConfig>,
    /// Per-year reduction width after the weather encoder.
    pub reduce_dim: usize,
    /// Hidden width of the across-years transformer head.
    pub year_hidden: usize,
    pub year_layers: usize,
    pub year_heads: usize,
    pub year_ff: usize,
    pub lstm_hidden: usize,
}

impl YieldModelConfig {
    /// Published defaults: 3 years of history for the linear-head
    /// variant, 7 for the transformer head, 120-wide per-year reduction.
    pub fn defaults(variant: YieldVariant, wf: Option<ModelConfig>) -> Self {
        let history_years = match variant {
            YieldVariant::LinearRegression => 1,
            YieldVariant::CnnRnn | YieldVariant::CnnTransformer => 3,
            YieldVariant::WfLinear => 3,
            YieldVariant::WfTransformer => 7,
        };
        Self {
            variant,
            history_years,
            wf,
            reduce_dim: 120,
            year_hidden: 32,
            year_layers: 2,
            year_heads: 4,
            year_ff: 64,
            lstm_hidden: 32,
        }
    }

    fn needs_wf(&self) -> bool {
        matches!(self.variant, YieldVariant::WfLinear | YieldVariant::WfTransformer)
    }

    /// Width of one per-year feature block.
    fn block_width(&self, practices: usize) -> usize {
        let weather = if self.needs_wf() {
            self.reduce_dim
        } else {
            WEATHER_CNN_FEATURES
        };
        weather + SOIL_FEATURES + practices + 1
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct YieldOptimConfig {
    pub lr: f64,
    pub epochs: u32,
    pub warmup_epochs: u32,
    pub decay_factor: f64,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for YieldOptimConfig {
    fn default() -> Self {
        Self {
            lr: 5e-4,
            epochs: 40,
            warmup_epochs: 10,
            decay_factor: 0.95,
            batch_size: 64,
            seed: 0,
        }
    }
}

/// Standardization statistics from the training fold.
#[derive(Clone, Debug)]
pub struct YieldStats {
    pub weather_mean: [f64; WEATHER_VARS],
    pub weather_std: [f64; WEATHER_VARS],
    pub soil_mean: Vec<f64>,
    pub soil_std: Vec<f64>,
    pub practice_mean: Vec<f64>,
    pub practice_std: Vec<f64>,
    pub yield_mean: f64,
    pub yield_std: f64,
}

impl YieldStats {
    pub fn compute<'a>(samples: impl Iterator<Item = &'a YieldSample> + Clone) -> Result<Self> {
        let mut n = 0usize;
        let mut wsum = [0.0; WEATHER_VARS];
        let mut ssum = vec![0.0; SOIL_PROPERTIES * SOIL_DEPTHS];
        let mut psum: Option<Vec<f64>> = None;
        let mut ysum = 0.0;
        for s in samples.clone() {
            n += 1;
            for week in 0..WEEKS {
                for v in 0..WEATHER_VARS {
                    wsum[v] += s.weather_at(week, v);
                }
            }
            for (i, &v) in s.soil.iter().enumerate() {
                ssum[i] += v;
            }
            let p = psum.get_or_insert_with(|| vec![0.0; s.practices.len()]);
            for (i, &v) in s.practices.iter().enumerate() {
                p[i] += v;
            }
            ysum += s.yield_bu;
        }
        if n == 0 {
            return Err(Error::EmptyFold);
        }
        let nf = n as f64;
        let weather_mean = wsum.map(|v| v / (nf * WEEKS as f64));
        let soil_mean: Vec<f64> = ssum.iter().map(|v| v / nf).collect();
        let practice_mean: Vec<f64> = psum.unwrap_or_default().iter().map(|v| v / nf).collect();
        let yield_mean = ysum / nf;

        let mut wvar = [0.0; WEATHER_VARS];
        let mut svar = vec![0.0; soil_mean.len()];
        let mut pvar = vec![0.0; practice_mean.len()];
        let mut yvar = 0.0;
        for s in samples {
            for week in 0..WEEKS {
                for v in 0..WEATHER_VARS {
                    let d = s.weather_at(week, v) - weather_mean[v];
                    wvar[v] += d * d;
                }
            }
            for (i, &v) in s.soil.iter().enumerate() {
                let d = v - soil_mean[i];
                svar[i] += d * d;
            }
            for (i, &v) in s.practices.iter().enumerate() {
                let d = v - practice_mean[i];
                pvar[i] += d * d;
            }
            let d = s.yield_bu - yield_mean;
            yvar += d * d;
        }
        let floor = 1e-9;
        Ok(Self {
            weather_mean,
            weather_std: wvar.map(|v| (v / (nf * WEEKS as f64)).sqrt().max(floor)),
            soil_mean,
            soil_std: svar.iter().map(|v| (v / nf).sqrt().max(floor)).collect(),
            practice_mean,
            practice_std: pvar.iter().map(|v| (v / nf).sqrt().max(floor)).collect(),
            yield_mean,
            yield_std: (yvar / nf).sqrt().max(floor),
        })
    }

    pub fn standardize_yield(&self, v: f64) -> f64 {
        (v - self.yield_mean) / self.yield_std
    }

    pub fn destandardize_yield(&self, v: f64) -> f64 {
        v * self.yield_std + self.yield_mean
    }

    fn weather_tensor<T: Real>(&self, s: &YieldSample) -> Tensor<T> {
        Tensor::from_fn2(WEEKS, WEATHER_VARS, |w, v| {
            T::from_f64_val((s.weather_at(w, v) - self.weather_mean[v]) / self.weather_std[v])
        })
    }

    fn weather_tensor_31<T: Real>(&self, s: &YieldSample) -> Tensor<T> {
        let mut x = Tensor::<T>::zeros(&[WEEKS, wf_model::IN_DIM]);
        for week in 0..WEEKS {
            for v in 0..WEATHER_VARS {
                let z = (s.weather_at(week, v) - self.weather_mean[v]) / self.weather_std[v];
                x.set2(week, WEATHER_SLOTS[v], T::from_f64_val(z));
            }
        }
        x
    }

    fn soil_tensor<T: Real>(&self, s: &YieldSample) -> Tensor<T> {
        Tensor::from_fn2(SOIL_PROPERTIES, SOIL_DEPTHS, |p, d| {
            let i = p * SOIL_DEPTHS + d;
            T::from_f64_val((s.soil[i] - self.soil_mean[i]) / self.soil_std[i])
        })
    }

    fn practices_tensor<T: Real>(&self, s: &YieldSample) -> Tensor<T> {
        let data: Vec<T> = s
            .practices
            .iter()
            .enumerate()
            .map(|(i, &v)| T::from_f64_val((v - self.practice_mean[i]) / self.practice_std[i]))
            .collect();
        Tensor::from_vec(&[1, data.len()], data).expect("practice row")
    }
}

/// Initialize all learnable tensors for a variant. Weather-encoder
/// parameters are added fresh here; load a pretrained checkpoint over
/// them afterwards with `Params::load_from`.
pub fn init_yield_params(cfg: &YieldModelConfig, practices: usize, seed: u64) -> Result<Params<f32>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = Params::new();
    if cfg.variant == YieldVariant::LinearRegression {
        return Ok(params);
    }
    init_soil_cnn(&mut params, &mut rng);
    let block = cfg.block_width(practices);
    match cfg.variant {
        YieldVariant::LinearRegression => unreachable!(),
        YieldVariant::CnnRnn => {
            init_weather_cnn(&mut params, &mut rng);
            nn::init_lstm(&mut params, "lstm", block, cfg.lstm_hidden, &mut rng);
            params.insert("out.w", init_uniform(&[cfg.lstm_hidden, 1], cfg.lstm_hidden, &mut rng));
            params.insert("out.b", Tensor::zeros(&[1]));
        }
        YieldVariant::CnnTransformer => {
            init_weather_cnn(&mut params, &mut rng);
            init_year_head(&mut params, cfg, block, &mut rng);
        }
        YieldVariant::WfLinear => {
            let wf = cfg.wf.as_ref().ok_or_else(|| Error::InvalidArg("missing encoder config".into()))?;
            let encoder = wf_model::init_params::<f32>(wf, seed.wrapping_add(1))?;
            merge_encoder(&mut params, &encoder);
            params.insert("reduce.w", init_uniform(&[wf.d_model, cfg.reduce_dim], wf.d_model, &mut rng));
            params.insert("reduce.b", Tensor::zeros(&[cfg.reduce_dim]));
            let total = cfg.history_years * block;
            params.insert("head.w", init_uniform(&[total, 1], total, &mut rng));
            params.insert("head.b", Tensor::zeros(&[1]));
        }
        YieldVariant::WfTransformer => {
            let wf = cfg.wf.as_ref().ok_or_else(|| Error::InvalidArg("missing encoder config".into()))?;
            let encoder = wf_model::init_params::<f32>(wf, seed.wrapping_add(1))?;
            merge_encoder(&mut params, &encoder);
            params.insert("reduce.w", init_uniform(&[wf.d_model, cfg.reduce_dim], wf.d_model, &mut rng));
            params.insert("reduce.b", Tensor::zeros(&[cfg.reduce_dim]));
            init_year_head(&mut params, cfg, block, &mut rng);
        }
    }
    Ok(params)
}

fn init_year_head(params: &mut Params<f32>, cfg: &YieldModelConfig, block: usize, rng: &mut ChaCha8Rng) {
    params.insert("embed.w", init_uniform(&[block, cfg.year_hidden], block, rng));
    params.insert("embed.b", Tensor::zeros(&[cfg.year_hidden]));
    let dims = LayerDims {
        d_model: cfg.year_hidden,
        n_heads: cfg.year_heads,
        d_ff: cfg.year_ff,
    };
    for layer in 0..cfg.year_layers {
        init_transformer_layer(params, &dims, &format!("yr.layer{layer}"), rng);
    }
    params.insert("out.w", init_uniform(&[cfg.year_hidden, 1], cfg.year_hidden, rng));
    params.insert("out.b", Tensor::zeros(&[1]));
}

fn merge_encoder(params: &mut Params<f32>, encoder: &Params<f32>) {
    for (name, tensor) in encoder.iter() {
        if wf_model::is_encoder_param(name) {
            params.insert(name.clone(), tensor.clone());
        }
    }
}

/// Forward one county-year through a trainable variant, producing the
/// standardized yield prediction.
pub fn forward_yield<T: Real>(
    tape: &mut Tape<T>,
    params: &Params<T>,
    cfg: &YieldModelConfig,
    dataset: &YieldDataset,
    stats: &YieldStats,
    county: u32,
    year: i32,
) -> Result<NodeId> {
    let history = dataset.history(county, year, cfg.history_years)?;
    let current = history.last().expect("nonempty history");

    // soil is static per county; computed once and shared across years
    let soil = soil_cnn_features(tape, params, &stats.soil_tensor(current))?;

    let mut blocks = Vec::with_capacity(history.len());
    for sample in &history {
        let weather = match cfg.variant {
            YieldVariant::WfLinear | YieldVariant::WfTransformer => {
                let wf = cfg.wf.as_ref().expect("checked at init");
                let x31 = stats.weather_tensor_31(sample);
                let ctx = SpatioTemporalContext::new(
                    sample.latitude,
                    sample.longitude,
                    NaiveDate::from_ymd_opt(sample.year, 1, 1)
                        .ok_or_else(|| Error::InvalidArg(format!("year {}", sample.year)))?,
                    7,
                )?;
                let fmask = FeatureMask::from_present(&WEATHER_SLOTS)?;
                let pmask = PaddingMask::all_real(WEEKS);
                let hidden = forward_hidden(tape, params, wf, &x31, &ctx, &fmask, &pmask, None)?;
                let pooled = tape.mean_rows(hidden)?;
                nn::linear(tape, params, pooled, "reduce.w", "reduce.b")?
            }
            YieldVariant::CnnRnn | YieldVariant::CnnTransformer => {
                weather_cnn_features(tape, params, &stats.weather_tensor(sample))?
            }
            YieldVariant::LinearRegression => {
                return Err(Error::InvalidArg(
                    "the least-squares baseline is fit in closed form".into(),
                ))
            }
        };
        // each year carries the previous year's yield; for the current
        // year that substitutes for the unknown target
        let prev = dataset.past_yield(county, sample.year)?;
        let prev_std = T::from_f64_val(stats.standardize_yield(prev));
        let prev_node = tape.constant(Tensor::from_vec(&[1, 1], vec![prev_std])?)?;
        let practices = tape.constant(stats.practices_tensor(sample))?;
        blocks.push(tape.concat_cols(&[weather, soil, practices, prev_node])?);
    }

    match cfg.variant {
        YieldVariant::WfLinear => {
            let all = tape.concat_cols(&blocks)?;
            Ok(nn::linear(tape, params, all, "head.w", "head.b")?)
        }
        YieldVariant::CnnRnn => {
            let mut h = tape.constant(Tensor::<T>::zeros(&[1, cfg.lstm_hidden]))?;
            let mut c = tape.constant(Tensor::<T>::zeros(&[1, cfg.lstm_hidden]))?;
            for &block in &blocks {
                let (h2, c2) = nn::lstm_cell(tape, params, "lstm", block, h, c)?;
                h = h2;
                c = c2;
            }
            Ok(nn::linear(tape, params, h, "out.w", "out.b")?)
        }
        YieldVariant::CnnTransformer | YieldVariant::WfTransformer => {
            let embedded: Result<Vec<NodeId>> = blocks
                .iter()
                .map(|&b| Ok(nn::linear(tape, params, b, "embed.w", "embed.b")?))
                .collect();
            let seq = tape.concat_rows(&embedded?)?;
            let first_year = history[0].year;
            let ctx = SpatioTemporalContext::new(
                current.latitude,
                current.longitude,
                NaiveDate::from_ymd_opt(first_year, 1, 1)
                    .ok_or_else(|| Error::InvalidArg(format!("year {first_year}")))?,
                365,
            )?;
            let pe = spatiotemporal_encoding::<T>(&ctx, blocks.len(), cfg.year_hidden)?;
            let pe = tape.constant(pe)?;
            let mut h = tape.add(seq, pe)?;
            let dims = LayerDims {
                d_model: cfg.year_hidden,
                n_heads: cfg.year_heads,
                d_ff: cfg.year_ff,
            };
            for layer in 0..cfg.year_layers {
                h = transformer_layer(tape, params, &dims, h, None, &format!("yr.layer{layer}"), 0.0, &mut None)?;
            }
            let last = tape.row(h, blocks.len() - 1)?;
            Ok(nn::linear(tape, params, last, "out.w", "out.b")?)
        }
        YieldVariant::LinearRegression => unreachable!(),
    }
}

/// Samples of the given states that have full history available.
pub fn eligible_keys(dataset: &YieldDataset, states: &[u32], history_years: usize) -> Vec<(u32, i32)> {
    dataset
        .samples
        .iter()
        .filter(|s| states.contains(&s.state_id))
        .filter(|s| dataset.history(s.county_id, s.year, history_years).is_ok())
        .map(|s| (s.county_id, s.year))
        .collect()
}

pub struct TrainedYield {
    pub cfg: YieldModelConfig,
    pub params: Params<f32>,
    pub stats: YieldStats,
    pub history: Vec<(u32, f64, f64)>,
    pub best_epoch: u32,
    pub best_val_rmse: f64,
}

/// Train a gradient variant on the training states, selecting the best
/// epoch by validation RMSE (Bu/Acre).
pub fn train_yield(
    dataset: &YieldDataset,
    cfg: &YieldModelConfig,
    optim: &YieldOptimConfig,
    train_states: &[u32],
    val_states: &[u32],
    pretrained_encoder: Option<&Params<f32>>,
    threads: usize,
) -> Result<TrainedYield> {
    if cfg.variant == YieldVariant::LinearRegression {
        return Err(Error::InvalidArg("use fit_linear_baseline".into()));
    }
    let train_keys = eligible_keys(dataset, train_states, cfg.history_years);
    let val_keys = eligible_keys(dataset, val_states, cfg.history_years);
    if train_keys.is_empty() || val_keys.is_empty() {
        return Err(Error::EmptyFold);
    }
    let stats = YieldStats::compute(
        dataset
            .samples
            .iter()
            .filter(|s| train_states.contains(&s.state_id)),
    )?;

    let mut params = init_yield_params(cfg, dataset.practices_len(), optim.seed)?;
    if let Some(encoder) = pretrained_encoder {
        let filtered = encoder.filtered(wf_model::is_encoder_param);
        params.load_from(&filtered)?;
    }

    let schedule = LrSchedule::new(optim.lr, optim.warmup_epochs, optim.decay_factor)
        .map_err(Error::Tensor)?;
    let mut adam = AdamState::new();
    let mut data_rng = ChaCha8Rng::seed_from_u64(optim.seed.wrapping_add(0x91e1d));

    let mut history = Vec::new();
    let mut best: Option<(u32, f64, Params<f32>)> = None;
    for epoch in 0..optim.epochs {
        let lr = schedule.lr_at(epoch);
        let mut order: Vec<usize> = (0..train_keys.len()).collect();
        order.shuffle(&mut data_rng);

        let mut epoch_loss = 0.0;
        let mut batches = 0usize;
        for chunk in order.chunks(optim.batch_size) {
            let eval = |&ki: &usize| -> Result<(f64, Gradients<f32>)> {
                let (county, year) = train_keys[ki];
                let mut tape = Tape::new();
                let pred = forward_yield(&mut tape, &params, cfg, dataset, &stats, county, year)?;
                let target = stats.standardize_yield(
                    dataset.get(county, year).expect("eligible key").yield_bu,
                ) as f32;
                let target = tape.constant(Tensor::from_vec(&[1, 1], vec![target])?)?;
                let loss = nn::mse(&mut tape, pred, target)?;
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

        let val_rmse = predict_rmse(dataset, cfg, &params, &stats, &val_keys, threads)?;
        if best.as_ref().map_or(true, |(_, b, _)| val_rmse < *b) {
            best = Some((epoch, val_rmse, params.clone()));
        }
        history.push((epoch, train_mse, val_rmse));
    }
    let (best_epoch, best_val_rmse, best_params) = best.expect("at least one epoch");
    Ok(TrainedYield {
        cfg: cfg.clone(),
        params: best_params,
        stats,
        history,
        best_epoch,
        best_val_rmse,
    })
}

/// RMSE in Bu/Acre of a trained variant over the given county-years.
pub fn predict_rmse(
    dataset: &YieldDataset,
    cfg: &YieldModelConfig,
    params: &Params<f32>,
    stats: &YieldStats,
    keys: &[(u32, i32)],
    threads: usize,
) -> Result<f64> {
    if keys.is_empty() {
        return Err(Error::EmptyFold);
    }
    let eval = |&(county, year): &(u32, i32)| -> Result<f64> {
        let mut tape = Tape::new();
        let pred = forward_yield(&mut tape, params, cfg, dataset, stats, county, year)?;
        let pred = stats.destandardize_yield(tape.value(pred).first() as f64);
        let truth = dataset.get(county, year).expect("eligible key").yield_bu;
        Ok((pred - truth) * (pred - truth))
    };
    let results: Vec<Result<f64>> = if threads > 1 {
        keys.par_iter().map(eval).collect()
    } else {
        keys.iter().map(eval).collect()
    };
    let mut sum = 0.0;
    for r in results {
        sum += r?;
    }
    Ok((sum / keys.len() as f64).sqrt())
}

/// Closed-form least-squares baseline on flattened current-year
/// features. Returns the validation RMSE in Bu/Acre.
pub fn fit_linear_baseline(
    dataset: &YieldDataset,
    train_states: &[u32],
    val_states: &[u32],
) -> Result<f64> {
    let train_keys = eligible_keys(dataset, train_states, 1);
    let val_keys = eligible_keys(dataset, val_states, 1);
    if train_keys.is_empty() || val_keys.is_empty() {
        return Err(Error::EmptyFold);
    }
    let stats = YieldStats::compute(
        dataset
            .samples
            .iter()
            .filter(|s| train_states.contains(&s.state_id)),
    )?;

    let feature_row = |county: u32, year: i32| -> Result<Vec<f64>> {
        let s = dataset.get(county, year).expect("eligible key");
        let mut row = Vec::with_capacity(WEEKS * WEATHER_VARS + s.soil.len() + s.practices.len() + 2);
        for week in 0..WEEKS {
            for v in 0..WEATHER_VARS {
                row.push((s.weather_at(week, v) - stats.weather_mean[v]) / stats.weather_std[v]);
            }
        }
        for (i, &v) in s.soil.iter().enumerate() {
            row.push((v - stats.soil_mean[i]) / stats.soil_std[i]);
        }
        for (i, &v) in s.practices.iter().enumerate() {
            row.push((v - stats.practice_mean[i]) / stats.practice_std[i]);
        }
        row.push(stats.standardize_yield(dataset.past_yield(county, year)?));
        row.push(1.0);
        Ok(row)
    };

    let cols = feature_row(train_keys[0].0, train_keys[0].1)?.len();
    let mut design = Vec::with_capacity(train_keys.len() * cols);
    let mut target = Vec::with_capacity(train_keys.len());
    for &(county, year) in &train_keys {
        design.extend(feature_row(county, year)?);
        target.push(stats.standardize_yield(dataset.get(county, year).expect("key").yield_bu));
    }
    let beta = solve_least_squares(&design, train_keys.len(), cols, &target)?;

    let mut sq = 0.0;
    for &(county, year) in &val_keys {
        let row = feature_row(county, year)?;
        let pred_std: f64 = row.iter().zip(&beta).map(|(x, b)| x * b).sum();
        let pred = stats.destandardize_yield(pred_std);
        let truth = dataset.get(county, year).expect("key").yield_bu;
        sq += (pred - truth) * (pred - truth);
    }
    Ok((sq / val_keys.len() as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate_synthetic_yield, SynthYieldSpec};

    fn tiny_wf() -> ModelConfig {
        ModelConfig::tiny(8, 2, 1, 16, 31).unwrap()
    }

    fn tiny_cfg(variant: YieldVariant) -> YieldModelConfig {
        let wf = matches!(variant, YieldVariant::WfLinear | YieldVariant::WfTransformer)
            .then(tiny_wf);
        let mut cfg = YieldModelConfig::defaults(variant, wf);
        cfg.history_years = 2;
        cfg.reduce_dim = 12;
        cfg.year_hidden = 8;
        cfg.year_layers = 1;
        cfg.year_heads = 2;
        cfg.year_ff = 16;
        cfg.lstm_hidden = 8;
        cfg
    }

    fn dataset() -> YieldDataset {
        generate_synthetic_yield(&SynthYieldSpec {
            counties_per_state: 1,
            year_start: 2000,
            year_end: 2006,
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn zero_head_prediction_equals_its_bias() {
        let d = dataset();
        let cfg = tiny_cfg(YieldVariant::WfLinear);
        let mut params = init_yield_params(&cfg, d.practices_len(), 3).unwrap();
        let total = cfg.history_years * cfg.block_width(d.practices_len());
        params.insert("head.w", Tensor::zeros(&[total, 1]));
        params.insert("head.b", Tensor::from_vec(&[1], vec![0.75f32]).unwrap());
        let stats = YieldStats::compute(d.samples.iter()).unwrap();
        let mut tape = Tape::new();
        let pred = forward_yield(&mut tape, &params, &cfg, &d, &stats, 1, 2004).unwrap();
        assert_eq!(tape.value(pred).first(), 0.75);
    }

    #[test]
    fn masked_weather_slots_do_not_affect_predictions() {
        let d = dataset();
        let cfg = tiny_cfg(YieldVariant::WfLinear);
        let mut params = init_yield_params(&cfg, d.practices_len(), 4).unwrap();
        let stats = YieldStats::compute(d.samples.iter()).unwrap();
        let run = |params: &Params<f32>| {
            let mut tape = Tape::new();
            let pred = forward_yield(&mut tape, params, &cfg, &d, &stats, 1, 2004).unwrap();
            tape.value(pred).first()
        };
        let a = run(&params);
        // scaler entries of unmapped measurements are zeroed by the mask
        let table = params.get_mut("scalers.table").unwrap();
        for m in 0..wf_model::IN_DIM {
            if !WEATHER_SLOTS.contains(&m) {
                table.set2(6, m, -77.0);
            }
        }
        let b = run(&params);
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn year_context_changes_transformer_output() {
        // identical inputs for every year: outputs differ only through
        // the positional encoding across year indices
        let d = dataset();
        let cfg = tiny_cfg(YieldVariant::WfTransformer);
        let params = init_yield_params(&cfg, d.practices_len(), 5).unwrap();
        let stats = YieldStats::compute(d.samples.iter()).unwrap();
        let mut tape = Tape::new();
        let p1 = forward_yield(&mut tape, &params, &cfg, &d, &stats, 1, 2003).unwrap();
        let v1 = tape.value(p1).first();
        let mut tape = Tape::new();
        let p2 = forward_yield(&mut tape, &params, &cfg, &d, &stats, 1, 2004).unwrap();
        let v2 = tape.value(p2).first();
        assert_ne!(v1, v2);
    }

    #[test]
    fn linear_baseline_solves_exactly_linear_targets() {
        // enough distinct counties that the static soil block has full
        // column rank and the solution is unique
        let d = generate_synthetic_yield(&SynthYieldSpec {
            counties_per_state: 9,
            year_start: 2000,
            year_end: 2013,
            noise: 0.0,
            july_precip_only: true,
            ..Default::default()
        })
        .unwrap();
        let states = d.states();
        let rmse = fit_linear_baseline(&d, &states[..7], &states[7..]).unwrap();
        assert!(rmse < 1e-6, "rmse {rmse}");
    }

    #[test]
    fn gradient_variants_check_against_finite_differences() {
        use wf_tensor::gradcheck::grad_check;
        let d = dataset();
        for variant in [
            YieldVariant::CnnRnn,
            YieldVariant::CnnTransformer,
            YieldVariant::WfTransformer,
        ] {
            let cfg = tiny_cfg(variant);
            let params = init_yield_params(&cfg, d.practices_len(), 6)
                .unwrap()
                .convert::<f64>();
            let stats = YieldStats::compute(d.samples.iter()).unwrap();
            let err = grad_check(
                |tape, p| {
                    let node = forward_yield(tape, p, &cfg, &d, &stats, 1, 2004)
                        .map_err(|e| wf_tensor::Error::InvalidArg(e.to_string()))?;
                    let sq = tape.mul_elem(node, node)?;
                    tape.sum_all(sq)
                },
                &params,
                1e-5,
                3,
                7,
            )
            .unwrap();
            assert!(err < 1e-4, "{variant:?} err = {err}");
        }
    }

    #[test]
    fn current_year_yield_never_appears_in_inputs() {
        // construct a dataset where the current year's yield is extreme;
        // substituting the past yield means predictions cannot see it
        let mut d = dataset();
        let stats = YieldStats::compute(d.samples.iter()).unwrap();
        let cfg = tiny_cfg(YieldVariant::WfLinear);
        let params = init_yield_params(&cfg, d.practices_len(), 8).unwrap();
        let run = |d: &YieldDataset| {
            let mut tape = Tape::new();
            let pred = forward_yield(&mut tape, &params, &cfg, d, &stats, 1, 2004).unwrap();
            tape.value(pred).first()
        };
        let before = run(&d);
        // changing the target yield of (1, 2004) must not move the input
        let idx = d
            .samples
            .iter()
            .position(|s| s.county_id == 1 && s.year == 2004)
            .unwrap();
        d.samples[idx].yield_bu += 1000.0;
        let d2 = YieldDataset::new(d.samples.clone()).unwrap();
        let after = run(&d2);
        assert_eq!(before.to_bits(), after.to_bits());
    }
}
