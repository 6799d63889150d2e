//! Dataset assembly: tiles to training samples.

use crate::error::{Error, Result};
use wf_model::SpatioTemporalContext;
use wf_tensor::Tensor;
use wf_weather::series::{standardize, StandardizationStats};
use wf_weather::{GridTile, WeatherSeries, MEASUREMENT_COUNT};

/// One pretraining sample: a standardized series with its context.
#[derive(Clone, Debug)]
pub struct PretrainSample {
    pub x: Tensor<f32>,
    pub ctx: SpatioTemporalContext,
    pub valid_len: usize,
}

impl PretrainSample {
    pub fn from_series(series: &WeatherSeries) -> Result<Self> {
        let ctx = SpatioTemporalContext::new(
            series.latitude,
            series.longitude,
            series.start_date,
            series.granularity_days,
        )?;
        let data: Vec<f32> = series.values().iter().map(|&v| v as f32).collect();
        Ok(Self {
            x: Tensor::from_vec(&[series.n_rows(), MEASUREMENT_COUNT], data)?,
            ctx,
            valid_len: series.valid_len(),
        })
    }
}

/// Standardize every series with stats computed on the training tiles,
/// then flatten both splits into sample lists.
pub fn build_samples(
    mut train_tiles: Vec<GridTile>,
    mut val_tiles: Vec<GridTile>,
) -> Result<(Vec<PretrainSample>, Vec<PretrainSample>, StandardizationStats)> {
    let stats = {
        let train_series: Vec<&WeatherSeries> =
            train_tiles.iter().flat_map(|t| t.all_series()).collect();
        StandardizationStats::compute(train_series.iter().copied(), "train")?
    };
    let mut train = Vec::new();
    for tile in &mut train_tiles {
        for s in tile.all_series_mut() {
            standardize(s, &stats)?;
            train.push(PretrainSample::from_series(s)?);
        }
    }
    let mut val = Vec::new();
    for tile in &mut val_tiles {
        for s in tile.all_series_mut() {
            standardize(s, &stats)?;
            val.push(PretrainSample::from_series(s)?);
        }
    }
    if train.is_empty() || val.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok((train, val, stats))
}
