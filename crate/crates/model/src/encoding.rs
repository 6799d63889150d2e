//! Spatiotemporal positional encoding.
//!
//! Channels are interleaved in groups of four: temporal sine, temporal
//! cosine, latitude sine, longitude cosine, each at frequency
//! `10000^(-4i/d)`. The temporal coordinate of sequence index `t` is the
//! absolute day index `start_day_index + t * granularity_days`, counted
//! from 1984-01-01, which jointly encodes year, season, and position.

use crate::config::ModelConfig;
use crate::error::{Error, Result};
use chrono::{Datelike, NaiveDate};
use wf_tensor::{Real, Tensor};

/// Day zero of the temporal coordinate.
pub fn epoch() -> NaiveDate {
    NaiveDate::from_ymd_opt(1984, 1, 1).expect("epoch date")
}

/// Where and when a series starts, and how far apart its rows are.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpatioTemporalContext {
    pub latitude: f64,
    pub longitude: f64,
    pub year: i32,
    pub start_day_index: i64,
    pub granularity_days: u16,
}

impl SpatioTemporalContext {
    /// Coordinates are normalized into [-180, 180) before validation, so
    /// any whole number of 360-degree turns yields the identical context.
    pub fn new(
        latitude: f64,
        longitude: f64,
        start_date: NaiveDate,
        granularity_days: u16,
    ) -> Result<Self> {
        let lat = wrap_degrees(latitude);
        let lon = wrap_degrees(longitude);
        if !(-90.0..=90.0).contains(&lat) {
            return Err(Error::BadCoordinate(format!(
                "latitude {latitude} (wrapped {lat})"
            )));
        }
        Ok(Self {
            latitude: lat,
            longitude: lon,
            year: start_date.year(),
            start_day_index: (start_date - epoch()).num_days(),
            granularity_days,
        })
    }

    pub fn position(&self, t: usize) -> f64 {
        (self.start_day_index + t as i64 * self.granularity_days as i64) as f64
    }
}

fn wrap_degrees(deg: f64) -> f64 {
    let w = (deg + 180.0).rem_euclid(360.0) - 180.0;
    // rem_euclid can return the upper bound for values like -180 - 1e-14
    if w >= 180.0 {
        w - 360.0
    } else {
        w
    }
}

/// Build the N x d_model encoding matrix for a series.
pub fn spatiotemporal_encoding<T: Real>(
    ctx: &SpatioTemporalContext,
    n: usize,
    d_model: usize,
) -> Result<Tensor<T>> {
    if d_model == 0 || d_model % 4 != 0 {
        return Err(Error::InvalidConfig(format!(
            "d_model {d_model} must be a positive multiple of 4"
        )));
    }
    let lat_rad = ctx.latitude.to_radians();
    let lon_rad = ctx.longitude.to_radians();
    let quarters = d_model / 4;
    let mut data = Vec::with_capacity(n * d_model);
    for t in 0..n {
        let pos = ctx.position(t);
        for i in 0..quarters {
            let omega = 10000f64.powf(-4.0 * i as f64 / d_model as f64);
            data.push(T::from_f64_val((pos * omega).sin()));
            data.push(T::from_f64_val((pos * omega).cos()));
            data.push(T::from_f64_val((lat_rad * omega).sin()));
            data.push(T::from_f64_val((lon_rad * omega).cos()));
        }
    }
    Ok(Tensor::from_vec(&[n, d_model], data)?)
}

/// Convenience wrapper taking the dimension from a config.
pub fn encoding_for_config<T: Real>(
    ctx: &SpatioTemporalContext,
    n: usize,
    cfg: &ModelConfig,
) -> Result<Tensor<T>> {
    spatiotemporal_encoding(ctx, n, cfg.d_model)
}
