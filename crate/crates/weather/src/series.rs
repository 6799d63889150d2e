//! Weather series: the N x 31 matrices everything else consumes.

use crate::catalog::MEASUREMENT_COUNT;
use crate::error::{Error, Result};
use chrono::{Datelike, Days, NaiveDate};

/// Temporal spacing of a series.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Granularity {
    Daily,
    Weekly,
    Monthly,
}

impl Granularity {
    pub fn days(self) -> u16 {
        match self {
            Granularity::Daily => 1,
            Granularity::Weekly => 7,
            Granularity::Monthly => 30,
        }
    }

    pub fn from_days(days: u16) -> Result<Self> {
        match days {
            1 => Ok(Granularity::Daily),
            7 => Ok(Granularity::Weekly),
            30 => Ok(Granularity::Monthly),
            other => Err(Error::InvalidArg(format!("granularity {other} days"))),
        }
    }
}

/// One located, dated weather series of shape N x 31. Rows at index
/// `valid_len` and beyond are padding and stay all-zero.
#[derive(Clone, Debug, PartialEq)]
pub struct WeatherSeries {
    values: Vec<f64>,
    n_rows: usize,
    pub granularity_days: u16,
    pub latitude: f64,
    pub longitude: f64,
    pub start_date: NaiveDate,
    valid_len: usize,
    pub standardized: bool,
}

impl WeatherSeries {
    pub fn new(
        values: Vec<f64>,
        n_rows: usize,
        granularity_days: u16,
        latitude: f64,
        longitude: f64,
        start_date: NaiveDate,
        valid_len: usize,
    ) -> Result<Self> {
        if values.len() != n_rows * MEASUREMENT_COUNT {
            return Err(Error::InvalidArg(format!(
                "{} values for {n_rows} rows of {MEASUREMENT_COUNT}",
                values.len()
            )));
        }
        if valid_len > n_rows {
            return Err(Error::InvalidArg(format!(
                "valid_len {valid_len} exceeds {n_rows} rows"
            )));
        }
        if !(-90.0..=90.0).contains(&latitude) {
            return Err(Error::OutOfRange(format!("latitude {latitude}")));
        }
        if !(-180.0..180.0).contains(&longitude) {
            return Err(Error::OutOfRange(format!("longitude {longitude}")));
        }
        let mut s = Self {
            values,
            n_rows,
            granularity_days,
            latitude,
            longitude,
            start_date,
            valid_len,
            standardized: false,
        };
        s.zero_padding_rows();
        Ok(s)
    }

    /// All-zero series of the given length, fully padded.
    pub fn zeroed(
        n_rows: usize,
        granularity_days: u16,
        latitude: f64,
        longitude: f64,
        start_date: NaiveDate,
    ) -> Result<Self> {
        Self::new(
            vec![0.0; n_rows * MEASUREMENT_COUNT],
            n_rows,
            granularity_days,
            latitude,
            longitude,
            start_date,
            0,
        )
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn valid_len(&self) -> usize {
        self.valid_len
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, row: usize, m: usize) -> f64 {
        self.values[row * MEASUREMENT_COUNT + m]
    }

    /// Write a value in a valid row.
    pub fn set(&mut self, row: usize, m: usize, v: f64) -> Result<()> {
        if row >= self.valid_len {
            return Err(Error::InvalidArg(format!(
                "row {row} is padding (valid_len {})",
                self.valid_len
            )));
        }
        self.values[row * MEASUREMENT_COUNT + m] = v;
        Ok(())
    }

    pub fn set_valid_len(&mut self, valid_len: usize) -> Result<()> {
        if valid_len > self.n_rows {
            return Err(Error::InvalidArg(format!(
                "valid_len {valid_len} exceeds {} rows",
                self.n_rows
            )));
        }
        self.valid_len = valid_len;
        self.zero_padding_rows();
        Ok(())
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * MEASUREMENT_COUNT..(row + 1) * MEASUREMENT_COUNT]
    }

    fn zero_padding_rows(&mut self) {
        for v in &mut self.values[self.valid_len * MEASUREMENT_COUNT..] {
            *v = 0.0;
        }
    }

    pub fn padding_rows_are_zero(&self) -> bool {
        self.values[self.valid_len * MEASUREMENT_COUNT..]
            .iter()
            .all(|&v| v == 0.0)
    }
}

/// Per-measurement mean and standard deviation, computed on the
/// training split only.
#[derive(Clone, Debug, PartialEq)]
pub struct StandardizationStats {
    pub mean: [f64; MEASUREMENT_COUNT],
    pub std: [f64; MEASUREMENT_COUNT],
    pub split_id: String,
}

impl StandardizationStats {
    /// Pool all valid rows of the given series.
    pub fn compute<'a>(
        series: impl Iterator<Item = &'a WeatherSeries> + Clone,
        split_id: &str,
    ) -> Result<Self> {
        let mut count = 0usize;
        let mut mean = [0.0; MEASUREMENT_COUNT];
        for s in series.clone() {
            for row in 0..s.valid_len() {
                for (m, acc) in mean.iter_mut().enumerate() {
                    *acc += s.get(row, m);
                }
                count += 1;
            }
        }
        if count == 0 {
            return Err(Error::InvalidArg("no valid rows to compute stats".into()));
        }
        for acc in &mut mean {
            *acc /= count as f64;
        }
        let mut var = [0.0; MEASUREMENT_COUNT];
        for s in series {
            for row in 0..s.valid_len() {
                for (m, acc) in var.iter_mut().enumerate() {
                    let d = s.get(row, m) - mean[m];
                    *acc += d * d;
                }
            }
        }
        let mut std = [0.0; MEASUREMENT_COUNT];
        for m in 0..MEASUREMENT_COUNT {
            std[m] = (var[m] / count as f64).sqrt();
        }
        Ok(Self {
            mean,
            std,
            split_id: split_id.to_string(),
        })
    }
}

/// Apply `x' = (x - mean) / std` per measurement over the valid rows.
/// Padding rows stay zero.
pub fn standardize(series: &mut WeatherSeries, stats: &StandardizationStats) -> Result<()> {
    if let Some(m) = stats.std.iter().position(|&s| s <= 0.0) {
        return Err(Error::ZeroStd(m));
    }
    for row in 0..series.valid_len() {
        for m in 0..MEASUREMENT_COUNT {
            let v = (series.get(row, m) - stats.mean[m]) / stats.std[m];
            series.set(row, m, v)?;
        }
    }
    series.standardized = true;
    Ok(())
}

/// Exact inverse of [`standardize`].
pub fn destandardize(series: &mut WeatherSeries, stats: &StandardizationStats) -> Result<()> {
    if let Some(m) = stats.std.iter().position(|&s| s <= 0.0) {
        return Err(Error::ZeroStd(m));
    }
    for row in 0..series.valid_len() {
        for m in 0..MEASUREMENT_COUNT {
            let v = series.get(row, m) * stats.std[m] + stats.mean[m];
            series.set(row, m, v)?;
        }
    }
    series.standardized = false;
    Ok(())
}

/// Aggregate a daily series into non-overlapping window means.
///
/// Weekly windows are 7 days anchored at the series start; monthly
/// windows are calendar months. A trailing partial window is dropped.
pub fn aggregate(series: &WeatherSeries, target: Granularity) -> Result<WeatherSeries> {
    if series.granularity_days != 1 {
        return Err(Error::NotDaily(series.granularity_days));
    }
    let windows: Vec<(usize, usize)> = match target {
        Granularity::Daily => {
            return Err(Error::InvalidArg("aggregate target must be weekly or monthly".into()))
        }
        Granularity::Weekly => {
            let full = series.valid_len() / 7;
            (0..full).map(|w| (w * 7, 7)).collect()
        }
        Granularity::Monthly => monthly_windows(series.start_date, series.valid_len()),
    };

    let n_out = windows.len();
    let mut values = vec![0.0; n_out * MEASUREMENT_COUNT];
    for (out_row, &(start, len)) in windows.iter().enumerate() {
        for m in 0..MEASUREMENT_COUNT {
            let mut acc = 0.0;
            for d in start..start + len {
                acc += series.get(d, m);
            }
            values[out_row * MEASUREMENT_COUNT + m] = acc / len as f64;
        }
    }
    let start_date = match windows.first() {
        Some(&(start, _)) => series
            .start_date
            .checked_add_days(Days::new(start as u64))
            .ok_or_else(|| Error::InvalidArg("date overflow".into()))?,
        None => series.start_date,
    };
    let mut out = WeatherSeries::new(
        values,
        n_out,
        target.days(),
        series.latitude,
        series.longitude,
        start_date,
        n_out,
    )?;
    out.standardized = series.standardized;
    Ok(out)
}

/// Full calendar months covered by `[start_date, start_date + valid_len)`,
/// as (day offset, length) pairs. A leading partial month is skipped.
///
/// Stored years have exactly 365 rows (leap days are dropped at
/// ingestion), so month lengths follow the non-leap calendar.
fn monthly_windows(start_date: NaiveDate, valid_len: usize) -> Vec<(usize, usize)> {
    const LENGTHS: [usize; 12] = [31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31];
    let mut month = start_date.month0() as usize;
    let day_in_month = start_date.day0() as usize;
    let mut offset = if day_in_month == 0 {
        0
    } else {
        // skip the leading partial month
        let skip = LENGTHS[month] - day_in_month;
        month = (month + 1) % 12;
        skip
    };
    let mut windows = Vec::new();
    while offset + LENGTHS[month] <= valid_len {
        windows.push((offset, LENGTHS[month]));
        offset += LENGTHS[month];
        month = (month + 1) % 12;
    }
    windows
}
