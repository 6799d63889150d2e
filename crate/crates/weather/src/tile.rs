//! Grid tiles: 5 x 8 degree rectangles of coordinates with per-year series.

use crate::catalog::{DOWNLOADED_COUNT, ET0, VAD, VAP};
use crate::error::{Error, Result};
use crate::met;
use crate::series::WeatherSeries;
use chrono::NaiveDate;

pub const DAYS_PER_YEAR: usize = 365;
pub const FULL_TILE_COORDS: usize = 160;
pub const TILE_LAT_SPAN: f64 = 5.0;
pub const TILE_LON_SPAN: f64 = 8.0;
pub const GRID_SPACING: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bounds {
    pub lat_min: f64,
    pub lat_max: f64,
    pub lon_min: f64,
    pub lon_max: f64,
}

impl Bounds {
    pub fn tile(lat_min: f64, lon_min: f64) -> Self {
        Self {
            lat_min,
            lat_max: lat_min + TILE_LAT_SPAN,
            lon_min,
            lon_max: lon_min + TILE_LON_SPAN,
        }
    }

    /// The 160 grid coordinates of a full tile at 0.5 degree spacing.
    pub fn grid_coords(&self) -> Vec<(f64, f64)> {
        let lats = (TILE_LAT_SPAN / GRID_SPACING) as usize;
        let lons = (TILE_LON_SPAN / GRID_SPACING) as usize;
        let mut coords = Vec::with_capacity(lats * lons);
        for i in 0..lats {
            for j in 0..lons {
                coords.push((
                    self.lat_min + i as f64 * GRID_SPACING,
                    self.lon_min + j as f64 * GRID_SPACING,
                ));
            }
        }
        coords
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SplitTag {
    Train,
    Val,
}

/// Raw downloaded tile: 28 measurements per day, with missing cells
/// flagged. Years are stored as 365 rows; leap days are dropped at
/// ingestion.
#[derive(Clone, Debug)]
pub struct RawTile {
    pub bounds: Bounds,
    pub coords: Vec<(f64, f64)>,
    pub year_start: i32,
    pub year_end: i32,
    /// Indexed `[coord][year - year_start]`.
    pub data: Vec<Vec<RawYear>>,
}

#[derive(Clone, Debug)]
pub struct RawYear {
    /// Row-major 365 x 28; missing cells hold 0.0 and are flagged.
    pub values: Vec<f64>,
    pub missing: Vec<bool>,
}

impl RawYear {
    pub fn empty() -> Self {
        Self {
            values: vec![0.0; DAYS_PER_YEAR * DOWNLOADED_COUNT],
            missing: vec![true; DAYS_PER_YEAR * DOWNLOADED_COUNT],
        }
    }

    pub fn get(&self, day: usize, m: usize) -> f64 {
        self.values[day * DOWNLOADED_COUNT + m]
    }

    pub fn set(&mut self, day: usize, m: usize, v: f64) {
        self.values[day * DOWNLOADED_COUNT + m] = v;
        self.missing[day * DOWNLOADED_COUNT + m] = false;
    }

    pub fn is_missing(&self, day: usize, m: usize) -> bool {
        self.missing[day * DOWNLOADED_COUNT + m]
    }

    pub fn missing_count(&self) -> usize {
        self.missing.iter().filter(|&&m| m).count()
    }
}

/// Processed tile: per-coordinate yearly series with all 31 measurements.
#[derive(Clone, Debug, PartialEq)]
pub struct GridTile {
    pub bounds: Bounds,
    pub coords: Vec<(f64, f64)>,
    pub year_start: i32,
    pub year_end: i32,
    pub granularity_days: u16,
    pub split: SplitTag,
    /// Indexed `[coord][year - year_start]`.
    pub series: Vec<Vec<WeatherSeries>>,
}

impl GridTile {
    pub fn is_full(&self) -> bool {
        self.coords.len() == FULL_TILE_COORDS
    }

    pub fn years(&self) -> impl Iterator<Item = i32> {
        self.year_start..=self.year_end
    }

    pub fn all_series(&self) -> impl Iterator<Item = &WeatherSeries> {
        self.series.iter().flatten()
    }

    pub fn all_series_mut(&mut self) -> impl Iterator<Item = &mut WeatherSeries> {
        self.series.iter_mut().flatten()
    }
}

/// Compute the three derived measurements and assemble a daily
/// [`GridTile`] from an imputed raw tile.
///
/// ET0 inputs are mapped from the raw measurements: T = T2M, u2 = WS2M,
/// e_s from the saturation curve at T2M, e_a = e_s * RH2M, the slope at
/// T2M, gamma from surface pressure, Rn = (1 - albedo) * shortwave down,
/// and G = 0 at the daily timestep.
pub fn derive_tile(raw: &RawTile) -> Result<GridTile> {
    use crate::catalog::symbol_index;
    let t2m = symbol_index("T2M").expect("catalog");
    let ws2m = symbol_index("WS2M").expect("catalog");
    let ps = symbol_index("PS").expect("catalog");
    let rh2m = symbol_index("RH2M").expect("catalog");
    let alb = symbol_index("ALLSKY_SRF_ALB").expect("catalog");
    let sw = symbol_index("ALLSKY_SFC_SW_DWN").expect("catalog");

    let mut series = Vec::with_capacity(raw.coords.len());
    for (ci, &(lat, lon)) in raw.coords.iter().enumerate() {
        let mut per_year = Vec::with_capacity(raw.data[ci].len());
        for (yi, year_data) in raw.data[ci].iter().enumerate() {
            if let Some(pos) = year_data.missing.iter().position(|&m| m) {
                return Err(Error::InvalidArg(format!(
                    "raw cell {pos} still missing at ({lat}, {lon}); impute first"
                )));
            }
            let year = raw.year_start + yi as i32;
            let start_date = NaiveDate::from_ymd_opt(year, 1, 1)
                .ok_or_else(|| Error::InvalidArg(format!("year {year}")))?;
            let mut s = WeatherSeries::zeroed(DAYS_PER_YEAR, 1, lat, lon, start_date)?;
            s.set_valid_len(DAYS_PER_YEAR)?;
            for day in 0..DAYS_PER_YEAR {
                for m in 0..DOWNLOADED_COUNT {
                    s.set(day, m, year_data.get(day, m))?;
                }
                let temp = year_data.get(day, t2m);
                let rh = year_data.get(day, rh2m).clamp(0.0, 1.0);
                let (vap, vad) = met::actual_vapor_pressure_and_deficit(temp, rh)?;
                let e_s = met::saturation_vapor_pressure(temp)?;
                let rn = (1.0 - year_data.get(day, alb).clamp(0.0, 1.0)) * year_data.get(day, sw);
                let et0 = met::reference_et0(
                    met::svp_slope(temp)?,
                    rn,
                    0.0,
                    temp,
                    year_data.get(day, ws2m).max(0.0),
                    e_s,
                    vap,
                    met::psychrometric_constant(year_data.get(day, ps)),
                )?;
                s.set(day, ET0, et0)?;
                s.set(day, VAP, vap)?;
                s.set(day, VAD, vad)?;
            }
            per_year.push(s);
        }
        series.push(per_year);
    }
    Ok(GridTile {
        bounds: raw.bounds,
        coords: raw.coords.clone(),
        year_start: raw.year_start,
        year_end: raw.year_end,
        granularity_days: 1,
        split: SplitTag::Train,
        series,
    })
}

/// Aggregate every series of a daily tile.
pub fn aggregate_tile(tile: &GridTile, target: crate::series::Granularity) -> Result<GridTile> {
    let mut series = Vec::with_capacity(tile.series.len());
    for per_year in &tile.series {
        let mut out = Vec::with_capacity(per_year.len());
        for s in per_year {
            out.push(crate::series::aggregate(s, target)?);
        }
        series.push(out);
    }
    Ok(GridTile {
        bounds: tile.bounds,
        coords: tile.coords.clone(),
        year_start: tile.year_start,
        year_end: tile.year_end,
        granularity_days: target.days(),
        split: tile.split,
        series,
    })
}
