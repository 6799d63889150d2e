//! County-year yield samples, their CSV layout, and the synthetic
//! generator for desk-scale runs.

use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::collections::BTreeMap;
use std::io::{Read, Write};

pub const WEEKS: usize = 52;
pub const WEATHER_VARS: usize = 6;
pub const SOIL_PROPERTIES: usize = 10;
pub const SOIL_DEPTHS: usize = 6;
pub const STATES: usize = 9;

/// Column labels of the six weekly weather variables, in CSV order.
pub const WEATHER_LABELS: [&str; WEATHER_VARS] = ["prcp", "srad", "swe", "tmax", "tmin", "vap"];

/// Catalog slots the six yield-dataset weather variables map onto when
/// fed to the 31-measurement weather encoder: precipitation, shortwave
/// radiation, snow depth (nearest proxy for snow water equivalent),
/// max/min temperature, and vapor pressure.
pub const WEATHER_SLOTS: [usize; WEATHER_VARS] = [7, 8, 11, 1, 2, 29];

/// One county-year. Weekly weather is row-major 52 x 6.
#[derive(Clone, Debug, PartialEq)]
pub struct YieldSample {
    pub county_id: u32,
    pub state_id: u32,
    pub year: i32,
    pub latitude: f64,
    pub longitude: f64,
    pub weather: Vec<f64>,
    /// Row-major 10 properties x 6 depths, no time axis.
    pub soil: Vec<f64>,
    pub practices: Vec<f64>,
    pub yield_bu: f64,
}

impl YieldSample {
    pub fn validate(&self) -> Result<()> {
        if self.weather.len() != WEEKS * WEATHER_VARS {
            return Err(Error::BadSample(format!(
                "{} weather values, expected {}",
                self.weather.len(),
                WEEKS * WEATHER_VARS
            )));
        }
        if self.soil.len() != SOIL_PROPERTIES * SOIL_DEPTHS {
            return Err(Error::BadSample(format!(
                "{} soil values, expected {}",
                self.soil.len(),
                SOIL_PROPERTIES * SOIL_DEPTHS
            )));
        }
        Ok(())
    }

    pub fn weather_at(&self, week: usize, var: usize) -> f64 {
        self.weather[week * WEATHER_VARS + var]
    }
}

/// All samples with a (county, year) index.
#[derive(Clone, Debug, Default)]
pub struct YieldDataset {
    pub samples: Vec<YieldSample>,
    index: BTreeMap<(u32, i32), usize>,
}

impl YieldDataset {
    pub fn new(samples: Vec<YieldSample>) -> Result<Self> {
        let mut index = BTreeMap::new();
        for (i, s) in samples.iter().enumerate() {
            s.validate()?;
            if index.insert((s.county_id, s.year), i).is_some() {
                return Err(Error::BadSample(format!(
                    "duplicate county {} year {}",
                    s.county_id, s.year
                )));
            }
        }
        Ok(Self { samples, index })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn get(&self, county: u32, year: i32) -> Option<&YieldSample> {
        self.index.get(&(county, year)).map(|&i| &self.samples[i])
    }

    /// The previous year's yield, which substitutes for the unknown
    /// current-year yield in every input.
    pub fn past_yield(&self, county: u32, year: i32) -> Result<f64> {
        self.get(county, year - 1)
            .map(|s| s.yield_bu)
            .ok_or(Error::MissingPastYield { county, year })
    }

    /// `years` consecutive samples ending at (county, year), oldest
    /// first. The year before the oldest must also exist so every block
    /// has a past yield.
    pub fn history(&self, county: u32, year: i32, years: usize) -> Result<Vec<&YieldSample>> {
        let mut out = Vec::with_capacity(years);
        for y in (year - years as i32 + 1)..=year {
            out.push(self.get(county, y).ok_or(Error::MissingHistory {
                county,
                year,
                need: years,
            })?);
        }
        self.past_yield(county, year - years as i32 + 1)?;
        Ok(out)
    }

    pub fn states(&self) -> Vec<u32> {
        let mut s: Vec<u32> = self.samples.iter().map(|x| x.state_id).collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    pub fn practices_len(&self) -> usize {
        self.samples.first().map_or(0, |s| s.practices.len())
    }
}

/// CSV layout: `county,state,year,lat,lon`, then `w{week}_{var}` for the
/// 52 x 6 weather block, `soil_p{prop}_d{depth}` for the 60 soil values,
/// `practice_{i}`, and finally `yield`.
pub fn write_csv(dataset: &YieldDataset, out: impl Write) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    let p_len = dataset.practices_len();
    let mut header: Vec<String> = vec!["county", "state", "year", "lat", "lon"]
        .into_iter()
        .map(String::from)
        .collect();
    for week in 0..WEEKS {
        for label in WEATHER_LABELS {
            header.push(format!("w{week}_{label}"));
        }
    }
    for p in 0..SOIL_PROPERTIES {
        for d in 0..SOIL_DEPTHS {
            header.push(format!("soil_p{p}_d{d}"));
        }
    }
    for i in 0..p_len {
        header.push(format!("practice_{i}"));
    }
    header.push("yield".into());
    wtr.write_record(&header).map_err(|e| Error::Csv(e.to_string()))?;

    for s in &dataset.samples {
        let mut row: Vec<String> = vec![
            s.county_id.to_string(),
            s.state_id.to_string(),
            s.year.to_string(),
            s.latitude.to_string(),
            s.longitude.to_string(),
        ];
        row.extend(s.weather.iter().map(|v| v.to_string()));
        row.extend(s.soil.iter().map(|v| v.to_string()));
        row.extend(s.practices.iter().map(|v| v.to_string()));
        row.push(s.yield_bu.to_string());
        wtr.write_record(&row).map_err(|e| Error::Csv(e.to_string()))?;
    }
    wtr.flush().map_err(|e| Error::Csv(e.to_string()))?;
    Ok(())
}

pub fn read_csv(input: impl Read) -> Result<YieldDataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let headers = rdr.headers().map_err(|e| Error::Csv(e.to_string()))?.clone();
    let p_len = headers.iter().filter(|h| h.starts_with("practice_")).count();
    let expected = 5 + WEEKS * WEATHER_VARS + SOIL_PROPERTIES * SOIL_DEPTHS + p_len + 1;
    if headers.len() != expected {
        return Err(Error::Csv(format!(
            "{} columns, expected {expected}",
            headers.len()
        )));
    }
    let mut samples = Vec::new();
    for (line, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| Error::Csv(e.to_string()))?;
        let num = |i: usize| -> Result<f64> {
            row.get(i)
                .and_then(|v| v.trim().parse::<f64>().ok())
                .ok_or_else(|| Error::Csv(format!("bad number, line {} col {i}", line + 2)))
        };
        let mut col = 0usize;
        let county_id = num(col)? as u32;
        col += 1;
        let state_id = num(col)? as u32;
        col += 1;
        let year = num(col)? as i32;
        col += 1;
        let latitude = num(col)?;
        col += 1;
        let longitude = num(col)?;
        col += 1;
        let mut weather = Vec::with_capacity(WEEKS * WEATHER_VARS);
        for _ in 0..WEEKS * WEATHER_VARS {
            weather.push(num(col)?);
            col += 1;
        }
        let mut soil = Vec::with_capacity(SOIL_PROPERTIES * SOIL_DEPTHS);
        for _ in 0..SOIL_PROPERTIES * SOIL_DEPTHS {
            soil.push(num(col)?);
            col += 1;
        }
        let mut practices = Vec::with_capacity(p_len);
        for _ in 0..p_len {
            practices.push(num(col)?);
            col += 1;
        }
        let yield_bu = num(col)?;
        samples.push(YieldSample {
            county_id,
            state_id,
            year,
            latitude,
            longitude,
            weather,
            soil,
            practices,
            yield_bu,
        });
    }
    YieldDataset::new(samples)
}

/// Controls for the synthetic county-yield generator.
#[derive(Clone, Debug)]
pub struct SynthYieldSpec {
    pub counties_per_state: usize,
    pub year_start: i32,
    pub year_end: i32,
    pub seed: u64,
    /// Yield noise in Bu/Acre.
    pub noise: f64,
    /// Weight of last year's yield anomaly in this year's yield.
    pub autoregression: f64,
    /// Weight of the growing-season weather term.
    pub weather_coupling: f64,
    /// When set, the yield is exactly affine in mean July precipitation
    /// plus noise; all other terms are disabled.
    pub july_precip_only: bool,
}

impl Default for SynthYieldSpec {
    fn default() -> Self {
        Self {
            counties_per_state: 3,
            year_start: 2000,
            year_end: 2012,
            seed: 0,
            noise: 2.0,
            autoregression: 0.6,
            weather_coupling: 1.0,
            july_precip_only: false,
        }
    }
}

/// Synthetic soybean-like dataset over 9 states.
pub fn generate_synthetic_yield(spec: &SynthYieldSpec) -> Result<YieldDataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let normal = StandardNormal;
    let mut samples = Vec::new();
    let mut county_id = 0u32;
    for state in 0..STATES as u32 {
        for _ in 0..spec.counties_per_state {
            county_id += 1;
            let latitude = rng.random_range(36.0..48.0);
            let longitude = rng.random_range(-103.0..-81.0);
            let soil: Vec<f64> = (0..SOIL_PROPERTIES * SOIL_DEPTHS)
                .map(|i| {
                    let n: f64 = normal.sample(&mut rng);
                    ((i % SOIL_DEPTHS) as f64).mul_add(0.1, 1.0) + 0.3 * n
                })
                .collect();
            let fertility: f64 = soil.iter().sum::<f64>() / soil.len() as f64;
            let base_yield = 30.0 + 6.0 * fertility + rng.random_range(-3.0..3.0);

            let mut prev_anomaly = 0.0f64;
            for year in spec.year_start..=spec.year_end {
                let mut weather = vec![0.0; WEEKS * WEATHER_VARS];
                for week in 0..WEEKS {
                    let phase =
                        (week as f64 - 28.0) / WEEKS as f64 * std::f64::consts::TAU;
                    let season = phase.cos();
                    for (v, slot) in WEATHER_LABELS.iter().enumerate() {
                        let n: f64 = normal.sample(&mut rng);
                        let value = match *slot {
                            "prcp" => (18.0 + 9.0 * season + 5.0 * n).max(0.0),
                            "srad" => (16.0 + 7.0 * season + 1.5 * n).max(0.5),
                            "swe" => (4.0 - 5.0 * season + 1.0 * n).max(0.0),
                            "tmax" => 16.0 + 13.0 * season + 1.5 * n,
                            "tmin" => 5.0 + 12.0 * season + 1.5 * n,
                            _ => (1.4 + 0.8 * season + 0.2 * n).max(0.05),
                        };
                        weather[week * WEATHER_VARS + v] = value;
                    }
                }
                let july_precip: f64 =
                    (26..30).map(|w| weather[w * WEATHER_VARS]).sum::<f64>() / 4.0;
                let heat: f64 =
                    (24..34).map(|w| weather[w * WEATHER_VARS + 3]).sum::<f64>() / 10.0;
                let eps: f64 = normal.sample(&mut rng);
                let yield_bu = if spec.july_precip_only {
                    20.0 + 1.1 * july_precip + spec.noise * eps
                } else {
                    let weather_term =
                        spec.weather_coupling * (0.55 * (july_precip - 18.0) - 0.5 * (heat - 29.0));
                    let anomaly = spec.autoregression * prev_anomaly
                        + weather_term
                        + spec.noise * eps;
                    prev_anomaly = anomaly;
                    base_yield + anomaly
                };
                let practices: Vec<f64> = (0..3).map(|_| rng.random_range(0.0..1.0)).collect();
                samples.push(YieldSample {
                    county_id,
                    state_id: state,
                    year,
                    latitude,
                    longitude,
                    weather,
                    soil: soil.clone(),
                    practices,
                    yield_bu: yield_bu.max(1.0),
                });
            }
        }
    }
    YieldDataset::new(samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_dataset_covers_nine_states() {
        let d = generate_synthetic_yield(&SynthYieldSpec::default()).unwrap();
        assert_eq!(d.states().len(), 9);
        assert_eq!(d.len(), 9 * 3 * 13);
        d.samples[0].validate().unwrap();
    }

    #[test]
    fn csv_round_trips() {
        let d = generate_synthetic_yield(&SynthYieldSpec {
            counties_per_state: 1,
            year_start: 2005,
            year_end: 2007,
            ..Default::default()
        })
        .unwrap();
        let mut buf = Vec::new();
        write_csv(&d, &mut buf).unwrap();
        let back = read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.len(), d.len());
        for (a, b) in d.samples.iter().zip(&back.samples) {
            assert_eq!(a.county_id, b.county_id);
            assert!((a.yield_bu - b.yield_bu).abs() < 1e-9);
            assert_eq!(a.weather.len(), b.weather.len());
            assert!((a.weather[100] - b.weather[100]).abs() < 1e-9);
        }
    }

    #[test]
    fn history_requires_consecutive_years_and_a_prior_yield() {
        let d = generate_synthetic_yield(&SynthYieldSpec {
            counties_per_state: 1,
            year_start: 2000,
            year_end: 2010,
            ..Default::default()
        })
        .unwrap();
        // year 2003 with 3 years of history: 2001..=2003, prior 2000 exists
        assert!(d.history(1, 2003, 3).is_ok());
        // 2002 with 3 years needs 2000..=2002 and prior 1999: missing
        assert!(matches!(
            d.history(1, 2002, 3),
            Err(Error::MissingPastYield { .. })
        ));
        assert!(matches!(
            d.history(1, 1999, 2),
            Err(Error::MissingHistory { .. })
        ));
    }

    #[test]
    fn past_yield_substitutes_for_the_current_year() {
        let d = generate_synthetic_yield(&SynthYieldSpec::default()).unwrap();
        let s = d.get(1, 2005).unwrap();
        let prev = d.get(1, 2004).unwrap();
        assert_eq!(d.past_yield(1, 2005).unwrap(), prev.yield_bu);
        assert_ne!(d.past_yield(1, 2005).unwrap(), s.yield_bu);
    }
}
