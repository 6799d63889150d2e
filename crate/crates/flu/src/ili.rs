//! Weekly influenza-like-illness series with aligned weather.

use crate::error::{Error, Result};
use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::io::Read;
use std::path::Path;

pub const WEEKS_PER_YEAR: u32 = 52;

/// One weekly record of the public surveillance export.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeekRecord {
    /// Epidemiological week id YYYYWW, weeks 1..=52.
    pub epiweek: u32,
    pub ili_percent: f64,
    pub num_patients: f64,
}

/// An ILI series plus the aligned weekly mean temperature for the city.
#[derive(Clone, Debug)]
pub struct IliSeries {
    pub records: Vec<WeekRecord>,
    pub mean_temp: Vec<f64>,
    pub latitude: f64,
    pub longitude: f64,
}

pub fn epiweek_year(epiweek: u32) -> i32 {
    (epiweek / 100) as i32
}

pub fn epiweek_week(epiweek: u32) -> u32 {
    epiweek % 100
}

pub fn epiweek_valid(epiweek: u32) -> bool {
    let w = epiweek_week(epiweek);
    (1..=WEEKS_PER_YEAR).contains(&w) && epiweek / 100 >= 1900
}

/// The week after this one in the 52-week desk calendar.
pub fn epiweek_succ(epiweek: u32) -> u32 {
    let (y, w) = (epiweek / 100, epiweek % 100);
    if w >= WEEKS_PER_YEAR {
        (y + 1) * 100 + 1
    } else {
        epiweek + 1
    }
}

/// Nominal start date of an epiweek in the desk calendar.
pub fn epiweek_start_date(epiweek: u32) -> Result<NaiveDate> {
    if !epiweek_valid(epiweek) {
        return Err(Error::BadEpiweek(epiweek));
    }
    let year = epiweek_year(epiweek);
    let week = epiweek_week(epiweek);
    NaiveDate::from_ymd_opt(year, 1, 1)
        .and_then(|d| d.checked_add_days(chrono::Days::new(7 * (week as u64 - 1))))
        .ok_or(Error::BadEpiweek(epiweek))
}

impl IliSeries {
    pub fn new(
        records: Vec<WeekRecord>,
        mean_temp: Vec<f64>,
        latitude: f64,
        longitude: f64,
    ) -> Result<Self> {
        if records.len() < 2 {
            return Err(Error::SeriesTooShort {
                got: records.len(),
                need: 2,
            });
        }
        if mean_temp.len() != records.len() {
            return Err(Error::InvalidArg(format!(
                "{} temperature weeks for {} records",
                mean_temp.len(),
                records.len()
            )));
        }
        for (i, r) in records.iter().enumerate() {
            if !epiweek_valid(r.epiweek) {
                return Err(Error::BadEpiweek(r.epiweek));
            }
            if !(0.0..=100.0).contains(&r.ili_percent) {
                return Err(Error::BadIliPercent(r.ili_percent));
            }
            if i > 0 && epiweek_succ(records[i - 1].epiweek) != r.epiweek {
                return Err(Error::NonConsecutiveWeeks(i));
            }
        }
        Ok(Self {
            records,
            mean_temp,
            latitude,
            longitude,
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn ili(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.ili_percent).collect()
    }

    /// Index of the first week of `year`, if covered.
    pub fn index_of_year_start(&self, year: i32) -> Option<usize> {
        self.records
            .iter()
            .position(|r| epiweek_year(r.epiweek) == year)
    }

    /// Drop every record from `year` onward.
    pub fn truncate_before(&mut self, year: i32) {
        let keep = self
            .records
            .iter()
            .take_while(|r| epiweek_year(r.epiweek) < year)
            .count();
        self.records.truncate(keep);
        self.mean_temp.truncate(keep);
    }

    /// Read the `epiweek,ili_percent,num_patients` export. Week-53
    /// records of long epidemiological years are dropped so that every
    /// stored year has 52 weeks.
    pub fn from_csv_reader(reader: impl Read, latitude: f64, longitude: f64) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| Error::Csv(e.to_string()))?
            .clone();
        let col = |name: &str| -> Result<usize> {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Csv(format!("missing column `{name}`")))
        };
        let (wi, ii, pi) = (col("epiweek")?, col("ili_percent")?, col("num_patients")?);
        let mut records = Vec::new();
        for (line, row) in rdr.records().enumerate() {
            let row = row.map_err(|e| Error::Csv(e.to_string()))?;
            let field = |i: usize| -> Result<f64> {
                row.get(i)
                    .and_then(|s| s.trim().parse::<f64>().ok())
                    .ok_or_else(|| Error::Csv(format!("bad number on line {}", line + 2)))
            };
            let epiweek = field(wi)? as u32;
            if epiweek_week(epiweek) == 53 {
                continue;
            }
            records.push(WeekRecord {
                epiweek,
                ili_percent: field(ii)?,
                num_patients: field(pi)?,
            });
        }
        let temps = vec![0.0; records.len()];
        Self::new(records, temps, latitude, longitude)
    }

    pub fn from_csv_path(path: &Path, latitude: f64, longitude: f64) -> Result<Self> {
        let file = std::fs::File::open(path)
            .map_err(|e| Error::Csv(format!("{}: {e}", path.display())))?;
        Self::from_csv_reader(file, latitude, longitude)
    }

    pub fn set_mean_temp(&mut self, temps: Vec<f64>) -> Result<()> {
        if temps.len() != self.records.len() {
            return Err(Error::InvalidArg(format!(
                "{} temperature weeks for {} records",
                temps.len(),
                self.records.len()
            )));
        }
        self.mean_temp = temps;
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SynthIliSpec {
    pub year_start: i32,
    pub year_end: i32,
    pub seed: u64,
    /// Noise scale on the weekly ILI innovation.
    pub noise: f64,
    /// Strength of the cold-temperature forcing term.
    pub weather_coupling: f64,
}

impl Default for SynthIliSpec {
    fn default() -> Self {
        Self {
            year_start: 2010,
            year_end: 2019,
            seed: 0,
            noise: 0.08,
            weather_coupling: 1.0,
        }
    }
}

/// Seasonal, temperature-driven synthetic ILI for one city.
///
/// Incidence follows an autoregressive pull toward a baseline plus a
/// forcing term that grows when the weekly mean temperature drops, so
/// weather-aware models have real signal to exploit.
pub fn generate_synthetic_ili(spec: &SynthIliSpec) -> Result<IliSeries> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let normal = StandardNormal;
    let mut records = Vec::new();
    let mut temps = Vec::new();
    let mut ili = 1.2f64;
    for year in spec.year_start..=spec.year_end {
        for week in 1..=WEEKS_PER_YEAR {
            let phase = (week as f64 - 29.0) / WEEKS_PER_YEAR as f64 * std::f64::consts::TAU;
            let temp_noise: f64 = normal.sample(&mut rng);
            let temp = 12.0 + 11.0 * phase.cos() + 0.7 * temp_noise;
            let cold_forcing = (8.0 - temp).max(0.0) * 0.045 * spec.weather_coupling;
            let eps: f64 = normal.sample(&mut rng);
            ili = 0.25 + 0.78 * ili + cold_forcing + spec.noise * eps;
            ili = ili.clamp(0.1, 20.0);
            let patients_noise: f64 = normal.sample(&mut rng);
            let patients = 26000.0 + 3500.0 * phase.cos() + 400.0 * patients_noise;
            records.push(WeekRecord {
                epiweek: year as u32 * 100 + week,
                ili_percent: ili,
                num_patients: patients.max(1000.0),
            });
            temps.push(temp);
        }
    }
    IliSeries::new(records, temps, 40.7, -74.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn epiweek_arithmetic_rolls_years() {
        assert_eq!(epiweek_succ(201652), 201701);
        assert_eq!(epiweek_succ(201607), 201608);
        assert!(epiweek_valid(201001));
        assert!(!epiweek_valid(201000));
        assert!(!epiweek_valid(201053));
    }

    #[test]
    fn non_consecutive_weeks_are_rejected() {
        let records = vec![
            WeekRecord { epiweek: 201001, ili_percent: 1.0, num_patients: 100.0 },
            WeekRecord { epiweek: 201003, ili_percent: 1.0, num_patients: 100.0 },
        ];
        assert!(matches!(
            IliSeries::new(records, vec![0.0; 2], 0.0, 0.0),
            Err(Error::NonConsecutiveWeeks(1))
        ));
    }

    #[test]
    fn csv_round_trips_and_drops_week_53() {
        let csv = "epiweek,ili_percent,num_patients\n\
                   201451,2.1,30000\n\
                   201452,2.5,31000\n\
                   201453,9.9,99999\n\
                   201501,2.8,32000\n";
        let s = IliSeries::from_csv_reader(csv.as_bytes(), 40.7, -74.0).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.records[2].epiweek, 201501);
        assert!((s.records[1].ili_percent - 2.5).abs() < 1e-12);
    }

    #[test]
    fn synthetic_series_is_seasonal_and_deterministic() {
        let a = generate_synthetic_ili(&SynthIliSpec::default()).unwrap();
        let b = generate_synthetic_ili(&SynthIliSpec::default()).unwrap();
        assert_eq!(a.records, b.records);
        assert_eq!(a.len(), 10 * 52);
        // winter weeks run hotter ILI than summer weeks on average
        let winter: f64 = a
            .records
            .iter()
            .filter(|r| {
                let w = epiweek_week(r.epiweek);
                !(10..=43).contains(&w)
            })
            .map(|r| r.ili_percent)
            .sum::<f64>();
        let summer: f64 = a
            .records
            .iter()
            .filter(|r| (18..=35).contains(&epiweek_week(r.epiweek)))
            .map(|r| r.ili_percent)
            .sum::<f64>();
        assert!(winter > 1.5 * summer, "winter {winter} summer {summer}");
    }

    #[test]
    fn truncate_excludes_late_years() {
        let mut s = generate_synthetic_ili(&SynthIliSpec {
            year_start: 2018,
            year_end: 2021,
            ..Default::default()
        })
        .unwrap();
        s.truncate_before(2020);
        assert_eq!(s.len(), 2 * 52);
        assert!(s
            .records
            .iter()
            .all(|r| epiweek_year(r.epiweek) < 2020));
    }
}
