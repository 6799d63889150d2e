//! Synthetic weather tiles for desk-scale runs.
//!
//! Each primary measurement follows a latitude-dependent seasonal
//! sinusoid plus Gaussian noise; the derived measurements are computed
//! from the synthetic primaries with the real equations, so the
//! cross-variable physical identities hold on generated data.

use crate::catalog::{symbol_index, DOWNLOADED_COUNT, ET0, VAD, VAP};
use crate::error::Result;
use crate::met;
use crate::series::WeatherSeries;
use crate::tile::{Bounds, GridTile, SplitTag, DAYS_PER_YEAR, TILE_LON_SPAN};
use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

#[derive(Clone, Debug)]
pub struct SynthSpec {
    pub tiles: usize,
    pub year_start: i32,
    pub year_end: i32,
    /// Standard deviation of the Gaussian noise added to every primary,
    /// in units of each measurement's own noise scale.
    pub noise: f64,
    /// Coordinates per tile; full tiles hold 160, desk runs use fewer.
    pub coords_per_tile: usize,
    pub origin_lat: f64,
    pub origin_lon: f64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            tiles: 2,
            year_start: 2019,
            year_end: 2020,
            noise: 1.0,
            coords_per_tile: 4,
            origin_lat: 35.0,
            origin_lon: -100.0,
        }
    }
}

struct Profile {
    base: f64,
    lat_term: f64,
    amp_base: f64,
    amp_lat: f64,
    sd: f64,
    lo: f64,
    hi: f64,
    peak_day: f64,
}

const fn p(
    base: f64,
    lat_term: f64,
    amp_base: f64,
    amp_lat: f64,
    sd: f64,
    lo: f64,
    hi: f64,
    peak_day: f64,
) -> Profile {
    Profile {
        base,
        lat_term,
        amp_base,
        amp_lat,
        sd,
        lo,
        hi,
        peak_day,
    }
}

// One entry per downloadable measurement, in catalog order. T2M_MAX and
// T2M_MIN are overwritten from T2M after generation to keep ordering.
const PROFILES: [Profile; DOWNLOADED_COUNT] = [
    p(25.0, -35.0, 3.0, 12.0, 2.0, -60.0, 50.0, 200.0),  // T2M
    p(0.0, 0.0, 1.0, 0.0, 0.5, -58.0, 55.0, 200.0),      // T2M_MAX (rewritten)
    p(0.0, 0.0, 1.0, 0.0, 0.5, -65.0, 48.0, 200.0),      // T2M_MIN (rewritten)
    p(180.0, 0.0, 60.0, 0.0, 20.0, 0.0, 359.9, 30.0),    // WD2M
    p(4.0, 0.0, 1.5, 0.5, 0.8, 0.0, 30.0, 80.0),         // WS2M
    p(98.0, 2.0, 1.0, 0.0, 0.3, 60.0, 110.0, 10.0),      // PS
    p(8.0, -4.0, 3.0, 0.0, 0.5, 0.1, 30.0, 200.0),       // QV2M
    p(3.0, 0.0, 2.0, 0.5, 1.5, 0.0, 80.0, 150.0),        // PRECTOTCORR
    p(18.0, -6.0, 4.0, 4.0, 1.0, 1.0, 35.0, 172.0),      // ALLSKY_SFC_SW_DWN
    p(6.0, 0.0, 3.0, 0.0, 0.8, 0.0, 20.0, 180.0),        // EVPTRNS
    p(0.55, 0.0, 0.2, 0.0, 0.05, 0.01, 0.99, 60.0),      // GWETPROF
    p(2.0, 8.0, 2.0, 6.0, 1.0, 0.0, 300.0, 15.0),        // SNODP
    p(18.0, -30.0, 10.0, 0.0, 2.0, -70.0, 45.0, 200.0),  // T2MDEW
    p(0.5, 0.0, 0.2, 0.0, 0.08, 0.01, 0.99, 100.0),      // CLOUD_AMT
    p(30.0, 0.0, 12.0, 0.0, 4.0, 0.0, 200.0, 180.0),     // EVLAND
    p(20.0, -32.0, 11.0, 0.0, 2.0, -70.0, 47.0, 200.0),  // T2MWET
    p(0.2, 0.3, 0.18, 0.0, 0.04, 0.0, 1.0, 15.0),        // FRSNO
    p(30.0, -8.0, 5.0, 0.0, 1.0, 5.0, 50.0, 200.0),      // ALLSKY_SFC_LW_DWN
    p(8.0, -3.0, 3.0, 0.0, 0.5, 0.5, 20.0, 172.0),       // ALLSKY_SFC_PAR_TOT
    p(0.25, 0.0, 0.08, 0.0, 0.02, 0.05, 0.9, 20.0),      // ALLSKY_SRF_ALB
    p(2.5, -1.2, 1.0, 0.0, 0.3, 0.05, 8.0, 200.0),       // PW
    p(0.5, 0.0, 0.3, 0.0, 0.05, 0.001, 3.0, 150.0),      // Z0M
    p(1.2, 0.0, 0.05, 0.0, 0.01, 0.8, 1.6, 20.0),        // RHOA
    p(0.6, 0.0, 0.15, 0.0, 0.05, 0.02, 0.98, 120.0),     // RH2M
    p(0.5, 0.0, 0.5, 0.0, 0.2, 0.0, 1.0, 200.0),         // CDD18_3
    p(0.5, 0.0, 0.5, 0.0, 0.2, 0.0, 1.0, 15.0),          // HDD18_3
    p(300.0, 0.0, 25.0, 0.0, 8.0, 150.0, 500.0, 90.0),   // TO3
    p(0.2, 0.0, 0.1, 0.0, 0.03, 0.01, 0.95, 150.0),      // AOD_55
];

/// Deterministically generate daily tiles for the given spec.
pub fn generate_synthetic(spec: &SynthSpec, seed: u64) -> Result<Vec<GridTile>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = StandardNormal;
    let t2m_max = symbol_index("T2M_MAX").expect("catalog");
    let t2m_min = symbol_index("T2M_MIN").expect("catalog");

    let mut tiles = Vec::with_capacity(spec.tiles);
    for t in 0..spec.tiles {
        // lay tiles out on a grid, 40 per latitude band, so large tile
        // counts stay inside valid coordinates
        let col = t % 40;
        let row = t / 40;
        let bounds = Bounds::tile(
            (spec.origin_lat + row as f64 * 5.0).min(84.0),
            wrap_lon(spec.origin_lon + col as f64 * TILE_LON_SPAN),
        );
        let coords: Vec<(f64, f64)> = bounds
            .grid_coords()
            .into_iter()
            .take(spec.coords_per_tile)
            .collect();
        let mut series = Vec::with_capacity(coords.len());
        for &(lat, lon) in &coords {
            let mut per_year = Vec::new();
            for year in spec.year_start..=spec.year_end {
                let start_date = NaiveDate::from_ymd_opt(year, 1, 1).expect("valid year");
                let mut s = WeatherSeries::zeroed(DAYS_PER_YEAR, 1, lat, lon, start_date)?;
                s.set_valid_len(DAYS_PER_YEAR)?;
                for day in 0..DAYS_PER_YEAR {
                    for (m, prof) in PROFILES.iter().enumerate() {
                        let n: f64 = normal.sample(&mut rng);
                        let v = seasonal_value(prof, lat, lon, day, spec.noise * n);
                        // round through f32 so the store narrowing is lossless
                        s.set(day, m, v as f32 as f64)?;
                    }
                    // keep the max/min bracket around the mean temperature
                    let base_t = s.get(day, 0);
                    let spread_hi = 3.0 + rng.random_range(0.0..2.0);
                    let spread_lo = 3.0 + rng.random_range(0.0..2.0);
                    s.set(day, t2m_max, ((base_t + spread_hi).min(55.0)) as f32 as f64)?;
                    s.set(day, t2m_min, ((base_t - spread_lo).max(-65.0)) as f32 as f64)?;

                    let temp = s.get(day, 0);
                    let rh = s.get(day, 23);
                    let e_s = met::saturation_vapor_pressure(temp)?;
                    let (vap, vad) = met::actual_vapor_pressure_and_deficit(temp, rh)?;
                    let rn = (1.0 - s.get(day, 19)) * s.get(day, 8);
                    let et0 = met::reference_et0(
                        met::svp_slope(temp)?,
                        rn,
                        0.0,
                        temp,
                        s.get(day, 4),
                        e_s,
                        vap,
                        met::psychrometric_constant(s.get(day, 5)),
                    )?;
                    s.set(day, ET0, et0)?;
                    s.set(day, VAP, vap)?;
                    s.set(day, VAD, vad)?;
                }
                per_year.push(s);
            }
            series.push(per_year);
        }
        tiles.push(GridTile {
            bounds,
            coords,
            year_start: spec.year_start,
            year_end: spec.year_end,
            granularity_days: 1,
            split: SplitTag::Train,
            series,
        });
    }
    Ok(tiles)
}

fn wrap_lon(lon: f64) -> f64 {
    (lon + 180.0).rem_euclid(360.0) - 180.0
}

fn seasonal_value(prof: &Profile, lat: f64, lon: f64, day: usize, noise: f64) -> f64 {
    let lat_frac = lat.abs() / 90.0;
    // southern hemisphere seasons are offset by half a year; longitude
    // nudges the phase so nearby columns are not identical
    let peak = if lat >= 0.0 {
        prof.peak_day
    } else {
        prof.peak_day + 182.5
    } + lon / 15.0;
    let seasonal = (2.0 * std::f64::consts::PI * (day as f64 - peak) / 365.0).cos();
    let amp = prof.amp_base + prof.amp_lat * lat_frac;
    let v = prof.base + prof.lat_term * lat_frac + amp * seasonal + prof.sd * noise;
    v.clamp(prof.lo, prof.hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::MEASUREMENT_COUNT;

    fn small_spec(noise: f64) -> SynthSpec {
        SynthSpec {
            tiles: 1,
            year_start: 2020,
            year_end: 2020,
            noise,
            coords_per_tile: 2,
            origin_lat: 40.0,
            origin_lon: -95.0,
        }
    }

    #[test]
    fn zero_noise_gives_exactly_periodic_series() {
        let spec = SynthSpec {
            year_end: 2021,
            ..small_spec(0.0)
        };
        let tiles = generate_synthetic(&spec, 1).unwrap();
        let y0 = &tiles[0].series[0][0];
        let y1 = &tiles[0].series[0][1];
        for day in 0..DAYS_PER_YEAR {
            // primary columns repeat with period 365 (max/min carry RNG spread)
            for m in [0usize, 4, 7, 8, 23] {
                assert_eq!(y0.get(day, m), y1.get(day, m), "day {day} m {m}");
            }
        }
    }

    #[test]
    fn same_seed_gives_identical_dataset() {
        let spec = small_spec(0.5);
        let a = generate_synthetic(&spec, 9).unwrap();
        let b = generate_synthetic(&spec, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn derived_columns_satisfy_the_vapor_identity() {
        let tiles = generate_synthetic(&small_spec(1.0), 5).unwrap();
        for s in tiles[0].all_series() {
            for day in 0..s.valid_len() {
                let e_s = met::saturation_vapor_pressure(s.get(day, 0)).unwrap();
                let vap = s.get(day, VAP);
                let vad = s.get(day, VAD);
                assert!(vad >= 0.0);
                assert!((vad - (e_s - vap)).abs() < 1e-9, "day {day}");
            }
        }
    }

    #[test]
    fn all_measurements_vary_over_a_year() {
        let tiles = generate_synthetic(&small_spec(0.0), 2).unwrap();
        let s = &tiles[0].series[0][0];
        for m in 0..MEASUREMENT_COUNT {
            let first = s.get(0, m);
            assert!(
                (0..DAYS_PER_YEAR).any(|d| (s.get(d, m) - first).abs() > 1e-9),
                "measurement {m} is constant"
            );
        }
    }
}
