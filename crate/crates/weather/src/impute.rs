//! Missing-cell imputation for raw tiles.

use crate::catalog::{CATALOG, DOWNLOADED_COUNT};
use crate::error::{Error, Result};
use crate::tile::{RawTile, DAYS_PER_YEAR};

/// Fill every missing cell of a raw tile.
///
/// Each missing cell is taken from the same coordinate and day-of-year in
/// the most recent previous year where the cell was originally present.
/// Cells with no valid preceding year fall back to the climatological
/// day-of-year mean over all originally-valid years. A measurement that
/// is missing for every year at a coordinate is an error.
pub fn impute_missing(tile: &mut RawTile) -> Result<()> {
    for (ci, per_year) in tile.data.iter_mut().enumerate() {
        let (lat, lon) = tile.coords[ci];
        // Snapshot of the original flags so fills only source real data.
        let original: Vec<Vec<bool>> = per_year.iter().map(|y| y.missing.clone()).collect();

        for m in 0..DOWNLOADED_COUNT {
            let any_valid = original
                .iter()
                .any(|flags| (0..DAYS_PER_YEAR).any(|d| !flags[d * DOWNLOADED_COUNT + m]));
            if !any_valid {
                return Err(Error::AllMissing {
                    measurement: CATALOG[m].symbol.to_string(),
                    lat,
                    lon,
                });
            }
        }

        for yi in 0..per_year.len() {
            for day in 0..DAYS_PER_YEAR {
                for m in 0..DOWNLOADED_COUNT {
                    let cell = day * DOWNLOADED_COUNT + m;
                    if !original[yi][cell] {
                        continue;
                    }
                    let fill = previous_year_value(per_year, &original, yi, cell)
                        .or_else(|| climatological_mean(per_year, &original, cell));
                    match fill {
                        Some(v) => {
                            per_year[yi].values[cell] = v;
                            per_year[yi].missing[cell] = false;
                        }
                        None => {
                            return Err(Error::AllMissing {
                                measurement: CATALOG[m].symbol.to_string(),
                                lat,
                                lon,
                            })
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

fn previous_year_value(
    per_year: &[crate::tile::RawYear],
    original: &[Vec<bool>],
    year_index: usize,
    cell: usize,
) -> Option<f64> {
    (0..year_index)
        .rev()
        .find(|&y| !original[y][cell])
        .map(|y| per_year[y].values[cell])
}

fn climatological_mean(
    per_year: &[crate::tile::RawYear],
    original: &[Vec<bool>],
    cell: usize,
) -> Option<f64> {
    let valid: Vec<f64> = per_year
        .iter()
        .zip(original)
        .filter(|(_, flags)| !flags[cell])
        .map(|(y, _)| y.values[cell])
        .collect();
    if valid.is_empty() {
        None
    } else {
        Some(valid.iter().sum::<f64>() / valid.len() as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tile::{Bounds, RawYear};

    fn tile_with_years(n_years: usize) -> RawTile {
        let mut data = Vec::new();
        for _ in 0..n_years {
            let mut y = RawYear::empty();
            for day in 0..DAYS_PER_YEAR {
                for m in 0..DOWNLOADED_COUNT {
                    y.set(day, m, (day + m) as f64);
                }
            }
            data.push(y);
        }
        RawTile {
            bounds: Bounds::tile(10.0, 20.0),
            coords: vec![(10.0, 20.0)],
            year_start: 2018,
            year_end: 2018 + n_years as i32 - 1,
            data: vec![data],
        }
    }

    #[test]
    fn missing_day_is_copied_from_previous_year() {
        let mut tile = tile_with_years(3);
        tile.data[0][2].values[100 * DOWNLOADED_COUNT + 5] = 0.0;
        tile.data[0][2].missing[100 * DOWNLOADED_COUNT + 5] = true;
        tile.data[0][1].values[100 * DOWNLOADED_COUNT + 5] = 777.0;
        impute_missing(&mut tile).unwrap();
        assert_eq!(tile.data[0][2].get(100, 5), 777.0);
        assert_eq!(tile.data[0][2].missing_count(), 0);
    }

    #[test]
    fn no_missing_cells_is_identity() {
        let mut tile = tile_with_years(2);
        let before = tile.data.clone();
        impute_missing(&mut tile).unwrap();
        for (a, b) in tile.data[0].iter().zip(&before[0]) {
            assert_eq!(a.values, b.values);
        }
    }

    #[test]
    fn falls_back_to_day_of_year_mean() {
        // First year missing, so no preceding year exists; the three later
        // years hold 1, 2, 3 -> mean 2.
        let mut tile = tile_with_years(4);
        let cell = 50 * DOWNLOADED_COUNT + 3;
        tile.data[0][0].missing[cell] = true;
        for (yi, v) in [(1usize, 1.0), (2, 2.0), (3, 3.0)] {
            tile.data[0][yi].values[cell] = v;
        }
        impute_missing(&mut tile).unwrap();
        assert!((tile.data[0][0].values[cell] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn measurement_missing_everywhere_is_an_error() {
        let mut tile = tile_with_years(2);
        for y in tile.data[0].iter_mut() {
            for day in 0..DAYS_PER_YEAR {
                y.missing[day * DOWNLOADED_COUNT + 7] = true;
            }
        }
        assert!(matches!(
            impute_missing(&mut tile),
            Err(Error::AllMissing { .. })
        ));
    }

    #[test]
    fn imputed_cells_do_not_source_other_imputed_cells() {
        // Years 0 and 1 both missing; year 0 falls back to the mean of
        // later years, and year 1 must copy from year 0's *original* state,
        // i.e. also fall back to the mean, not year 0's fresh fill.
        let mut tile = tile_with_years(3);
        let cell = 10 * DOWNLOADED_COUNT;
        tile.data[0][0].missing[cell] = true;
        tile.data[0][1].missing[cell] = true;
        tile.data[0][2].values[cell] = 42.0;
        impute_missing(&mut tile).unwrap();
        assert_eq!(tile.data[0][0].values[cell], 42.0);
        assert_eq!(tile.data[0][1].values[cell], 42.0);
    }
}
