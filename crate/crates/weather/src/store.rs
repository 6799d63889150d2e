//! Binary tile store.
//!
//! Layout (little-endian throughout):
//!
//! ```text
//! magic      b"WFDS"
//! version    u16
//! tile_count u32
//! per tile:
//!   lat_min f64, lat_max f64, lon_min f64, lon_max f64
//!   coord_count u32, year_start i32, year_end i32
//!   granularity_days u16, split u8
//!   coords: coord_count x (lat f64, lon f64)
//!   series: per coord, per year:
//!     n_rows u32, valid_len u32, n_rows x 31 f32 values
//!   crc32 u32 over every byte of this tile
//! ```
//!
//! Values are narrowed to `f32` on write.

use crate::catalog::MEASUREMENT_COUNT;
use crate::error::{Error, Result};
use crate::series::WeatherSeries;
use crate::tile::{Bounds, GridTile, SplitTag};
use chrono::NaiveDate;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"WFDS";
const VERSION: u16 = 1;

pub fn write_store(path: &Path, tiles: &[GridTile]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(tiles.len() as u32).to_le_bytes())?;
    for tile in tiles {
        let bytes = encode_tile(tile)?;
        let crc = crc32fast::hash(&bytes);
        w.write_all(&bytes)?;
        w.write_all(&crc.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_store(path: &Path) -> Result<Vec<GridTile>> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    read_exact(&mut r, &mut magic)?;
    if &magic != MAGIC {
        return Err(Error::StoreFormat("bad magic, not a tile store".into()));
    }
    let version = u16::from_le_bytes(read_array(&mut r)?);
    if version != VERSION {
        return Err(Error::StoreVersion {
            got: version,
            expected: VERSION,
        });
    }
    let count = u32::from_le_bytes(read_array(&mut r)?) as usize;
    let mut tiles = Vec::with_capacity(count);
    for ti in 0..count {
        let (tile, bytes) = decode_tile(&mut r)?;
        let expected = u32::from_le_bytes(read_array(&mut r)?);
        if crc32fast::hash(&bytes) != expected {
            return Err(Error::StoreChecksum(ti));
        }
        tiles.push(tile);
    }
    Ok(tiles)
}

fn encode_tile(tile: &GridTile) -> Result<Vec<u8>> {
    let mut b = Vec::new();
    for v in [
        tile.bounds.lat_min,
        tile.bounds.lat_max,
        tile.bounds.lon_min,
        tile.bounds.lon_max,
    ] {
        b.extend_from_slice(&v.to_le_bytes());
    }
    b.extend_from_slice(&(tile.coords.len() as u32).to_le_bytes());
    b.extend_from_slice(&tile.year_start.to_le_bytes());
    b.extend_from_slice(&tile.year_end.to_le_bytes());
    b.extend_from_slice(&tile.granularity_days.to_le_bytes());
    b.push(match tile.split {
        SplitTag::Train => 0,
        SplitTag::Val => 1,
    });
    for &(lat, lon) in &tile.coords {
        b.extend_from_slice(&lat.to_le_bytes());
        b.extend_from_slice(&lon.to_le_bytes());
    }
    let n_years = (tile.year_end - tile.year_start + 1) as usize;
    if tile.series.len() != tile.coords.len() {
        return Err(Error::StoreFormat(format!(
            "{} coord series for {} coords",
            tile.series.len(),
            tile.coords.len()
        )));
    }
    for per_year in &tile.series {
        if per_year.len() != n_years {
            return Err(Error::StoreFormat(format!(
                "{} yearly series for {n_years} years",
                per_year.len()
            )));
        }
        for s in per_year {
            b.extend_from_slice(&(s.n_rows() as u32).to_le_bytes());
            b.extend_from_slice(&(s.valid_len() as u32).to_le_bytes());
            for &v in s.values() {
                b.extend_from_slice(&(v as f32).to_le_bytes());
            }
        }
    }
    Ok(b)
}

fn decode_tile(r: &mut impl Read) -> Result<(GridTile, Vec<u8>)> {
    // Re-encodes the consumed bytes so the caller can verify the CRC.
    let mut bytes = Vec::new();
    let take = |r: &mut dyn Read, n: usize, bytes: &mut Vec<u8>| -> Result<Vec<u8>> {
        let mut buf = vec![0u8; n];
        read_exact_dyn(r, &mut buf)?;
        bytes.extend_from_slice(&buf);
        Ok(buf)
    };

    let head = take(r, 4 * 8 + 4 + 4 + 4 + 2 + 1, &mut bytes)?;
    let f = |i: usize| f64::from_le_bytes(head[i * 8..(i + 1) * 8].try_into().unwrap());
    let bounds = Bounds {
        lat_min: f(0),
        lat_max: f(1),
        lon_min: f(2),
        lon_max: f(3),
    };
    let coord_count = u32::from_le_bytes(head[32..36].try_into().unwrap()) as usize;
    let year_start = i32::from_le_bytes(head[36..40].try_into().unwrap());
    let year_end = i32::from_le_bytes(head[40..44].try_into().unwrap());
    let granularity_days = u16::from_le_bytes(head[44..46].try_into().unwrap());
    let split = match head[46] {
        0 => SplitTag::Train,
        1 => SplitTag::Val,
        other => return Err(Error::StoreFormat(format!("bad split tag {other}"))),
    };
    if year_end < year_start {
        return Err(Error::StoreFormat(format!(
            "year range {year_start}..{year_end}"
        )));
    }

    let coord_bytes = take(r, coord_count * 16, &mut bytes)?;
    let mut coords = Vec::with_capacity(coord_count);
    for c in 0..coord_count {
        let lat = f64::from_le_bytes(coord_bytes[c * 16..c * 16 + 8].try_into().unwrap());
        let lon = f64::from_le_bytes(coord_bytes[c * 16 + 8..c * 16 + 16].try_into().unwrap());
        coords.push((lat, lon));
    }

    let n_years = (year_end - year_start + 1) as usize;
    let mut series = Vec::with_capacity(coord_count);
    for &(lat, lon) in &coords {
        let mut per_year = Vec::with_capacity(n_years);
        for yi in 0..n_years {
            let lens = take(r, 8, &mut bytes)?;
            let n_rows = u32::from_le_bytes(lens[0..4].try_into().unwrap()) as usize;
            let valid_len = u32::from_le_bytes(lens[4..8].try_into().unwrap()) as usize;
            if valid_len > n_rows {
                return Err(Error::StoreFormat(format!(
                    "valid_len {valid_len} exceeds {n_rows} rows"
                )));
            }
            let raw = take(r, n_rows * MEASUREMENT_COUNT * 4, &mut bytes)?;
            let values: Vec<f64> = raw
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
                .collect();
            let year = year_start + yi as i32;
            let start_date = NaiveDate::from_ymd_opt(year, 1, 1)
                .ok_or_else(|| Error::StoreFormat(format!("year {year}")))?;
            per_year.push(WeatherSeries::new(
                values,
                n_rows,
                granularity_days,
                lat,
                lon,
                start_date,
                valid_len,
            )?);
        }
        series.push(per_year);
    }

    Ok((
        GridTile {
            bounds,
            coords,
            year_start,
            year_end,
            granularity_days,
            split,
            series,
        },
        bytes,
    ))
}

fn read_exact(r: &mut impl Read, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf)
        .map_err(|e| Error::StoreFormat(format!("truncated store: {e}")))
}

fn read_exact_dyn(r: &mut dyn Read, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf)
        .map_err(|e| Error::StoreFormat(format!("truncated store: {e}")))
}

fn read_array<const N: usize>(r: &mut impl Read) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    read_exact(r, &mut buf)?;
    Ok(buf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate_synthetic, SynthSpec};

    fn tmp(name: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join("wf-store-tests");
        std::fs::create_dir_all(&dir).unwrap();
        dir.join(name)
    }

    fn sample_tiles() -> Vec<GridTile> {
        generate_synthetic(
            &SynthSpec {
                tiles: 2,
                year_start: 2019,
                year_end: 2020,
                noise: 0.7,
                coords_per_tile: 3,
                origin_lat: 30.0,
                origin_lon: -110.0,
            },
            21,
        )
        .unwrap()
    }

    #[test]
    fn round_trip_is_bitwise_stable() {
        let path = tmp("roundtrip.wfds");
        let tiles = sample_tiles();
        write_store(&path, &tiles).unwrap();
        let first = read_store(&path).unwrap();
        // values are narrowed to f32 on the first write; a second pass
        // must reproduce the exact same bytes and values
        write_store(&path, &first).unwrap();
        let second = read_store(&path).unwrap();
        assert_eq!(first, second);
        for (a, b) in first
            .iter()
            .flat_map(|t| t.all_series())
            .zip(second.iter().flat_map(|t| t.all_series()))
        {
            for (x, y) in a.values().iter().zip(b.values()) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
        std::fs::remove_file(&path).unwrap();
    }

    #[test]
    fn corrupted_byte_fails_the_checksum() {
        let path = tmp("corrupt.wfds");
        write_store(&path, &sample_tiles()).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        let mid = bytes.len() / 2;
        bytes[mid] ^= 0xFF;
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(
            read_store(&path),
            Err(Error::StoreChecksum(_)) | Err(Error::StoreFormat(_))
        ));
        std::fs::remove_file(&path).unwrap();
    }

    #[test]
    fn empty_store_round_trips() {
        let path = tmp("empty.wfds");
        write_store(&path, &[]).unwrap();
        assert!(read_store(&path).unwrap().is_empty());
        std::fs::remove_file(&path).unwrap();
    }

    #[test]
    fn version_mismatch_is_reported() {
        let path = tmp("version.wfds");
        write_store(&path, &[]).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[4] = 99;
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(
            read_store(&path),
            Err(Error::StoreVersion { got: 99, .. })
        ));
        std::fs::remove_file(&path).unwrap();
    }

    #[test]
    fn truncated_file_is_reported() {
        let path = tmp("trunc.wfds");
        write_store(&path, &sample_tiles()).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() / 3]).unwrap();
        assert!(matches!(read_store(&path), Err(Error::StoreFormat(_))));
        std::fs::remove_file(&path).unwrap();
    }
}
