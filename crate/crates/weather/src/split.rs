//! Tile-level train/validation split.

use crate::error::{Error, Result};
use crate::tile::{GridTile, SplitTag};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Split tiles into train and validation sets at the tile level.
///
/// `round(val_fraction * n)` tiles, but at least one, go to validation.
/// The same seed always produces the same split.
pub fn split_dataset(
    mut tiles: Vec<GridTile>,
    val_fraction: f64,
    seed: u64,
) -> Result<(Vec<GridTile>, Vec<GridTile>)> {
    if tiles.len() < 2 {
        return Err(Error::TooFewTiles(tiles.len()));
    }
    if !(0.0 < val_fraction && val_fraction < 1.0) {
        return Err(Error::InvalidArg(format!("val_fraction {val_fraction}")));
    }
    let n = tiles.len();
    let n_val = ((val_fraction * n as f64).round() as usize).max(1).min(n - 1);

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let val_set: std::collections::HashSet<usize> = order[..n_val].iter().copied().collect();

    let mut train = Vec::with_capacity(n - n_val);
    let mut val = Vec::with_capacity(n_val);
    for (i, mut tile) in tiles.drain(..).enumerate() {
        if val_set.contains(&i) {
            tile.split = SplitTag::Val;
            val.push(tile);
        } else {
            tile.split = SplitTag::Train;
            train.push(tile);
        }
    }
    Ok((train, val))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate_synthetic, SynthSpec};

    fn tiles(n: usize) -> Vec<GridTile> {
        let spec = SynthSpec {
            tiles: n,
            year_start: 2020,
            year_end: 2020,
            noise: 0.0,
            coords_per_tile: 1,
            origin_lat: 10.0,
            origin_lon: -120.0,
        };
        generate_synthetic(&spec, 0).unwrap()
    }

    #[test]
    fn hundred_nineteen_tiles_at_five_percent_gives_six() {
        let (train, val) = split_dataset(tiles(119), 0.05, 42).unwrap();
        assert_eq!(val.len(), 6);
        assert_eq!(train.len(), 113);
    }

    #[test]
    fn same_seed_gives_identical_split() {
        let (t1, v1) = split_dataset(tiles(10), 0.3, 7).unwrap();
        let (t2, v2) = split_dataset(tiles(10), 0.3, 7).unwrap();
        let key = |ts: &[GridTile]| ts.iter().map(|t| t.bounds.lon_min as i64).collect::<Vec<_>>();
        assert_eq!(key(&t1), key(&t2));
        assert_eq!(key(&v1), key(&v2));
    }

    #[test]
    fn two_tiles_still_yield_one_validation_tile() {
        let (train, val) = split_dataset(tiles(2), 0.05, 1).unwrap();
        assert_eq!(val.len(), 1);
        assert_eq!(train.len(), 1);
    }

    #[test]
    fn split_is_a_partition() {
        let all = tiles(9);
        let mut keys: Vec<i64> = all.iter().map(|t| t.bounds.lon_min as i64).collect();
        keys.sort();
        let (train, val) = split_dataset(all, 0.25, 3).unwrap();
        let mut got: Vec<i64> = train
            .iter()
            .chain(val.iter())
            .map(|t| t.bounds.lon_min as i64)
            .collect();
        got.sort();
        assert_eq!(keys, got);
        assert!(train.iter().all(|t| t.split == SplitTag::Train));
        assert!(val.iter().all(|t| t.split == SplitTag::Val));
    }

    #[test]
    fn one_tile_is_rejected() {
        assert!(matches!(split_dataset(tiles(1), 0.5, 0), Err(Error::TooFewTiles(1))));
    }
}
