//! Mean absolute error at forecast horizons.

use crate::error::{Error, Result};

/// Offsets (1-based weeks ahead) reported throughout: +1, +5, +10.
pub const REPORTED_OFFSETS: [usize; 3] = [1, 5, 10];

/// Pool |forecast - truth| over all tasks at each requested offset.
pub fn mae_at_offsets(
    forecasts: &[Vec<f64>],
    truths: &[Vec<f64>],
    offsets: &[usize],
) -> Result<Vec<f64>> {
    if forecasts.len() != truths.len() {
        return Err(Error::InvalidArg(format!(
            "{} forecasts for {} truth tasks",
            forecasts.len(),
            truths.len()
        )));
    }
    if forecasts.is_empty() {
        return Err(Error::InvalidArg("no tasks to evaluate".into()));
    }
    let mut out = Vec::with_capacity(offsets.len());
    for &off in offsets {
        if off == 0 {
            return Err(Error::InvalidArg("offsets are 1-based".into()));
        }
        let mut sum = 0.0;
        let mut n = 0usize;
        for (f, t) in forecasts.iter().zip(truths) {
            if off > f.len() || off > t.len() {
                return Err(Error::InvalidArg(format!(
                    "offset {off} beyond horizon {}",
                    f.len().min(t.len())
                )));
            }
            sum += (f[off - 1] - t[off - 1]).abs();
            n += 1;
        }
        out.push(sum / n as f64);
    }
    Ok(out)
}

/// Standard +1/+5/+10 triple.
pub fn mae_triple(forecasts: &[Vec<f64>], truths: &[Vec<f64>]) -> Result<(f64, f64, f64)> {
    let v = mae_at_offsets(forecasts, truths, &REPORTED_OFFSETS)?;
    Ok((v[0], v[1], v[2]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_forecasts_score_zero() {
        let truth = vec![vec![1.0; 10], vec![2.0; 10]];
        let (a, b, c) = mae_triple(&truth, &truth).unwrap();
        assert_eq!((a, b, c), (0.0, 0.0, 0.0));
    }

    #[test]
    fn constant_offset_scores_that_offset() {
        let truth = vec![vec![3.0; 10]; 4];
        let forecasts = vec![vec![4.0; 10]; 4];
        let (a, b, c) = mae_triple(&forecasts, &truth).unwrap();
        assert!((a - 1.0).abs() < 1e-12);
        assert!((b - 1.0).abs() < 1e-12);
        assert!((c - 1.0).abs() < 1e-12);
    }

    #[test]
    fn three_task_fixture_matches_hand_arithmetic() {
        // errors at +1: |1-2|=1, |0-3|=3, |5-4|=1 -> MAE 5/3
        // errors at +5: 2, 0, 1                  -> MAE 1
        // errors at +10: 0.5, 0.5, 0.5           -> MAE 0.5
        let mk = |first: f64, fifth: f64, tenth: f64| {
            let mut v = vec![0.0; 10];
            v[0] = first;
            v[4] = fifth;
            v[9] = tenth;
            v
        };
        let truth = vec![mk(2.0, 0.0, 1.0), mk(3.0, 1.0, 2.0), mk(4.0, 2.0, 3.0)];
        let forecasts = vec![mk(1.0, 2.0, 1.5), mk(0.0, 1.0, 2.5), mk(5.0, 3.0, 3.5)];
        let (a, b, c) = mae_triple(&forecasts, &truth).unwrap();
        assert!((a - 5.0 / 3.0).abs() < 1e-12);
        assert!((b - 1.0).abs() < 1e-12);
        assert!((c - 0.5).abs() < 1e-12);
    }

    #[test]
    fn out_of_range_offset_is_rejected() {
        let v = vec![vec![0.0; 5]];
        assert!(mae_at_offsets(&v, &v, &[6]).is_err());
        assert!(mae_at_offsets(&v, &v, &[0]).is_err());
    }
}
