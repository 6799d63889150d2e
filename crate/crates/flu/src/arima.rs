//! ARIMA fitting by two-stage conditional least squares and recursive
//! multi-step forecasting.

use crate::error::{Error, Result};
use wf_tensor::linalg::solve_least_squares;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ArimaConfig {
    pub p: usize,
    pub d: usize,
    pub q: usize,
}

impl Default for ArimaConfig {
    fn default() -> Self {
        // the published configuration for the weekly ILI series
        Self { p: 54, d: 1, q: 1 }
    }
}

impl ArimaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d > 2 {
            return Err(Error::InvalidArg(format!("d = {} outside 0..=2", self.d)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct ArimaModel {
    pub config: ArimaConfig,
    pub ar: Vec<f64>,
    pub ma: Vec<f64>,
    /// Present only for d = 0; differencing removes the level otherwise.
    pub intercept: f64,
}

/// Fit an ARIMA model by conditional least squares.
///
/// The series is differenced `d` times, a long autoregression estimates
/// innovations, then AR and MA coefficients come from one joint
/// least-squares regression on lagged values and lagged innovations
/// (Hannan-Rissanen). Deterministic and dependency-free.
pub fn arima_fit(history: &[f64], config: &ArimaConfig) -> Result<ArimaModel> {
    config.validate()?;
    let ArimaConfig { p, d, q } = *config;
    if history.len() <= p + d + q {
        return Err(Error::InsufficientHistory {
            got: history.len(),
            p,
            d,
            q,
        });
    }
    let w = difference(history, d);
    let with_mean = d == 0;

    if p == 0 && q == 0 {
        let intercept = if with_mean {
            w.iter().sum::<f64>() / w.len() as f64
        } else {
            0.0
        };
        return Ok(ArimaModel {
            config: *config,
            ar: vec![],
            ma: vec![],
            intercept,
        });
    }

    // Stage 1: innovations from a long AR fit.
    let residuals = if q > 0 {
        long_ar_residuals(&w, p, q, with_mean)?
    } else {
        vec![0.0; w.len()]
    };

    // Stage 2: joint regression of w_t on its own lags and lagged
    // innovations.
    let start = p.max(if q > 0 { stage_one_order(&w, p, q) + q } else { 0 });
    if w.len() <= start {
        return Err(Error::InsufficientHistory {
            got: history.len(),
            p,
            d,
            q,
        });
    }
    let solve_stage_two = |ma_terms: usize| -> Result<Vec<f64>> {
        let cols = p + ma_terms + usize::from(with_mean);
        let rows = w.len() - start;
        let mut design = Vec::with_capacity(rows * cols);
        let mut target = Vec::with_capacity(rows);
        for t in start..w.len() {
            for i in 1..=p {
                design.push(w[t - i]);
            }
            for j in 1..=ma_terms {
                design.push(residuals[t - j]);
            }
            if with_mean {
                design.push(1.0);
            }
            target.push(w[t]);
        }
        solve_least_squares(&design, rows, cols, &target).map_err(Error::Tensor)
    };

    let beta = solve_stage_two(q)?;
    let ar = beta[..p].to_vec();
    let ma = beta[p..p + q].to_vec();
    let intercept = if with_mean { beta[p + q] } else { 0.0 };

    let ma_scale: f64 = ma.iter().map(|v| v.abs()).sum();
    if q > 0 && ma_scale >= 1.0 {
        // the MA part is only identifiable when the innovations carry
        // real variance; a near-deterministic series degenerates the
        // regressor column and the coefficient explodes
        let var_w = variance(&w);
        let var_e = variance(&residuals[start..]);
        if var_w > 0.0 && var_e / var_w < 1e-3 {
            let beta = solve_stage_two(0)?;
            return Ok(ArimaModel {
                config: *config,
                ar: beta[..p].to_vec(),
                ma: vec![0.0; q],
                intercept: if with_mean { beta[p] } else { 0.0 },
            });
        }
        return Err(Error::NonInvertible(ma_scale));
    }

    Ok(ArimaModel {
        config: *config,
        ar,
        ma,
        intercept,
    })
}

/// Forecast `horizon` future values of the original (undifferenced)
/// series.
pub fn arima_forecast(model: &ArimaModel, history: &[f64], horizon: usize) -> Result<Vec<f64>> {
    let ArimaConfig { p, d, q } = model.config;
    if history.len() <= p + d + q {
        return Err(Error::InsufficientHistory {
            got: history.len(),
            p,
            d,
            q,
        });
    }
    let w = difference(history, d);
    let residuals = model_residuals(model, &w);

    // recursive forecasts on the differenced scale; future innovations
    // are zero
    let mut extended = w.clone();
    let mut ext_res = residuals;
    for _ in 0..horizon {
        let t = extended.len();
        let mut value = model.intercept;
        for (i, &phi) in model.ar.iter().enumerate() {
            let lag = t - 1 - i;
            value += phi * extended[lag];
        }
        for (j, &theta) in model.ma.iter().enumerate() {
            let lag = t as i64 - 1 - j as i64;
            if lag >= 0 && (lag as usize) < ext_res.len() {
                value += theta * ext_res[lag as usize];
            }
        }
        extended.push(value);
        ext_res.push(0.0);
    }

    // integrate back to levels
    let forecast_diffs = &extended[w.len()..];
    Ok(integrate(history, forecast_diffs, d))
}

/// One-step-ahead level forecasts for every index of the evaluation
/// span `eval_start..history.len()`, using only data before each origin.
pub fn one_step_forecasts(model: &ArimaModel, history: &[f64], eval_start: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(history.len() - eval_start);
    for origin in eval_start..history.len() {
        let f = arima_forecast(model, &history[..origin], 1)?;
        out.push(f[0]);
    }
    Ok(out)
}

fn variance(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / values.len() as f64
}

fn difference(series: &[f64], d: usize) -> Vec<f64> {
    let mut w = series.to_vec();
    for _ in 0..d {
        w = w.windows(2).map(|p| p[1] - p[0]).collect();
    }
    w
}

/// Invert `d` rounds of differencing for forecasts appended after the
/// observed series.
fn integrate(history: &[f64], forecast_diffs: &[f64], d: usize) -> Vec<f64> {
    match d {
        0 => forecast_diffs.to_vec(),
        1 => {
            let mut level = *history.last().expect("nonempty history");
            forecast_diffs
                .iter()
                .map(|&dv| {
                    level += dv;
                    level
                })
                .collect()
        }
        2 => {
            let n = history.len();
            let mut slope = history[n - 1] - history[n - 2];
            let mut level = history[n - 1];
            forecast_diffs
                .iter()
                .map(|&ddv| {
                    slope += ddv;
                    level += slope;
                    level
                })
                .collect()
        }
        _ => unreachable!("validated d <= 2"),
    }
}

fn stage_one_order(w: &[f64], p: usize, q: usize) -> usize {
    ((w.len() / 4).max(p + q + 1)).min(w.len() / 2)
}

fn long_ar_residuals(w: &[f64], p: usize, q: usize, with_mean: bool) -> Result<Vec<f64>> {
    let m = stage_one_order(w, p, q);
    if w.len() <= m + 1 {
        return Err(Error::InsufficientHistory {
            got: w.len(),
            p,
            d: 0,
            q,
        });
    }
    let cols = m + usize::from(with_mean);
    let rows = w.len() - m;
    let mut design = Vec::with_capacity(rows * cols);
    let mut target = Vec::with_capacity(rows);
    for t in m..w.len() {
        for i in 1..=m {
            design.push(w[t - i]);
        }
        if with_mean {
            design.push(1.0);
        }
        target.push(w[t]);
    }
    let beta = solve_least_squares(&design, rows, cols, &target)?;
    let mut residuals = vec![0.0; w.len()];
    for t in m..w.len() {
        let mut pred = if with_mean { beta[m] } else { 0.0 };
        for i in 1..=m {
            pred += beta[i - 1] * w[t - i];
        }
        residuals[t] = w[t] - pred;
    }
    Ok(residuals)
}

/// Conditional residuals of a fitted model over the differenced series.
fn model_residuals(model: &ArimaModel, w: &[f64]) -> Vec<f64> {
    let p = model.ar.len();
    let q = model.ma.len();
    let mut res = vec![0.0; w.len()];
    for t in p..w.len() {
        let mut pred = model.intercept;
        for (i, &phi) in model.ar.iter().enumerate() {
            pred += phi * w[t - 1 - i];
        }
        for (j, &theta) in model.ma.iter().enumerate() {
            if t >= j + 1 {
                pred += theta * res[t - 1 - j];
            }
        }
        res[t] = w[t] - pred;
    }
    let _ = q;
    res
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn simulate_arima_111(n: usize, phi: f64, theta: f64, sigma: f64, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = StandardNormal;
        let mut w = Vec::with_capacity(n);
        let mut prev_w = 0.0;
        let mut prev_e = 0.0;
        for _ in 0..n {
            let e: f64 = normal.sample(&mut rng);
            let e = e * sigma;
            let value = phi * prev_w + e + theta * prev_e;
            w.push(value);
            prev_w = value;
            prev_e = e;
        }
        // integrate once for d = 1 levels
        let mut level = 10.0;
        w.iter()
            .map(|&dv| {
                level += dv;
                level
            })
            .collect()
    }

    #[test]
    fn random_walk_forecasts_equal_last_value() {
        let series: Vec<f64> = (0..100).map(|i| 5.0 + (i as f64 * 0.77).sin() * 3.0).collect();
        let cfg = ArimaConfig { p: 0, d: 1, q: 0 };
        let model = arima_fit(&series, &cfg).unwrap();
        let f = arima_forecast(&model, &series, 10).unwrap();
        let last = *series.last().unwrap();
        for v in f {
            assert!((v - last).abs() < 1e-6);
        }
    }

    #[test]
    fn ar1_coefficient_is_recovered_within_a_tenth() {
        let series = simulate_arima_111(500, 0.7, 0.0, 1.0, 42);
        let cfg = ArimaConfig { p: 1, d: 1, q: 1 };
        let model = arima_fit(&series, &cfg).unwrap();
        assert!(
            (model.ar[0] - 0.7).abs() < 0.1,
            "fitted phi {}",
            model.ar[0]
        );
    }

    #[test]
    fn arima_111_coefficients_are_plausible() {
        let series = simulate_arima_111(500, 0.6, 0.3, 1.0, 7);
        let model = arima_fit(&series, &ArimaConfig { p: 1, d: 1, q: 1 }).unwrap();
        assert!((model.ar[0] - 0.6).abs() < 0.1, "phi {}", model.ar[0]);
        assert!((model.ma[0] - 0.3).abs() < 0.2, "theta {}", model.ma[0]);
    }

    #[test]
    fn insufficient_history_is_rejected() {
        let series = vec![1.0; 10];
        assert!(matches!(
            arima_fit(&series, &ArimaConfig { p: 8, d: 1, q: 1 }),
            Err(Error::InsufficientHistory { .. })
        ));
    }

    #[test]
    fn d0_model_fits_the_mean() {
        let series = vec![3.0, 3.2, 2.8, 3.1, 2.9, 3.0, 3.0, 3.1, 2.9, 3.0];
        let model = arima_fit(&series, &ArimaConfig { p: 0, d: 0, q: 0 }).unwrap();
        assert!((model.intercept - 3.0).abs() < 0.05);
        let f = arima_forecast(&model, &series, 3).unwrap();
        for v in f {
            assert!((v - model.intercept).abs() < 1e-12);
        }
    }

    #[test]
    fn forecasts_stay_finite_at_the_published_order() {
        let series: Vec<f64> = (0..400)
            .map(|i| {
                2.0 + ((i as f64) / 52.0 * std::f64::consts::TAU).cos()
                    + 0.1 * ((i * 7919 % 100) as f64 / 100.0 - 0.5)
            })
            .collect();
        let model = arima_fit(&series, &ArimaConfig::default()).unwrap();
        let f = arima_forecast(&model, &series, 10).unwrap();
        assert_eq!(f.len(), 10);
        assert!(f.iter().all(|v| v.is_finite()));
    }
}
