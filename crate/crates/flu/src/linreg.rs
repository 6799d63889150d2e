//! Least-squares baseline: one lagged regressor per horizon step.

use crate::error::{Error, Result};
use wf_tensor::linalg::solve_least_squares;

#[derive(Clone, Debug)]
pub struct LagRegression {
    pub lags: usize,
    pub horizon: usize,
    /// Per horizon step: `lags` lag weights then the intercept.
    pub coeffs: Vec<Vec<f64>>,
}

/// Fit `horizon` separate regressors of y[o + h] on the `lags` values up
/// to the origin o.
pub fn fit_lag_regression(train: &[f64], lags: usize, horizon: usize) -> Result<LagRegression> {
    if lags == 0 || horizon == 0 {
        return Err(Error::InvalidArg("lags and horizon must be positive".into()));
    }
    if train.len() < lags + horizon + 1 {
        return Err(Error::SeriesTooShort {
            got: train.len(),
            need: lags + horizon + 1,
        });
    }
    let mut coeffs = Vec::with_capacity(horizon);
    for h in 1..=horizon {
        let mut design = Vec::new();
        let mut target = Vec::new();
        let mut rows = 0usize;
        for origin in (lags - 1)..(train.len() - h) {
            for lag in 0..lags {
                design.push(train[origin - lag]);
            }
            design.push(1.0);
            target.push(train[origin + h]);
            rows += 1;
        }
        coeffs.push(solve_least_squares(&design, rows, lags + 1, &target)?);
    }
    Ok(LagRegression {
        lags,
        horizon,
        coeffs,
    })
}

/// Forecast all horizon steps from the end of `history`.
pub fn lag_forecast(model: &LagRegression, history: &[f64]) -> Result<Vec<f64>> {
    if history.len() < model.lags {
        return Err(Error::SeriesTooShort {
            got: history.len(),
            need: model.lags,
        });
    }
    let origin = history.len() - 1;
    let mut out = Vec::with_capacity(model.horizon);
    for beta in &model.coeffs {
        let mut pred = beta[model.lags]; // intercept
        for lag in 0..model.lags {
            pred += beta[lag] * history[origin - lag];
        }
        out.push(pred);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exactly_linear_series_is_fit_exactly() {
        let series: Vec<f64> = (0..60).map(|i| 2.0 + 0.5 * i as f64).collect();
        let model = fit_lag_regression(&series, 3, 5).unwrap();
        let forecast = lag_forecast(&model, &series).unwrap();
        for (h, v) in forecast.iter().enumerate() {
            let expected = 2.0 + 0.5 * (59 + h + 1) as f64;
            assert!((v - expected).abs() < 1e-6, "step {h}: {v} vs {expected}");
        }
    }

    #[test]
    fn constant_series_forecasts_the_constant() {
        let series = vec![4.25; 50];
        let model = fit_lag_regression(&series, 4, 10).unwrap();
        let forecast = lag_forecast(&model, &series).unwrap();
        for v in forecast {
            assert!((v - 4.25).abs() < 1e-6);
        }
    }

    #[test]
    fn two_coefficient_fit_matches_hand_normal_equations() {
        // y_t = 3 y_{t-1} style single-lag regression with intercept,
        // solved by hand on a 4-point fixture:
        //   origins: y0=1 -> y1=5, y1=5 -> y2=17, y2=17 -> y3=53
        //   X = [[1,1],[5,1],[17,1]], y = [5,17,53]
        //   X^T X = [[315, 23], [23, 3]], X^T y = [[991],[75]]
        //   beta = (X^T X)^-1 X^T y = [3, 2]
        let series = vec![1.0, 5.0, 17.0, 53.0];
        let model = fit_lag_regression(&series, 1, 1).unwrap();
        let beta = &model.coeffs[0];
        assert!((beta[0] - 3.0).abs() < 1e-9, "slope {}", beta[0]);
        assert!((beta[1] - 2.0).abs() < 1e-9, "intercept {}", beta[1]);
    }
}
