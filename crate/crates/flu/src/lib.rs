//! Rolling-origin influenza forecasting: task generation, sequential
//! splits, the transformer forecasters, and the ARIMA and least-squares
//! baselines.

pub mod arima;
pub mod error;
pub mod eval;
pub mod forecaster;
pub mod ili;
pub mod linreg;
pub mod tasks;

pub use arima::{arima_fit, arima_forecast, one_step_forecasts, ArimaConfig, ArimaModel};
pub use error::{Error, Result};
pub use eval::{mae_at_offsets, mae_triple, REPORTED_OFFSETS};
pub use forecaster::{
    forecast_flu, forward_flu, init_flu_head, train_flu, FluForecaster, FluHeadConfig,
    FluOptimConfig, FluStats, FluVariant,
};
pub use ili::{generate_synthetic_ili, IliSeries, SynthIliSpec, WeekRecord};
pub use linreg::{fit_lag_regression, lag_forecast, LagRegression};
pub use tasks::{
    rolling_tasks, sequential_splits, tasks_for_year, ForecastTask, SequentialSplit,
    DEFAULT_HORIZON, WINDOW_SEARCH_SPACE,
};
