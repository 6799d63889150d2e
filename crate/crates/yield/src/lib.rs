//! County-level soybean yield prediction: fine-tuned weather-encoder
//! variants, the CNN-RNN and CNN-Transformer baselines, least squares,
//! and the five-fold state-split evaluation protocol.

pub mod data;
pub mod error;
pub mod eval;
pub mod models;
pub mod soil;

pub use data::{
    generate_synthetic_yield, read_csv, write_csv, SynthYieldSpec, YieldDataset, YieldSample,
    SOIL_DEPTHS, SOIL_PROPERTIES, WEATHER_LABELS, WEATHER_SLOTS, WEATHER_VARS, WEEKS,
};
pub use error::{Error, Result};
pub use eval::{rmse, FoldReport, SplitPlan};
pub use models::{
    eligible_keys, fit_linear_baseline, forward_yield, init_yield_params, predict_rmse,
    train_yield, TrainedYield, YieldModelConfig, YieldOptimConfig, YieldStats, YieldVariant,
};
pub use soil::{soil_cnn_features, weather_cnn_features, SOIL_FEATURES, WEATHER_CNN_FEATURES};
