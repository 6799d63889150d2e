//! Weather data pipeline: the 31-measurement catalog, derived-variable
//! equations, ingestion, imputation, aggregation, standardization,
//! synthetic generation, and the binary tile store.

pub mod catalog;
pub mod error;
pub mod fetch;
pub mod impute;
pub mod met;
pub mod series;
pub mod split;
pub mod store;
pub mod synth;
pub mod tile;

pub use catalog::{MeasurementId, CATALOG, DOWNLOADED_COUNT, MEASUREMENT_COUNT};
pub use error::{Error, Result};
pub use series::{aggregate, destandardize, standardize, Granularity, StandardizationStats, WeatherSeries};
pub use split::split_dataset;
pub use store::{read_store, write_store};
pub use synth::{generate_synthetic, SynthSpec};
pub use tile::{aggregate_tile, derive_tile, Bounds, GridTile, RawTile, SplitTag};
