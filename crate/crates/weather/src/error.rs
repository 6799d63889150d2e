//! Error type for the weather-data pipeline.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("input out of physical range: {0}")]
    OutOfRange(String),

    #[error("relative humidity {0} outside [0, 1]")]
    InvalidHumidity(f64),

    #[error("Penman-Monteith denominator is not positive ({0})")]
    NonPositiveDenominator(f64),

    #[error("operation requires daily input, got granularity {0}")]
    NotDaily(u16),

    #[error("standardization std is zero for measurement index {0}")]
    ZeroStd(usize),

    #[error("measurement {measurement} missing for all years at coordinate ({lat}, {lon})")]
    AllMissing {
        measurement: String,
        lat: f64,
        lon: f64,
    },

    #[error("need at least 2 tiles to split, got {0}")]
    TooFewTiles(usize),

    #[error("invalid argument: {0}")]
    InvalidArg(String),

    #[error("store format error: {0}")]
    StoreFormat(String),

    #[error("store checksum mismatch in tile {0}")]
    StoreChecksum(usize),

    #[error("store version {got} unsupported (expected {expected})")]
    StoreVersion { got: u16, expected: u16 },

    #[error("response schema drift: {0}")]
    SchemaDrift(String),

    #[error("partial year in response: expected {expected} days, got {got}")]
    PartialYear { expected: usize, got: usize },

    #[error("endpoint unreachable: {0}")]
    Endpoint(String),

    #[error("malformed response body: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
