//! Weather transformer encoder: granularity scalers, feature/padding
//! masking, spatiotemporal positional encoding, attention stack, and
//! output projection.

pub mod config;
pub mod encoder;
pub mod encoding;
pub mod error;
pub mod masks;

pub use config::{ModelConfig, IN_DIM, MAX_LEN, SCALER_GRANULARITIES};
pub use encoder::{
    apply_scalers, forward, forward_hidden, init_params, init_transformer_layer,
    is_encoder_param, transformer_layer, LayerDims,
};
pub use encoding::{epoch, spatiotemporal_encoding, SpatioTemporalContext};
pub use error::{Error, Result};
pub use masks::{FeatureMask, PaddingMask};
