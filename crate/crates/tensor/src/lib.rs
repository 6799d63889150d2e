//! Dense-tensor computation core with reverse-mode gradients.
//!
//! Everything downstream trains through this crate: tensors are recorded
//! on a [`Tape`], [`Tape::backward`] produces named [`Gradients`], and
//! [`AdamState`] applies them to [`Params`]. Training runs in `f32`;
//! gradient checking ([`grad_check`]) runs in `f64`.

pub mod checkpoint;
pub mod error;
pub mod gradcheck;
pub mod linalg;
pub mod nn;
pub mod optim;
pub mod params;
pub mod tape;
pub mod tensor;

pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use error::{Error, Result};
pub use gradcheck::grad_check;
pub use optim::{AdamState, LrSchedule};
pub use params::{init_uniform, Params};
pub use tape::{Gradients, NodeId, Tape};
pub use tensor::{Dtype, Real, Tensor};
