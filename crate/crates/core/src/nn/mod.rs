//! Minimal dense networks with hand-written reverse-mode gradients.

mod adam;
pub mod checkpoint;
mod loss;
mod matrix;
mod mlp;
mod target;

pub use adam::AdamState;
pub use loss::mse_loss;
pub use matrix::Matrix;
pub use mlp::{chain_specs, dueling_combine, ActivationTrace, Activation, Dense, HeadKind, LayerSpec, Mlp, ParamGrads};
pub use target::{hard_update, soft_update};
