//! Neural-network engine: layers, backpropagation through time, MSE loss and Adam.
//!
//! All layers work on mini-batches. A sequence is a `Vec<Matrix>` with one
//! `batch x width` matrix per time step.

mod activation;
mod adam;
mod dense;
mod gru;
mod init;
mod loss;
mod lstm;
mod network;
mod param;

pub use activation::{Activation, ActivationKind};
pub use adam::{clip_global_norm, AdamConfig, AdamState};
pub use dense::Dense;
pub use gru::{gru_cell_step, Gru};
pub use init::init_params;
pub use loss::mse_loss;
pub use lstm::{lstm_cell_step, Lstm};
pub use network::{ForwardCache, Gradients, Layer, LayerKind, LayerSpec, Network, Signal};
pub use param::Parameter;
