//! Numerical core: weighted propagation, a two-layer graph-convolution
//! encoder with analytic gradients, and the Adam optimizer.

mod adam;
mod model;
mod propagation;

pub use adam::{AdamConfig, Moments};
pub use model::{
    accuracy, forward, loss_and_grads, predict, softmax_rows, ForwardCache, GnnParams,
    Gradients, LossOutput, Reconstruction,
};
pub use propagation::{normalize, PropagationMatrix};
