//! Dense GCN and MLP models trained with hand-written reverse-mode gradients.
//!
//! A layer computes `σ(S · H · W + b)` where `S` is the propagation matrix:
//! the symmetrically normalized adjacency (with or without self-loops) for a
//! GCN and the identity for an MLP. Hidden layers use ReLU; the last layer
//! emits logits for softmax cross-entropy.

mod adam;
mod influence;
mod model;
mod propagation;
mod train;

pub use adam::{Adam, AdamConfig};
pub use influence::{influence_distribution, influence_ratio};
pub use model::{
    loss_and_grads, softmax_rows, Activation, Dropout, ForwardPass, GcnModel, Gradients, Layer,
    LayerCache, ModelKind,
};
pub use propagation::{propagation_matrix, PropagationMatrix};
pub use train::{
    accuracy, split_nodes, train, train_with_split, ModelConfig, TrainConfig, TrainOutcome,
};
