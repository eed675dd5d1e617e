//! Small fully connected networks with hand-written backpropagation.
//!
//! Parameters live in one flat `Vec<f64>`; layer `l` stores its weight matrix
//! (`out x in`, row-major) followed by its bias vector. Hidden layers use the
//! configured activation, the output layer is linear.

pub(crate) mod checkpoint;
mod mlp;
mod optim;

pub use checkpoint::{read_params, write_params, CHECKPOINT_MAGIC};
pub use mlp::{
    copy_into_target, Activation, GradientSet, Loss, MlpSpec, ParamSet, Role, Workspace,
};
pub use optim::{adam_step, sgd_step, AdamConfig, AdamState, Optimizer, OptimizerKind};
