//! Dense multilayer perceptrons with tanh hidden layers, their reverse-mode
//! gradients, and the Rprop optimizer.

mod activation;
mod gemm;
mod mlp;
mod params;
mod rprop;

pub use mlp::{mlp_forward, mlp_vjp, param_count, Mlp, MlpSpec, MlpWorkspace};
pub use params::ParamVector;
pub use rprop::{Rprop, RpropConfig};
