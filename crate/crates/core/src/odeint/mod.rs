//! Time integration of the node ODE system and gradients of the
//! observation loss with respect to the surrogate parameters.
//!
//! - [`integrate`]: explicit Euler, classic RK4 (fixed step) or
//!   Dormand–Prince 5(4) with PI step control; steps always land exactly on
//!   the requested output times.
//! - [`adjoint_gradient`]: continuous adjoint, checkpointing the forward
//!   solution only at observation times.
//! - [`backprop_gradient`]: exact reverse-mode gradient of a fixed-step RK4
//!   discretization, used as an independent check of the adjoint.

mod adjoint;
mod backprop;
mod dynamics;
mod solver;

pub use adjoint::{adjoint_gradient, AdjointStats};
pub use backprop::backprop_gradient;
pub use dynamics::{Dynamics, LinearDynamics, SurrogateDynamics};
pub use solver::{integrate, integrate_with_stats, Method, SolverConfig, SolverStats, Trajectory};

use alloc::format;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Mean squared observation error with the `1/(M+1)` normalization, summed
/// over the observation times after the first.
pub(crate) fn observation_loss(pred: &[Vec<f64>], obs: &[Vec<f64>]) -> Result<f64> {
    if pred.len() != obs.len() || pred.is_empty() {
        return Err(Error::ShapeMismatch(format!(
            "{} predicted states for {} observations",
            pred.len(),
            obs.len()
        )));
    }
    let scale = 1.0 / pred.len() as f64;
    let mut loss = 0.0;
    for (p, y) in pred.iter().zip(obs).skip(1) {
        if p.len() != y.len() {
            return Err(Error::ShapeMismatch("state length differs from observation".into()));
        }
        loss += p.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    }
    Ok(loss * scale)
}

pub(crate) fn check_observations(n: usize, u0: &[f64], t_obs: &[f64], y_obs: &[Vec<f64>]) -> Result<()> {
    if t_obs.len() < 2 {
        return Err(Error::InvalidConfig("need at least two observation times".into()));
    }
    if y_obs.len() != t_obs.len() {
        return Err(Error::ShapeMismatch(format!("{} observations for {} times", y_obs.len(), t_obs.len())));
    }
    if u0.len() != n || y_obs.iter().any(|y| y.len() != n) {
        return Err(Error::ShapeMismatch(format!("states must have length {n}")));
    }
    Ok(())
}
