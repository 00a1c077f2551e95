use alloc::vec::Vec;

use super::dynamics::{zeros, Dynamics};
use super::solver::{check_times, integrate_with_stats, Integrator, SolverConfig, SolverStats};
use super::{check_observations, observation_loss};
use crate::{Error, Result};

/// Work and memory counters of one adjoint gradient evaluation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AdjointStats {
    pub forward: SolverStats,
    pub backward: SolverStats,
    /// Full states retained between the forward and backward pass.
    pub checkpoints: usize,
}

/// Loss and `dL/dθ` by the continuous adjoint method.
///
/// The forward pass keeps the state only at the observation times. The
/// backward pass walks the observation intervals from last to first,
/// restarting the state from the checkpoint at the right end of each
/// interval and integrating state, adjoint and parameter gradient together
/// in reversed time. The adjoint jumps by `∂ℓ/∂û(t_i)` at each observation.
pub fn adjoint_gradient<D: Dynamics>(
    dynamics: &mut D,
    u0: &[f64],
    t_obs: &[f64],
    y_obs: &[Vec<f64>],
    solver: &SolverConfig,
) -> Result<(f64, Vec<f64>, AdjointStats)> {
    check_times(t_obs)?;
    let n = dynamics.state_dim();
    let p = dynamics.param_dim();
    check_observations(n, u0, t_obs, y_obs)?;

    let (traj, forward) =
        integrate_with_stats(|_, u: &[f64], du: &mut [f64]| dynamics.eval(u, du), u0, t_obs, solver)?;
    let checkpoints = traj.states;
    let loss = observation_loss(&checkpoints, y_obs)?;

    let m = t_obs.len();
    let jump_scale = 2.0 / m as f64;
    // Augmented state: [u | λ | ∫λᵀ ∂F/∂θ].
    let mut z = zeros(2 * n + p);
    let mut backward = SolverStats::default();
    let mut rhs = |_: f64, z: &[f64], dz: &mut [f64]| -> Result<()> {
        let (u, rest) = z.split_at(n);
        let lambda = &rest[..n];
        let (du, rest) = dz.split_at_mut(n);
        let (dl, dg) = rest.split_at_mut(n);
        dynamics.vjp(u, lambda, Some(du), dl, dg)?;
        for v in du.iter_mut() {
            *v = -*v;
        }
        Ok(())
    };
    let mut integrator = Integrator::new(&mut rhs, *solver, 2 * n + p)?;
    for i in (1..m).rev() {
        z[..n].copy_from_slice(&checkpoints[i]);
        for ((l, u), y) in z[n..2 * n].iter_mut().zip(&checkpoints[i]).zip(&y_obs[i]) {
            *l += jump_scale * (u - y);
        }
        // Reversed time s = t_i - t runs over [0, t_i - t_{i-1}].
        integrator.restart();
        integrator.advance(&mut z, 0.0, t_obs[i] - t_obs[i - 1])?;
    }
    backward.merge(integrator.stats);

    let grad = z[2 * n..].to_vec();
    if grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFiniteGradient);
    }
    let stats = AdjointStats { forward, backward, checkpoints: checkpoints.len() };
    Ok((loss, grad, stats))
}
