use alloc::format;
use alloc::vec::Vec;

use super::dynamics::{zeros, Dynamics};
use super::solver::check_times;
use super::{check_observations, observation_loss};
use crate::{Error, Result};

/// Loss and the exact gradient of its fixed-step RK4 discretization, by
/// storing every stage state and sweeping backward through the steps.
///
/// Each observation interval is split into the fewest equal steps no longer
/// than `dt`, matching the fixed-step integrator.
pub fn backprop_gradient<D: Dynamics>(
    dynamics: &mut D,
    u0: &[f64],
    t_obs: &[f64],
    y_obs: &[Vec<f64>],
    dt: f64,
) -> Result<(f64, Vec<f64>)> {
    check_times(t_obs)?;
    let n = dynamics.state_dim();
    let p = dynamics.param_dim();
    check_observations(n, u0, t_obs, y_obs)?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidConfig(format!("step {dt} must be positive")));
    }

    // Steps per interval and their exact lengths.
    let mut plan = Vec::with_capacity(t_obs.len() - 1);
    for w in t_obs.windows(2) {
        let span = w[1] - w[0];
        let steps = libm::ceil(span / dt - 1e-9).max(1.0);
        plan.push((steps as usize, span / steps));
    }

    // Forward: stage inputs y, y2, y3, y4 of every step.
    let mut stages: Vec<[Vec<f64>; 4]> = Vec::new();
    let mut at_obs = Vec::with_capacity(t_obs.len());
    let mut y = u0.to_vec();
    at_obs.push(y.clone());
    let mut k = [zeros(n), zeros(n), zeros(n), zeros(n)];
    for &(steps, h) in &plan {
        for _ in 0..steps {
            let mut inputs: [Vec<f64>; 4] = [y.clone(), zeros(n), zeros(n), zeros(n)];
            dynamics.eval(&inputs[0], &mut k[0])?;
            for (s, c) in [(1, 0.5), (2, 0.5), (3, 1.0)] {
                let (done, rest) = inputs.split_at_mut(s);
                for ((dst, yi), ki) in rest[0].iter_mut().zip(&done[0]).zip(&k[s - 1]) {
                    *dst = yi + c * h * ki;
                }
                dynamics.eval(&inputs[s], &mut k[s])?;
            }
            for i in 0..n {
                y[i] += h / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]);
            }
            if y.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteState { t: f64::NAN });
            }
            stages.push(inputs);
        }
        at_obs.push(y.clone());
    }
    let loss = observation_loss(&at_obs, y_obs)?;

    // Reverse sweep.
    let scale = 2.0 / t_obs.len() as f64;
    let mut y_bar = zeros(n);
    let mut grad = zeros(p);
    let mut theta_bar = zeros(p);
    let mut k_bar = [zeros(n), zeros(n), zeros(n), zeros(n)];
    let mut stage_bar = zeros(n);
    let mut step = stages.len();
    for (i, &(steps, h)) in plan.iter().enumerate().rev() {
        for ((yb, u), yo) in y_bar.iter_mut().zip(&at_obs[i + 1]).zip(&y_obs[i + 1]) {
            *yb += scale * (u - yo);
        }
        for _ in 0..steps {
            step -= 1;
            let inputs = &stages[step];
            for (s, w) in [1.0, 2.0, 2.0, 1.0].into_iter().enumerate() {
                for (kb, yb) in k_bar[s].iter_mut().zip(&y_bar) {
                    *kb = h / 6.0 * w * yb;
                }
            }
            for (s, c) in [(3, 1.0), (2, 0.5), (1, 0.5), (0, 0.0)] {
                dynamics.vjp(&inputs[s], &k_bar[s], None, &mut stage_bar, &mut theta_bar)?;
                for (g, t) in grad.iter_mut().zip(&theta_bar) {
                    *g += t;
                }
                for (yb, sb) in y_bar.iter_mut().zip(&stage_bar) {
                    *yb += sb;
                }
                if s > 0 {
                    for (kb, sb) in k_bar[s - 1].iter_mut().zip(&stage_bar) {
                        *kb += c * h * sb;
                    }
                }
            }
        }
    }
    if grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFiniteGradient);
    }
    Ok((loss, grad))
}
