use alloc::format;
use alloc::vec::Vec;

use rand::seq::index::sample;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{sample_initial_condition, solve_ground_truth_at, EquationSpec, FineGrid, SimulationRecord};
use crate::odeint::Trajectory;
use crate::{Error, Result};

/// Tolerance for matching a time to a multiple of the reference step.
pub const TIME_TOLERANCE: f64 = 1e-9;
/// Smallest gap between consecutive perturbed observation times.
pub const MIN_TIME_GAP: f64 = 1e-4;

/// Index `k` with `|k·dt − t| ≤ 1e-9`.
pub fn time_index(t: f64, dt: f64) -> Result<usize> {
    let k = libm::round(t / dt);
    if !(k >= 0.0) || (k * dt - t).abs() > TIME_TOLERANCE {
        return Err(Error::TimeNotOnGrid(t));
    }
    Ok(k as usize)
}

/// Restricts a fine-grid trajectory to `n_nodes` distinct observable nodes
/// drawn uniformly without replacement and to the times `t_obs`, which must
/// appear in `traj.times` (within 1e-9). Node order is ascending fine-grid
/// index.
pub fn downsample(
    grid: &FineGrid,
    traj: &Trajectory,
    state_dim: usize,
    n_nodes: usize,
    t_obs: &[f64],
    seed: u64,
) -> Result<SimulationRecord> {
    let pool: Vec<usize> = grid.observable().collect();
    if n_nodes == 0 || n_nodes > pool.len() {
        return Err(Error::InvalidConfig(format!(
            "cannot pick {n_nodes} nodes from {} observable grid nodes",
            pool.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<usize> = sample(&mut rng, pool.len(), n_nodes).into_iter().map(|i| pool[i]).collect();
    picked.sort_unstable();

    let mut states = Vec::with_capacity(t_obs.len());
    for &t in t_obs {
        let k = traj
            .times
            .iter()
            .position(|&s| (s - t).abs() <= TIME_TOLERANCE)
            .ok_or(Error::TimeNotOnGrid(t))?;
        let full = &traj.states[k];
        let mut s = Vec::with_capacity(n_nodes * state_dim);
        for &node in &picked {
            s.extend_from_slice(&full[node * state_dim..(node + 1) * state_dim]);
        }
        states.push(s);
    }
    Ok(SimulationRecord {
        coords: picked.iter().map(|&k| grid.coord(k)).collect(),
        times: t_obs.to_vec(),
        states,
        state_dim,
    })
}

/// Shifts every interior time by `N(0, σ²)` noise, keeping the endpoints.
/// The result is sorted, spread to gaps of at least `max(1e-4, gt_dt)` and
/// snapped to the nearest multiple of `gt_dt`, so it stays strictly
/// increasing and extractable from the reference solution.
pub fn perturb_times(t_obs: &[f64], sigma: f64, seed: u64, gt_dt: f64) -> Vec<f64> {
    if sigma == 0.0 || t_obs.len() < 3 {
        return t_obs.to_vec();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let last = t_obs.len() - 1;
    let mut t: Vec<f64> = t_obs
        .iter()
        .enumerate()
        .map(|(i, &ti)| {
            if i == 0 || i == last {
                ti
            } else {
                let eps: f64 = StandardNormal.sample(&mut rng);
                ti + sigma * eps
            }
        })
        .collect();
    t[1..last].sort_unstable_by(f64::total_cmp);
    let gap = MIN_TIME_GAP.max(gt_dt);
    for i in 1..last {
        t[i] = t[i].max(t[i - 1] + gap);
    }
    for i in (1..last).rev() {
        t[i] = t[i].min(t[i + 1] - gap);
    }
    for ti in &mut t[1..last] {
        *ti = libm::round(*ti / gt_dt) * gt_dt;
    }
    t
}

/// Adds i.i.d. `N(0, σ²)` noise to every state entry.
pub fn add_noise(record: &SimulationRecord, sigma: f64, seed: u64) -> SimulationRecord {
    let mut out = record.clone();
    if sigma == 0.0 {
        return out;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for state in &mut out.states {
        for v in state.iter_mut() {
            let eps: f64 = StandardNormal.sample(&mut rng);
            *v += sigma * eps;
        }
    }
    out
}

/// How one simulation is observed.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationPlan {
    pub n_nodes: usize,
    pub times: Vec<f64>,
    pub noise_sigma: f64,
    pub time_sigma: f64,
}

/// Generates one observation record: initial condition, reference solve,
/// optional time perturbation, node sampling and optional noise, each from
/// its own seed derived from `seed`.
pub fn simulate(spec: &EquationSpec, plan: &SimulationPlan, seed: u64) -> Result<SimulationRecord> {
    let mut seeds = ChaCha8Rng::seed_from_u64(seed);
    let (ic_seed, node_seed, time_seed, noise_seed) =
        (seeds.next_u64(), seeds.next_u64(), seeds.next_u64(), seeds.next_u64());
    let times = perturb_times(&plan.times, plan.time_sigma, time_seed, spec.gt_dt);
    let u0 = sample_initial_condition(spec, ic_seed)?;
    let traj = solve_ground_truth_at(spec, &u0, &times)?;
    let record = downsample(&spec.grid(), &traj, spec.state_dim(), plan.n_nodes, &times, node_seed)?;
    Ok(add_noise(&record, plan.noise_sigma, noise_seed))
}
