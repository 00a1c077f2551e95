#![allow(dead_code)]

use graphpde_core::datagen::{Dataset, EquationSpec, SimulationRecord};
use graphpde_core::mpnn::Surrogate;
use graphpde_core::odeint::SolverConfig;
use graphpde::eval::rollout;
use graphpde::train::graph_for;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_coords(n: usize, seed: u64) -> Vec<[f64; 2]> {
    let mut r = rng(seed);
    (0..n).map(|_| [r.random_range(0.0..1.0), r.random_range(0.0..1.0)]).collect()
}

/// Data of `u̇ = −u` on a two-node graph for several initial values.
pub fn decay_dataset(sims: usize, times: &[f64]) -> Dataset {
    let simulations = (0..sims)
        .map(|s| {
            let u0 = [0.5 + 0.3 * s as f64, -0.4 + 0.25 * s as f64];
            SimulationRecord {
                coords: vec![[0.2, 0.5], [0.8, 0.5]],
                times: times.to_vec(),
                states: times.iter().map(|t| u0.iter().map(|u| u * (-t).exp()).collect()).collect(),
                state_dim: 1,
            }
        })
        .collect();
    Dataset { equation: EquationSpec::heat(), simulations, metadata: vec![] }
}

/// Observations produced by the surrogate itself at `params`.
pub fn self_generated(
    model: &Surrogate,
    params: &[f64],
    sims: usize,
    nodes: usize,
    times: &[f64],
    solver: &SolverConfig,
    seed: u64,
) -> Dataset {
    let simulations = (0..sims)
        .map(|s| {
            let coords = random_coords(nodes, seed + s as u64);
            let mut r = rng(seed + 100 + s as u64);
            let u0: Vec<f64> = (0..nodes).map(|_| r.random_range(-1.0..1.0)).collect();
            let mut record =
                SimulationRecord { coords, times: times.to_vec(), states: vec![u0; times.len()], state_dim: 1 };
            let graph = graph_for(&record).unwrap();
            record.states = rollout(model, &graph, &record, params, solver).unwrap().states;
            record
        })
        .collect();
    Dataset { equation: EquationSpec::heat(), simulations, metadata: vec![] }
}
