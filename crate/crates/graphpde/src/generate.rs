//! Dataset generation over many simulations.

use graphpde_core::datagen::{simulate, Dataset, EquationSpec, SimulationPlan};
use graphpde_core::Result;
use rayon::prelude::*;

/// Seed of simulation `index` within a dataset seeded with `seed`
/// (SplitMix64 finalizer over the pair).
pub fn simulation_seed(seed: u64, index: usize) -> u64 {
    let mut z = seed ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generates `sims` simulations in parallel; the result does not depend on
/// the thread count.
pub fn generate_dataset(spec: &EquationSpec, plan: &SimulationPlan, sims: usize, seed: u64) -> Result<Dataset> {
    spec.validate()?;
    let simulations = (0..sims)
        .into_par_iter()
        .map(|i| simulate(spec, plan, simulation_seed(seed, i)))
        .collect::<Result<Vec<_>>>()?;
    let metadata = vec![
        ("seed".to_string(), seed.to_string()),
        ("nodes".to_string(), plan.n_nodes.to_string()),
        ("noise_sigma".to_string(), plan.noise_sigma.to_string()),
        ("time_sigma".to_string(), plan.time_sigma.to_string()),
        ("boundary_nodes".to_string(), "excluded".to_string()),
        ("reference".to_string(), format!("{}x{} grid, dt {}", spec.gt_grid, spec.gt_grid, spec.gt_dt)),
    ];
    Ok(Dataset { equation: *spec, simulations, metadata })
}

/// `t0, t0 + dt, …` up to `t1` inclusive, computed as `t0 + k·dt`.
pub fn regular_times(t0: f64, t1: f64, dt: f64) -> Vec<f64> {
    let steps = ((t1 - t0) / dt).round() as usize;
    (0..=steps).map(|k| t0 + k as f64 * dt).collect()
}
