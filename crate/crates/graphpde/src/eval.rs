//! Rollout evaluation of a trained surrogate.

use std::time::Instant;

use graphpde_core::datagen::{Dataset, SimulationRecord};
use graphpde_core::geometry::Graph;
use graphpde_core::metrics::{relative_error, ErrorField};
use graphpde_core::mpnn::{Surrogate, SurrogateWorkspace};
use graphpde_core::odeint::{integrate, SolverConfig, Trajectory};
use graphpde_core::{Error, Result};
use rayon::prelude::*;

use crate::train::graph_for;

/// Relative errors of one simulation at its observation times after the
/// first (the first is the initial condition and is reproduced exactly).
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationErrors {
    pub times: Vec<f64>,
    pub errors: Vec<f64>,
}

impl SimulationErrors {
    pub fn mean(&self) -> f64 {
        self.errors.iter().sum::<f64>() / self.errors.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub simulations: Vec<SimulationErrors>,
    /// Mean over every (simulation, time) entry.
    pub mean: f64,
    /// Standard deviation over simulations of their time-averaged error.
    pub std_over_sims: f64,
    pub wall_ms: f64,
}

/// Rolls the surrogate out from the record's first state over its times.
pub fn rollout(
    model: &Surrogate,
    graph: &Graph,
    record: &SimulationRecord,
    params: &[f64],
    solver: &SolverConfig,
) -> Result<Trajectory> {
    let mut ws = SurrogateWorkspace::new();
    integrate(
        |_, u: &[f64], du: &mut [f64]| model.eval(graph, u, params, &mut ws, du),
        &record.states[0],
        &record.times,
        solver,
    )
}

pub fn evaluate_simulation(
    model: &Surrogate,
    record: &SimulationRecord,
    params: &[f64],
    solver: &SolverConfig,
    field: ErrorField,
) -> Result<SimulationErrors> {
    if record.times.len() < 2 {
        return Err(Error::InvalidConfig("evaluation needs at least two times".into()));
    }
    let graph = graph_for(record)?;
    let traj = rollout(model, &graph, record, params, solver)?;
    let d = record.state_dim;
    let errors = traj
        .states
        .iter()
        .zip(&record.states)
        .skip(1)
        .map(|(p, y)| relative_error(p, y, d, field))
        .collect::<Result<Vec<_>>>()?;
    Ok(SimulationErrors { times: record.times[1..].to_vec(), errors })
}

pub fn evaluate(dataset: &Dataset, model: &Surrogate, params: &[f64], solver: &SolverConfig) -> Result<EvalReport> {
    if model.config().state_dim != dataset.state_dim() {
        return Err(Error::ShapeMismatch(format!(
            "model has {} state components, dataset has {}",
            model.config().state_dim,
            dataset.state_dim()
        )));
    }
    if dataset.simulations.is_empty() {
        return Err(Error::InvalidConfig("dataset has no simulations".into()));
    }
    let start = Instant::now();
    let field = ErrorField::for_kind(dataset.equation.kind);
    let simulations = dataset
        .simulations
        .par_iter()
        .map(|rec| evaluate_simulation(model, rec, params, solver, field))
        .collect::<Result<Vec<_>>>()?;
    let entries: Vec<f64> = simulations.iter().flat_map(|s| s.errors.iter().copied()).collect();
    let mean = entries.iter().sum::<f64>() / entries.len() as f64;
    let per_sim: Vec<f64> = simulations.iter().map(SimulationErrors::mean).collect();
    let sim_mean = per_sim.iter().sum::<f64>() / per_sim.len() as f64;
    let var = per_sim.iter().map(|m| (m - sim_mean) * (m - sim_mean)).sum::<f64>() / per_sim.len() as f64;
    Ok(EvalReport { simulations, mean, std_over_sims: var.sqrt(), wall_ms: start.elapsed().as_secs_f64() * 1e3 })
}

/// `matrix[g][m]` is the mean error of model `m` on dataset `g`.
pub fn cross_grid_eval(
    models: &[(&Surrogate, &[f64])],
    datasets: &[&Dataset],
    solver: &SolverConfig,
) -> Result<Vec<Vec<f64>>> {
    if let Some((first, _)) = models.first() {
        let d = first.config().state_dim;
        if models.iter().any(|(m, _)| m.config().state_dim != d) {
            return Err(Error::ShapeMismatch("models differ in state dimension".into()));
        }
    }
    datasets
        .iter()
        .map(|data| models.iter().map(|(m, p)| evaluate(data, m, p, solver).map(|r| r.mean)).collect())
        .collect()
}
