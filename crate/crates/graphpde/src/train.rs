//! Full-batch training with Rprop.

use std::time::Instant;

use graphpde_core::datagen::{Dataset, SimulationRecord};
use graphpde_core::geometry::{build_graph, delaunay, Graph, Point, PointSet};
use graphpde_core::mpnn::Surrogate;
use graphpde_core::nn::{ParamVector, Rprop, RpropConfig};
use graphpde_core::odeint::{adjoint_gradient, backprop_gradient, SolverConfig, SurrogateDynamics};
use graphpde_core::{Error, Result};
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradientMode {
    Adjoint,
    /// Reverse sweep through fixed-step RK4 with step `TrainConfig::backprop_dt`.
    Backprop,
}

impl GradientMode {
    pub fn name(self) -> &'static str {
        match self {
            GradientMode::Adjoint => "adjoint",
            GradientMode::Backprop => "backprop",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "adjoint" => Some(GradientMode::Adjoint),
            "backprop" => Some(GradientMode::Backprop),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub iterations: usize,
    /// Simulation indices used every iteration; `None` means all.
    pub batch: Option<Vec<usize>>,
    pub solver: SolverConfig,
    pub gradient: GradientMode,
    pub backprop_dt: f64,
    pub rprop: RpropConfig,
    /// Stop after this many iterations without a loss improvement of at
    /// least `min_improvement`.
    pub patience: usize,
    pub min_improvement: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            iterations: 5000,
            batch: None,
            solver: SolverConfig::default(),
            gradient: GradientMode::Adjoint,
            backprop_dt: 1e-3,
            rprop: RpropConfig::default(),
            patience: 500,
            min_improvement: 1e-10,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self, n_sims: usize) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::InvalidConfig("iteration budget must be positive".into()));
        }
        if let Some(batch) = &self.batch {
            if batch.is_empty() || batch.iter().any(|&i| i >= n_sims) {
                return Err(Error::InvalidConfig(format!("batch {batch:?} does not index {n_sims} simulations")));
            }
        }
        if n_sims == 0 {
            return Err(Error::InvalidConfig("dataset has no simulations".into()));
        }
        self.solver.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Mean over the batch of the per-simulation losses.
    pub loss: f64,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub history: Vec<IterationRecord>,
    pub stopped_early: bool,
    /// Iteration whose parameters were returned (lowest loss seen).
    pub best_iteration: usize,
    pub best_loss: f64,
}

/// Delaunay graph over the record's observation positions. Point sets with
/// fewer than three nodes or all on one line get the path along that line.
pub fn graph_for(record: &SimulationRecord) -> Result<Graph> {
    let coords = record.coords.clone();
    match PointSet::from_coords(coords.clone()).and_then(|points| Ok((delaunay(&points)?, points))) {
        Ok((tri, points)) => build_graph(&tri, &points),
        Err(Error::DegenerateInput(_)) => path_graph(coords),
        Err(e) => Err(e),
    }
}

fn path_graph(coords: Vec<Point>) -> Result<Graph> {
    let mut order: Vec<usize> = (0..coords.len()).collect();
    order.sort_by(|&a, &b| coords[a][0].total_cmp(&coords[b][0]).then(coords[a][1].total_cmp(&coords[b][1])));
    let edges: Vec<_> = order.windows(2).map(|w| (w[0], w[1])).collect();
    Graph::from_edges(coords, &edges)
}

/// Loss and parameter gradient of one simulation.
pub fn simulation_gradient(
    model: &Surrogate,
    graph: &Graph,
    record: &SimulationRecord,
    params: &[f64],
    cfg: &TrainConfig,
) -> Result<(f64, Vec<f64>)> {
    let mut dynamics = SurrogateDynamics::new(model, graph, params)?;
    match cfg.gradient {
        GradientMode::Adjoint => {
            adjoint_gradient(&mut dynamics, &record.states[0], &record.times, &record.states, &cfg.solver)
                .map(|(loss, grad, _)| (loss, grad))
        }
        GradientMode::Backprop => {
            backprop_gradient(&mut dynamics, &record.states[0], &record.times, &record.states, cfg.backprop_dt)
        }
    }
}

/// Mean loss over `sims` and the gradient summed in index order.
pub fn batch_gradient(
    model: &Surrogate,
    graphs: &[Graph],
    dataset: &Dataset,
    sims: &[usize],
    params: &[f64],
    cfg: &TrainConfig,
) -> Result<(f64, Vec<f64>)> {
    let parts: Vec<Result<(f64, Vec<f64>)>> = sims
        .par_iter()
        .map(|&i| simulation_gradient(model, &graphs[i], &dataset.simulations[i], params, cfg))
        .collect();
    let mut loss = 0.0;
    let mut grad = vec![0.0; params.len()];
    for part in parts {
        let (l, g) = part?;
        loss += l;
        for (a, b) in grad.iter_mut().zip(&g) {
            *a += b;
        }
    }
    Ok((loss / sims.len() as f64, grad))
}

/// Fits `params` to the dataset. `progress` is called after every
/// iteration with its record.
pub fn train(
    dataset: &Dataset,
    model: &Surrogate,
    params: ParamVector,
    cfg: &TrainConfig,
    mut progress: impl FnMut(&IterationRecord),
) -> Result<(ParamVector, TrainReport)> {
    cfg.validate(dataset.simulations.len())?;
    if model.config().state_dim != dataset.state_dim() {
        return Err(Error::ShapeMismatch(format!(
            "model has {} state components, dataset has {}",
            model.config().state_dim,
            dataset.state_dim()
        )));
    }
    if params.len() != model.param_count() {
        return Err(Error::ShapeMismatch(format!(
            "{} parameters for a model with {}",
            params.len(),
            model.param_count()
        )));
    }
    let sims: Vec<usize> = cfg.batch.clone().unwrap_or_else(|| (0..dataset.simulations.len()).collect());
    let graphs = dataset.simulations.iter().map(graph_for).collect::<Result<Vec<_>>>()?;

    let mut rprop = Rprop::new(cfg.rprop, params.len())?;
    let mut params = params;
    let mut best = (f64::INFINITY, 0, params.clone());
    let mut stale = 0;
    let mut history = Vec::with_capacity(cfg.iterations);
    let start = Instant::now();
    let mut stopped_early = false;
    for iteration in 0..cfg.iterations {
        let (loss, grad) = batch_gradient(model, &graphs, dataset, &sims, &params, cfg)?;
        if !loss.is_finite() {
            return Err(Error::NonFiniteGradient);
        }
        if loss < best.0 - cfg.min_improvement {
            stale = 0;
        } else {
            stale += 1;
        }
        if loss < best.0 {
            best = (loss, iteration, params.clone());
        }
        rprop.step(&mut params, &grad)?;
        let record = IterationRecord { iteration, loss, wall_ms: start.elapsed().as_secs_f64() * 1e3 };
        progress(&record);
        history.push(record);
        if stale >= cfg.patience {
            stopped_early = true;
            break;
        }
    }
    let (best_loss, best_iteration, best_params) = best;
    Ok((best_params, TrainReport { history, stopped_early, best_iteration, best_loss }))
}
