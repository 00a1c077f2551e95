//! Experiment runner: generate train and test data, train, evaluate, and
//! sweep one axis of the setup.

use std::fmt::Write as _;
use std::time::Instant;

use graphpde_core::datagen::{EquationSpec, SimulationPlan};
use graphpde_core::mpnn::{Surrogate, SurrogateConfig};
use graphpde_core::odeint::{Method, SolverConfig};
use graphpde_core::{Error, Result};

use crate::eval::{evaluate, EvalReport};
use crate::generate::{generate_dataset, regular_times};
use crate::train::{train, GradientMode, IterationRecord, TrainConfig, TrainReport};

/// A complete train-and-evaluate setup.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub equation: EquationSpec,
    pub n_nodes: usize,
    pub train_times: Vec<f64>,
    pub test_times: Vec<f64>,
    pub train_sims: usize,
    pub test_sims: usize,
    pub noise_sigma: f64,
    pub time_sigma: f64,
    pub model: SurrogateConfig,
    pub train: TrainConfig,
    pub eval_solver: SolverConfig,
    /// Seeds the training data; test data uses `data_seed + 1`.
    pub data_seed: u64,
    pub init_seed: u64,
}

impl Experiment {
    /// Convection–diffusion on `[0, 0.2]` with 11 observation times, 8
    /// training and 10 test simulations of 250 nodes, and a surrogate with
    /// 16-wide layers trained for `iterations` steps through fixed-step RK4.
    pub fn desk(iterations: usize) -> Self {
        let times = regular_times(0.0, 0.2, 0.02);
        let model = SurrogateConfig::new(1).with_widths(16, 16);
        let train = TrainConfig {
            iterations,
            solver: SolverConfig::fixed(Method::Rk4, 0.02),
            gradient: GradientMode::Backprop,
            backprop_dt: 0.02,
            ..TrainConfig::default()
        };
        Self {
            equation: EquationSpec::convdiff(),
            n_nodes: 250,
            train_times: times.clone(),
            test_times: times,
            train_sims: 8,
            test_sims: 10,
            noise_sigma: 0.0,
            time_sigma: 0.0,
            model,
            train,
            eval_solver: SolverConfig::dopri5(1e-6, 1e-6),
            data_seed: 1,
            init_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutcome {
    pub train: TrainReport,
    pub eval: EvalReport,
    pub untrained: EvalReport,
    pub params: Vec<f64>,
    pub wall_ms: f64,
}

pub fn run_experiment(exp: &Experiment, progress: &mut dyn FnMut(&IterationRecord)) -> Result<ExperimentOutcome> {
    let start = Instant::now();
    let train_plan = SimulationPlan {
        n_nodes: exp.n_nodes,
        times: exp.train_times.clone(),
        noise_sigma: exp.noise_sigma,
        time_sigma: exp.time_sigma,
    };
    let test_plan = SimulationPlan { n_nodes: exp.n_nodes, times: exp.test_times.clone(), noise_sigma: 0.0, time_sigma: 0.0 };
    let train_data = generate_dataset(&exp.equation, &train_plan, exp.train_sims, exp.data_seed)?;
    let test_data = generate_dataset(&exp.equation, &test_plan, exp.test_sims, exp.data_seed.wrapping_add(1))?;
    let model = Surrogate::new(exp.model)?;
    let init = model.init_params(exp.init_seed);
    let untrained = evaluate(&test_data, &model, &init, &exp.eval_solver)?;
    let (params, report) = train(&train_data, &model, init, &exp.train, progress)?;
    let eval = evaluate(&test_data, &model, &params, &exp.eval_solver)?;
    Ok(ExperimentOutcome {
        train: report,
        eval,
        untrained,
        params: params.into_inner(),
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AblationKind {
    GridSize,
    TimeStep,
    IrregularTime,
    DataAmount,
    Noise,
    EdgeFeatures,
}

impl AblationKind {
    pub const ALL: [AblationKind; 6] = [
        AblationKind::GridSize,
        AblationKind::TimeStep,
        AblationKind::IrregularTime,
        AblationKind::DataAmount,
        AblationKind::Noise,
        AblationKind::EdgeFeatures,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AblationKind::GridSize => "grid_size",
            AblationKind::TimeStep => "time_step",
            AblationKind::IrregularTime => "irregular_time",
            AblationKind::DataAmount => "data_amount",
            AblationKind::Noise => "noise",
            AblationKind::EdgeFeatures => "edge_features",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

/// Settings swept by an ablation, derived from `base`:
///
/// - grid size: `2n`, `n`, `n/2` nodes;
/// - time step: 11, 4 and 2 evenly spaced training times over the base span;
/// - irregular time: regular, then times perturbed by `σ = Δt/6`;
/// - data amount: `k/4`, `k/2` and `k` training simulations (at least one);
/// - noise: additive noise `σ ∈ {0, 0.01, 0.05}`;
/// - edge features: on, off.
///
/// Test data always follows the base setting apart from the node count.
pub fn ablation_settings(kind: AblationKind, base: &Experiment) -> Result<Vec<(String, Experiment)>> {
    let (t0, t1) = match (base.train_times.first(), base.train_times.last()) {
        (Some(&a), Some(&b)) if b > a => (a, b),
        _ => return Err(Error::InvalidConfig("base experiment needs at least two training times".into())),
    };
    let with = |f: &dyn Fn(&mut Experiment)| {
        let mut e = base.clone();
        f(&mut e);
        e
    };
    Ok(match kind {
        AblationKind::GridSize => [2 * base.n_nodes, base.n_nodes, (base.n_nodes / 2).max(3)]
            .into_iter()
            .map(|n| (format!("nodes={n}"), with(&|e| e.n_nodes = n)))
            .collect(),
        AblationKind::TimeStep => [11usize, 4, 2]
            .into_iter()
            .map(|k| {
                let step = (t1 - t0) / (k - 1) as f64;
                let times: Vec<f64> = (0..k).map(|i| if i + 1 == k { t1 } else { t0 + i as f64 * step }).collect();
                (format!("times={k}"), with(&|e| e.train_times = times.clone()))
            })
            .collect(),
        AblationKind::IrregularTime => {
            let dt = (t1 - t0) / (base.train_times.len() - 1) as f64;
            vec![
                ("regular".to_string(), with(&|e| e.time_sigma = 0.0)),
                ("irregular".to_string(), with(&|e| e.time_sigma = dt / 6.0)),
            ]
        }
        AblationKind::DataAmount => [base.train_sims / 4, base.train_sims / 2, base.train_sims]
            .into_iter()
            .map(|k| {
                let k = k.max(1);
                (format!("sims={k}"), with(&|e| e.train_sims = k))
            })
            .collect(),
        AblationKind::Noise => [0.0, 0.01, 0.05]
            .into_iter()
            .map(|s| (format!("noise={s}"), with(&|e| e.noise_sigma = s)))
            .collect(),
        AblationKind::EdgeFeatures => [true, false]
            .into_iter()
            .map(|on| (format!("edge_features={}", if on { "on" } else { "off" }), with(&|e| e.model.use_edge_features = on)))
            .collect(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationReport {
    pub kind: AblationKind,
    pub settings: Vec<(String, ExperimentOutcome)>,
}

impl AblationReport {
    pub fn mean_errors(&self) -> Vec<f64> {
        self.settings.iter().map(|(_, o)| o.eval.mean).collect()
    }
}

pub fn run_ablation(
    kind: AblationKind,
    base: &Experiment,
    progress: &mut dyn FnMut(&str, &IterationRecord),
) -> Result<AblationReport> {
    let mut settings = Vec::new();
    for (label, exp) in ablation_settings(kind, base)? {
        let outcome = run_experiment(&exp, &mut |r| progress(&label, r))?;
        settings.push((label, outcome));
    }
    Ok(AblationReport { kind, settings })
}

pub fn ablation_csv(report: &AblationReport) -> String {
    let mut s = String::from("ablation,setting,mean_rel_err,std_over_sims,untrained_rel_err,final_loss,iterations,wall_ms\n");
    for (label, o) in &report.settings {
        writeln!(
            s,
            "{},{},{:e},{:e},{:e},{:e},{},{:.0}",
            report.kind.name(),
            label,
            o.eval.mean,
            o.eval.std_over_sims,
            o.untrained.mean,
            o.train.best_loss,
            o.train.history.len(),
            o.wall_ms
        )
        .unwrap();
    }
    s
}
