use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use graphpde::ablation::{ablation_csv, run_ablation, AblationKind, Experiment};
use graphpde::eval::{cross_grid_eval, evaluate, rollout};
use graphpde::format::{read_dataset, read_model, write_dataset, write_model, ModelFile};
use graphpde::generate::{generate_dataset, regular_times};
use graphpde::plot::{nearest_node_map, nodal_scalar, value_range, write_ppm, CANVAS};
use graphpde::report::{cross_grid_csv, dataset_csv, eval_csv, train_csv, write_text};
use graphpde::train::{graph_for, train, GradientMode, TrainConfig};
use graphpde::{Error, Result};
use graphpde_core::datagen::{EquationKind, EquationSpec, SimulationPlan};
use graphpde_core::metrics::{relative_error, ErrorField};
use graphpde_core::mpnn::{Surrogate, SurrogateConfig};
use graphpde_core::odeint::{Method, SolverConfig};

#[derive(Parser)]
#[command(name = "graphpde", version, about = "Learn PDE dynamics on scattered nodes with graph surrogates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset of simulated observations.
    Generate(GenerateArgs),
    /// Train a surrogate on a dataset.
    Train(TrainArgs),
    /// Evaluate models on datasets.
    Eval(EvalArgs),
    /// Render heatmaps of a simulation and optionally a model rollout.
    Plot(PlotArgs),
    /// Dump a dataset to CSV.
    Export(ExportArgs),
    /// Run one ablation sweep at desk scale.
    Ablation(AblationArgs),
}

#[derive(Args)]
struct SolverArgs {
    /// euler, rk4 or dopri5.
    #[arg(long, default_value = "dopri5")]
    solver: String,
    #[arg(long, default_value_t = 1e-7)]
    rtol: f64,
    #[arg(long, default_value_t = 1e-7)]
    atol: f64,
    /// Step of the fixed-step methods.
    #[arg(long, default_value_t = 1e-3)]
    step: f64,
}

impl SolverArgs {
    fn config(&self) -> Result<SolverConfig> {
        let method = Method::from_name(&self.solver)
            .ok_or_else(|| Error::Invalid(format!("unknown solver {:?}", self.solver)))?;
        let cfg = if method.is_adaptive() {
            SolverConfig::dopri5(self.rtol, self.atol)
        } else {
            SolverConfig::fixed(method, self.step)
        };
        cfg.validate().map_err(|e| Error::Invalid(e.to_string()))?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct GenerateArgs {
    /// heat, convdiff or burgers.
    #[arg(long)]
    equation: String,
    #[arg(long)]
    sims: usize,
    #[arg(long)]
    nodes: usize,
    #[arg(long, default_value_t = 0.0)]
    t0: f64,
    #[arg(long)]
    t1: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    /// Explicit observation times, comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["t1", "dt"])]
    times: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Standard deviation of additive observation noise.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// Standard deviation of observation-time perturbations.
    #[arg(long, default_value_t = 0.0)]
    perturb_times: f64,
    /// Side of the reference grid.
    #[arg(long)]
    gt_grid: Option<usize>,
    /// Step of the reference solver.
    #[arg(long)]
    gt_dt: Option<f64>,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Loss history CSV; defaults to the model path with `.loss.csv` appended.
    #[arg(long)]
    loss_csv: Option<PathBuf>,
    #[arg(long, default_value_t = 5000)]
    iters: usize,
    #[command(flatten)]
    solver: SolverArgs,
    /// adjoint or backprop.
    #[arg(long, default_value = "adjoint")]
    grad: String,
    /// RK4 step of the backprop gradient.
    #[arg(long, default_value_t = 1e-3)]
    backprop_dt: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    no_edge_features: bool,
    #[arg(long, default_value_t = 60)]
    hidden: usize,
    #[arg(long, default_value_t = 40)]
    message: usize,
    #[arg(long, default_value_t = 500)]
    patience: usize,
    /// Print every n-th iteration to standard error (0 disables).
    #[arg(long, default_value_t = 100)]
    log_every: usize,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long, num_args = 1.., required = true)]
    model: Vec<PathBuf>,
    #[arg(long, num_args = 1.., required = true)]
    data: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Write the dataset × model matrix of mean errors instead.
    #[arg(long)]
    cross_grid: bool,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    sim: usize,
    /// Times to render, comma separated; each must be an observation time.
    #[arg(long, value_delimiter = ',', required = true)]
    times: Vec<f64>,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    csv: PathBuf,
}

#[derive(Args)]
struct AblationArgs {
    /// grid_size, time_step, irregular_time, data_amount, noise or edge_features.
    #[arg(long)]
    kind: String,
    #[arg(long, default_value_t = 1000)]
    iters: usize,
    #[arg(long)]
    out: PathBuf,
}

enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Invalid(m) => Failure::Usage(m),
            e => Failure::Runtime(e),
        }
    }
}

impl From<graphpde_core::Error> for Failure {
    fn from(e: graphpde_core::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = e.to_string();
            let first = message.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("error: usage: {first}");
            return ExitCode::from(2);
        }
    };
    let result = match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Train(a) => cmd_train(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Plot(a) => cmd_plot(a),
        Command::Export(a) => cmd_export(a),
        Command::Ablation(a) => cmd_ablation(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: usage: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {}: {e}", e.code());
            ExitCode::from(1)
        }
    }
}

fn usage(m: impl Into<String>) -> Failure {
    Failure::Usage(m.into())
}

fn cmd_generate(a: GenerateArgs) -> Result<(), Failure> {
    let kind = EquationKind::from_name(&a.equation).ok_or_else(|| usage(format!("unknown equation {:?}", a.equation)))?;
    let mut spec = EquationSpec::for_kind(kind);
    if let Some(g) = a.gt_grid {
        spec.gt_grid = g;
    }
    if let Some(dt) = a.gt_dt {
        spec.gt_dt = dt;
    }
    spec.validate().map_err(|e| usage(e.to_string()))?;
    let times = match (a.times, a.t1, a.dt) {
        (Some(t), _, _) => t,
        (None, Some(t1), Some(dt)) if dt > 0.0 && t1 > a.t0 => regular_times(a.t0, t1, dt),
        (None, Some(_), Some(_)) => return Err(usage("--dt must be positive and --t1 after --t0")),
        _ => return Err(usage("give either --times or both --t1 and --dt")),
    };
    if a.sims == 0 || a.nodes == 0 {
        return Err(usage("--sims and --nodes must be positive"));
    }
    if !(a.noise >= 0.0 && a.perturb_times >= 0.0) {
        return Err(usage("--noise and --perturb-times must be non-negative"));
    }
    let plan = SimulationPlan { n_nodes: a.nodes, times, noise_sigma: a.noise, time_sigma: a.perturb_times };
    let ds = generate_dataset(&spec, &plan, a.sims, a.seed)?;
    write_dataset(&a.out, &ds)?;
    Ok(())
}

fn default_loss_csv(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".loss.csv");
    PathBuf::from(s)
}

fn cmd_train(a: TrainArgs) -> Result<(), Failure> {
    let solver = a.solver.config()?;
    let gradient = GradientMode::from_name(&a.grad).ok_or_else(|| usage(format!("unknown gradient mode {:?}", a.grad)))?;
    let ds = read_dataset(&a.data)?;
    let config = SurrogateConfig::new(ds.state_dim())
        .with_widths(a.hidden, a.message)
        .with_edge_features(!a.no_edge_features);
    let model = Surrogate::new(config).map_err(|e| usage(e.to_string()))?;
    let cfg = TrainConfig {
        iterations: a.iters,
        solver,
        gradient,
        backprop_dt: a.backprop_dt,
        patience: a.patience,
        seed: a.seed,
        ..TrainConfig::default()
    };
    cfg.validate(ds.simulations.len()).map_err(|e| usage(e.to_string()))?;
    let init = model.init_params(a.seed);
    let log_every = a.log_every;
    let (params, report) = train(&ds, &model, init, &cfg, |r| {
        if log_every > 0 && r.iteration % log_every == 0 {
            eprintln!("iter {} loss {:e} ({:.1} s)", r.iteration, r.loss, r.wall_ms / 1e3);
        }
    })?;
    let metadata = vec![
        ("equation".to_string(), ds.equation.kind.name().to_string()),
        ("data".to_string(), a.data.display().to_string()),
        ("seed".to_string(), a.seed.to_string()),
        ("iterations".to_string(), report.history.len().to_string()),
        ("best_iteration".to_string(), report.best_iteration.to_string()),
        ("best_loss".to_string(), format!("{:e}", report.best_loss)),
        ("solver".to_string(), solver.method.name().to_string()),
        ("gradient".to_string(), gradient.name().to_string()),
    ];
    write_model(&a.out, &ModelFile { config, params, metadata })?;
    write_text(&a.loss_csv.unwrap_or_else(|| default_loss_csv(&a.out)), &train_csv(&report))?;
    println!("best loss {:e} at iteration {}", report.best_loss, report.best_iteration);
    Ok(())
}

fn cmd_eval(a: EvalArgs) -> Result<(), Failure> {
    let solver = a.solver.config()?;
    let models = a.model.iter().map(|p| read_model(p)).collect::<Result<Vec<_>>>()?;
    let surrogates = models.iter().map(ModelFile::surrogate).collect::<Result<Vec<_>>>()?;
    let datasets = a.data.iter().map(|p| read_dataset(p)).collect::<Result<Vec<_>>>()?;
    if a.cross_grid {
        let pairs: Vec<_> = surrogates.iter().zip(&models).map(|(s, m)| (s, &m.params[..])).collect();
        let refs: Vec<_> = datasets.iter().collect();
        let matrix = cross_grid_eval(&pairs, &refs, &solver)?;
        let names = |paths: &[PathBuf]| paths.iter().map(|p| p.display().to_string()).collect::<Vec<_>>();
        write_text(&a.out, &cross_grid_csv(&names(&a.model), &names(&a.data), &matrix))?;
        return Ok(());
    }
    if models.len() != 1 || datasets.len() != 1 {
        return Err(usage("without --cross-grid give exactly one --model and one --data"));
    }
    let report = evaluate(&datasets[0], &surrogates[0], &models[0].params, &solver)?;
    write_text(&a.out, &eval_csv(&report))?;
    println!("mean relative error {:.6e} ± {:.6e} over {} simulations", report.mean, report.std_over_sims, report.simulations.len());
    Ok(())
}

fn cmd_plot(a: PlotArgs) -> Result<(), Failure> {
    let solver = a.solver.config()?;
    let ds = read_dataset(&a.data)?;
    let record = ds
        .simulations
        .get(a.sim)
        .ok_or_else(|| usage(format!("simulation {} out of range ({} available)", a.sim, ds.simulations.len())))?;
    let indices = a
        .times
        .iter()
        .map(|&t| {
            record
                .times
                .iter()
                .position(|&s| (s - t).abs() <= 1e-9)
                .ok_or_else(|| usage(format!("time {t} is not an observation time of simulation {}", a.sim)))
        })
        .collect::<Result<Vec<_>, _>>()?;
    std::fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;

    let prediction = match &a.model {
        Some(path) => {
            let mf = read_model(path)?;
            let model = mf.surrogate()?;
            let graph = graph_for(record)?;
            Some(rollout(&model, &graph, record, &mf.params, &solver)?)
        }
        None => None,
    };
    let d = record.state_dim;
    let map = nearest_node_map(&record.coords, ds.equation.lo, ds.equation.hi, CANVAS);
    let field = ErrorField::for_kind(ds.equation.kind);
    let mut curve = String::from("sim_id,t,rel_err\n");
    for (&k, &t) in indices.iter().zip(&a.times) {
        let truth = nodal_scalar(&record.states[k], d);
        let name = |what: &str| a.out.join(format!("{what}_t{k:03}.ppm"));
        match &prediction {
            None => write_ppm(&name("true"), &map, CANVAS, &truth, value_range([truth.as_slice()]))?,
            Some(traj) => {
                let pred = nodal_scalar(&traj.states[k], d);
                let range = value_range([truth.as_slice(), pred.as_slice()]);
                let diff: Vec<f64> = truth.iter().zip(&pred).map(|(a, b)| (a - b).abs()).collect();
                write_ppm(&name("true"), &map, CANVAS, &truth, range)?;
                write_ppm(&name("pred"), &map, CANVAS, &pred, range)?;
                write_ppm(&name("diff"), &map, CANVAS, &diff, value_range([diff.as_slice()]))?;
                let err = relative_error(&traj.states[k], &record.states[k], d, field)?;
                curve.push_str(&format!("{},{t},{err:e}\n", a.sim));
            }
        }
    }
    if prediction.is_some() {
        write_text(&a.out.join("errors.csv"), &curve)?;
    }
    Ok(())
}

fn cmd_export(a: ExportArgs) -> Result<(), Failure> {
    let ds = read_dataset(&a.data)?;
    write_text(&a.csv, &dataset_csv(&ds))?;
    Ok(())
}

fn cmd_ablation(a: AblationArgs) -> Result<(), Failure> {
    let kind = AblationKind::from_name(&a.kind).ok_or_else(|| usage(format!("unknown ablation {:?}", a.kind)))?;
    if a.iters == 0 {
        return Err(usage("--iters must be positive"));
    }
    let base = Experiment::desk(a.iters);
    let report = run_ablation(kind, &base, &mut |label, r| {
        if r.iteration % 100 == 0 {
            eprintln!("{label}: iter {} loss {:e}", r.iteration, r.loss);
        }
    })?;
    write_text(&a.out, &ablation_csv(&report))?;
    for (label, o) in &report.settings {
        println!("{label}: mean relative error {:.4e}", o.eval.mean);
    }
    Ok(())
}
