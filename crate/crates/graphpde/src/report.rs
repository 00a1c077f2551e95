//! CSV reports.

use std::fmt::Write as _;
use std::path::Path;

use graphpde_core::datagen::Dataset;

use crate::error::Result;
use crate::eval::EvalReport;
use crate::format::write_atomic;
use crate::train::TrainReport;

pub fn train_csv(report: &TrainReport) -> String {
    let mut s = String::from("iteration,loss,wall_ms\n");
    for r in &report.history {
        writeln!(s, "{},{:e},{:.3}", r.iteration, r.loss, r.wall_ms).unwrap();
    }
    s
}

pub fn eval_csv(report: &EvalReport) -> String {
    let mut s = String::from("sim_id,t,rel_err\n");
    for (i, sim) in report.simulations.iter().enumerate() {
        for (t, e) in sim.times.iter().zip(&sim.errors) {
            writeln!(s, "{i},{t},{e:e}").unwrap();
        }
    }
    s
}

/// One row per dataset, one column per model.
pub fn cross_grid_csv(models: &[String], datasets: &[String], matrix: &[Vec<f64>]) -> String {
    let mut s = String::from("dataset");
    for m in models {
        write!(s, ",{m}").unwrap();
    }
    s.push('\n');
    for (d, row) in datasets.iter().zip(matrix) {
        s.push_str(d);
        for v in row {
            write!(s, ",{v:e}").unwrap();
        }
        s.push('\n');
    }
    s
}

/// Every observation of every simulation, one node per line.
pub fn dataset_csv(ds: &Dataset) -> String {
    let d = ds.state_dim();
    let mut s = String::from("sim_id,t,node,x,y");
    for c in 0..d {
        write!(s, ",u{c}").unwrap();
    }
    s.push('\n');
    for (i, sim) in ds.simulations.iter().enumerate() {
        for (t, state) in sim.times.iter().zip(&sim.states) {
            for (n, (xy, u)) in sim.coords.iter().zip(state.chunks_exact(d)).enumerate() {
                write!(s, "{i},{t},{n},{},{}", xy[0], xy[1]).unwrap();
                for v in u {
                    write!(s, ",{v}").unwrap();
                }
                s.push('\n');
            }
        }
    }
    s
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    write_atomic(path, text.as_bytes())
}
