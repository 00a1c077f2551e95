mod common;

use common::{decay_dataset, self_generated};
use graphpde::eval::{cross_grid_eval, evaluate};
use graphpde::train::{train, GradientMode, TrainConfig};
use graphpde_core::mpnn::{Surrogate, SurrogateConfig};
use graphpde_core::odeint::SolverConfig;

fn model() -> Surrogate {
    Surrogate::new(SurrogateConfig::new(1).with_widths(8, 8)).unwrap()
}

#[test]
fn generating_model_reproduces_its_own_data() {
    let m = model();
    let theta = m.init_params(5);
    let fine = SolverConfig::dopri5(1e-10, 1e-10);
    let ds = self_generated(&m, &theta, 3, 15, &[0.0, 0.1, 0.2, 0.4], &fine, 21);
    let tol = 1e-6;
    let report = evaluate(&ds, &m, &theta, &SolverConfig::dopri5(tol, tol)).unwrap();
    let worst = report.simulations.iter().flat_map(|s| s.errors.iter().copied()).fold(0.0, f64::max);
    assert!(worst <= 100.0 * tol, "{worst:e}");
}

#[test]
fn report_mean_is_the_mean_of_its_entries() {
    let m = model();
    let ds = decay_dataset(3, &[0.0, 0.3, 0.6, 1.0]);
    let report = evaluate(&ds, &m, &m.init_params(2), &SolverConfig::default()).unwrap();
    let entries: Vec<f64> = report.simulations.iter().flat_map(|s| s.errors.clone()).collect();
    assert_eq!(entries.len(), 9);
    assert!(entries.iter().all(|&e| e >= 0.0));
    let mean = entries.iter().sum::<f64>() / entries.len() as f64;
    assert!((report.mean - mean).abs() <= 1e-12);
    assert_eq!(report.simulations[0].times, vec![0.3, 0.6, 1.0]);
}

#[test]
fn evaluation_is_repeatable() {
    let m = model();
    let ds = decay_dataset(2, &[0.0, 0.5]);
    let p = m.init_params(3);
    let a = evaluate(&ds, &m, &p, &SolverConfig::default()).unwrap();
    let b = evaluate(&ds, &m, &p, &SolverConfig::default()).unwrap();
    assert_eq!(a.simulations, b.simulations);
}

#[test]
fn trained_model_beats_untrained_model() {
    let m = model();
    let times: Vec<f64> = (0..=10).map(|i| i as f64 * 0.1).collect();
    let ds = decay_dataset(3, &times);
    let init = m.init_params(4);
    let solver = SolverConfig::default();
    let before = evaluate(&ds, &m, &init, &solver).unwrap().mean;
    let cfg = TrainConfig { iterations: 300, gradient: GradientMode::Adjoint, ..TrainConfig::default() };
    let (params, _) = train(&ds, &m, init, &cfg, |_| {}).unwrap();
    let after = evaluate(&ds, &m, &params, &solver).unwrap().mean;
    assert!(after < before, "{after} vs {before}");
}

#[test]
fn cross_grid_diagonal_matches_single_evaluations() {
    let m = model();
    let fine = SolverConfig::dopri5(1e-9, 1e-9);
    let (pa, pb) = (m.init_params(1), m.init_params(2));
    let da = self_generated(&m, &pa, 2, 10, &[0.0, 0.1, 0.2], &fine, 30);
    let db = self_generated(&m, &pb, 2, 20, &[0.0, 0.1, 0.2], &fine, 40);
    let solver = SolverConfig::default();
    let matrix = cross_grid_eval(&[(&m, &pa), (&m, &pb)], &[&da, &db], &solver).unwrap();
    assert_eq!(matrix.len(), 2);
    assert!(matrix.iter().all(|row| row.len() == 2));
    assert_eq!(matrix[0][0], evaluate(&da, &m, &pa, &solver).unwrap().mean);
    assert_eq!(matrix[1][1], evaluate(&db, &m, &pb, &solver).unwrap().mean);
    assert!(matrix[0][1] > matrix[0][0]);
}

#[test]
fn mismatched_inputs_are_rejected() {
    let ds = decay_dataset(1, &[0.0, 0.5]);
    let wide = Surrogate::new(SurrogateConfig::new(2)).unwrap();
    assert!(evaluate(&ds, &wide, &wide.init_params(0), &SolverConfig::default()).is_err());
    let single = decay_dataset(1, &[0.0]);
    let m = model();
    assert!(evaluate(&single, &m, &m.init_params(0), &SolverConfig::default()).is_err());
    let m1 = model();
    assert!(cross_grid_eval(&[(&m1, &m1.init_params(0)), (&wide, &wide.init_params(0))], &[&ds], &SolverConfig::default()).is_err());
}
