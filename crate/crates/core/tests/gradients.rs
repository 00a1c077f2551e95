mod common;

use common::{random_graph, random_vec, rel_diff, rng};
use graphpde_core::geometry::Graph;
use graphpde_core::mpnn::{Surrogate, SurrogateConfig};
use graphpde_core::odeint::{
    adjoint_gradient, backprop_gradient, integrate, Dynamics, LinearDynamics, Method, SolverConfig,
    SurrogateDynamics,
};
use rand::seq::index::sample;

struct Setup {
    graph: Graph,
    model: Surrogate,
    params: Vec<f64>,
    u0: Vec<f64>,
    t_obs: Vec<f64>,
    y_obs: Vec<Vec<f64>>,
}

fn setup(nodes: usize, t_obs: Vec<f64>, seed: u64) -> Setup {
    let graph = random_graph(nodes, seed);
    let model = Surrogate::new(SurrogateConfig::new(1)).unwrap();
    let params = model.init_params(seed).into_inner();
    let u0 = random_vec(nodes, 1.0, seed + 1);
    let y_obs = (0..t_obs.len())
        .map(|i| if i == 0 { u0.clone() } else { random_vec(nodes, 1.0, seed + 10 + i as u64) })
        .collect();
    Setup { graph, model, params, u0, t_obs, y_obs }
}

impl Setup {
    fn loss(&self, params: &[f64], solver: &SolverConfig) -> f64 {
        let mut dynamics = SurrogateDynamics::new(&self.model, &self.graph, params).unwrap();
        let traj = integrate(|_, u: &[f64], du: &mut [f64]| dynamics.eval(u, du), &self.u0, &self.t_obs, solver).unwrap();
        let m = self.t_obs.len() as f64;
        traj.states
            .iter()
            .zip(&self.y_obs)
            .skip(1)
            .map(|(p, y)| p.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
            .sum::<f64>()
            / m
    }

    fn adjoint(&self, solver: &SolverConfig) -> (f64, Vec<f64>) {
        let mut dynamics = SurrogateDynamics::new(&self.model, &self.graph, &self.params).unwrap();
        let (loss, grad, _) = adjoint_gradient(&mut dynamics, &self.u0, &self.t_obs, &self.y_obs, solver).unwrap();
        (loss, grad)
    }

    fn backprop(&self, dt: f64) -> (f64, Vec<f64>) {
        let mut dynamics = SurrogateDynamics::new(&self.model, &self.graph, &self.params).unwrap();
        backprop_gradient(&mut dynamics, &self.u0, &self.t_obs, &self.y_obs, dt).unwrap()
    }
}

#[test]
fn adjoint_matches_finite_differences_and_backprop() {
    let s = setup(10, vec![0.0, 0.5, 1.0], 7);
    let (loss, adj) = s.adjoint(&SolverConfig::default());
    let fd_solver = SolverConfig::dopri5(1e-12, 1e-12);
    assert!((loss - s.loss(&s.params, &fd_solver)).abs() < 1e-8 * loss);

    let coords = sample(&mut rng(99), s.params.len(), 50).into_vec();
    let h = 1e-5;
    let mut fd = Vec::new();
    let mut sel = Vec::new();
    for &k in &coords {
        let mut p = s.params.clone();
        p[k] += h;
        let up = s.loss(&p, &fd_solver);
        p[k] -= 2.0 * h;
        let down = s.loss(&p, &fd_solver);
        fd.push((up - down) / (2.0 * h));
        sel.push(adj[k]);
    }
    let err_fd = rel_diff(&sel, &fd);
    assert!(err_fd <= 1e-4, "adjoint vs finite differences: {err_fd:e}");

    let (bp_loss, bp) = s.backprop(1e-3);
    assert!((bp_loss - loss).abs() < 1e-6 * loss);
    let err_bp = rel_diff(&adj, &bp);
    assert!(err_bp <= 1e-3, "adjoint vs backprop: {err_bp:e}");
}

#[test]
fn backprop_is_the_exact_discrete_gradient() {
    let s = setup(5, vec![0.0, 0.05, 0.1], 3);
    let dt = 0.05;
    let (_, bp) = s.backprop(dt);
    let solver = SolverConfig::fixed(Method::Rk4, dt);
    let h = 1e-6;
    let coords = sample(&mut rng(5), s.params.len(), 40).into_vec();
    let mut fd = Vec::new();
    let mut sel = Vec::new();
    for &k in &coords {
        let mut p = s.params.clone();
        p[k] += h;
        let up = s.loss(&p, &solver);
        p[k] -= 2.0 * h;
        let down = s.loss(&p, &solver);
        fd.push((up - down) / (2.0 * h));
        sel.push(bp[k]);
    }
    let err = rel_diff(&sel, &fd);
    assert!(err <= 1e-7, "{err:e}");
}

#[test]
fn backprop_loss_matches_fixed_step_rollout_on_uneven_intervals() {
    let s = setup(8, vec![0.0, 0.07, 0.1, 0.23], 31);
    let dt = 0.03;
    let (loss, _) = s.backprop(dt);
    let reference = s.loss(&s.params, &SolverConfig::fixed(Method::Rk4, dt));
    assert_eq!(loss.to_bits(), reference.to_bits());
}

#[test]
fn backprop_agreement_tightens_with_step() {
    let s = setup(10, vec![0.0, 0.1, 0.2], 11);
    let (_, adj) = s.adjoint(&SolverConfig::dopri5(1e-11, 1e-11));
    let errs: Vec<f64> = [1e-1, 2e-2, 4e-3].iter().map(|&dt| rel_diff(&s.backprop(dt).1, &adj)).collect();
    assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
}

#[test]
fn self_generated_observations_give_zero_loss() {
    let mut s = setup(10, vec![0.0, 0.1, 0.2], 5);
    let dt = 0.01;
    let mut dynamics = SurrogateDynamics::new(&s.model, &s.graph, &s.params).unwrap();
    let traj = integrate(|_, u: &[f64], du: &mut [f64]| dynamics.eval(u, du), &s.u0, &s.t_obs, &SolverConfig::fixed(Method::Rk4, dt)).unwrap();
    s.y_obs = traj.states;
    let (loss, grad) = s.backprop(dt);
    assert_eq!(loss, 0.0);
    assert!(grad.iter().all(|&g| g == 0.0));
    let (loss, grad) = s.adjoint(&SolverConfig::dopri5(1e-10, 1e-10));
    assert!(loss < 1e-16, "{loss:e}");
    assert!(grad.iter().all(|g| g.is_finite()));
}

#[test]
fn gradient_is_linear_in_residuals() {
    let s = setup(10, vec![0.0, 0.1, 0.3], 13);
    let solver = SolverConfig::fixed(Method::Rk4, 0.01);
    let mut dynamics = SurrogateDynamics::new(&s.model, &s.graph, &s.params).unwrap();
    let traj = integrate(|_, u: &[f64], du: &mut [f64]| dynamics.eval(u, du), &s.u0, &s.t_obs, &solver).unwrap();
    let (_, base, _) = adjoint_gradient(&mut dynamics, &s.u0, &s.t_obs, &s.y_obs, &solver).unwrap();
    let c = 3.0;
    let scaled: Vec<Vec<f64>> = traj
        .states
        .iter()
        .zip(&s.y_obs)
        .map(|(u, y)| u.iter().zip(y).map(|(a, b)| a - c * (a - b)).collect())
        .collect();
    let (_, grad, _) = adjoint_gradient(&mut dynamics, &s.u0, &s.t_obs, &scaled, &solver).unwrap();
    let expected: Vec<f64> = base.iter().map(|g| c * g).collect();
    assert!(rel_diff(&grad, &expected) < 1e-10);
}

#[test]
fn adjoint_is_deterministic() {
    let s = setup(10, vec![0.0, 0.1, 0.2], 17);
    let a = s.adjoint(&SolverConfig::default());
    let b = s.adjoint(&SolverConfig::default());
    assert_eq!(a.0.to_bits(), b.0.to_bits());
    assert!(a.1.iter().zip(&b.1).all(|(x, y)| x.to_bits() == y.to_bits()));
}

#[test]
fn memory_is_bounded_by_checkpoints() {
    let s = setup(10, vec![0.0, 1.0, 2.0, 4.0], 19);
    let mut dynamics = SurrogateDynamics::new(&s.model, &s.graph, &s.params).unwrap();
    let mut runs = Vec::new();
    for tol in [1e-5, 1e-9] {
        let (_, _, stats) =
            adjoint_gradient(&mut dynamics, &s.u0, &s.t_obs, &s.y_obs, &SolverConfig::dopri5(tol, tol)).unwrap();
        runs.push(stats);
    }
    assert!(runs[1].forward.accepted > runs[0].forward.accepted);
    assert!(runs[1].backward.accepted > runs[0].backward.accepted);
    for stats in runs {
        assert_eq!(stats.checkpoints, s.t_obs.len());
    }
}

#[test]
fn linear_system_gradient_matches_closed_form() {
    // du/dt = a u, u(0) = 1, one observation y at t = 1:
    // L = (e^a − y)² / 2, dL/da = (e^a − y) e^a.
    let (a, y) = (-0.7, 0.2);
    let mut dynamics = LinearDynamics::new(1, vec![a]);
    let (loss, grad, _) =
        adjoint_gradient(&mut dynamics, &[1.0], &[0.0, 1.0], &[vec![1.0], vec![y]], &SolverConfig::dopri5(1e-11, 1e-11))
            .unwrap();
    let e = f64::exp(a);
    assert!((loss - (e - y) * (e - y) / 2.0).abs() < 1e-10);
    assert!((grad[0] - (e - y) * e).abs() < 1e-9, "{}", grad[0]);
}

#[test]
fn rejects_malformed_observations() {
    let s = setup(10, vec![0.0, 0.1, 0.2], 23);
    let mut dynamics = SurrogateDynamics::new(&s.model, &s.graph, &s.params).unwrap();
    let solver = SolverConfig::default();
    assert!(adjoint_gradient(&mut dynamics, &s.u0, &[0.0], &s.y_obs[..1], &solver).is_err());
    assert!(adjoint_gradient(&mut dynamics, &s.u0, &s.t_obs, &s.y_obs[..2], &solver).is_err());
    assert!(backprop_gradient(&mut dynamics, &s.u0, &s.t_obs, &s.y_obs, 0.0).is_err());
    assert!(SurrogateDynamics::new(&s.model, &s.graph, &s.params[1..]).is_err());
}
