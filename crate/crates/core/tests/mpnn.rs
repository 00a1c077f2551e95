mod common;

use common::{random_graph, random_vec, rel_diff, rng};
use graphpde_core::geometry::{build_graph, delaunay, Graph, PointSet};
use graphpde_core::mpnn::{eval_fhat, fhat_vjp, Surrogate, SurrogateConfig};
use graphpde_core::nn::mlp_forward;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

/// Per-node evaluation straight from the definition, with a plain
/// left-to-right neighbor sum.
fn oracle(graph: &Graph, u: &[f64], cfg: &SurrogateConfig, params: &[f64]) -> Vec<f64> {
    let model = Surrogate::new(*cfg).unwrap();
    let (p_phi, p_gamma) = params.split_at(model.phi_spec().param_count());
    let d = cfg.state_dim;
    let mut out = Vec::new();
    for i in 0..graph.n_nodes() {
        let ui = &u[i * d..(i + 1) * d];
        let mut m = vec![0.0; cfg.message_dim];
        let nbrs = graph.neighbors(i);
        for &j in nbrs {
            let uj = &u[j * d..(j + 1) * d];
            let mut input: Vec<f64> = ui.to_vec();
            input.extend(uj.iter().zip(ui).map(|(a, b)| a - b));
            if cfg.use_edge_features {
                let (xi, xj) = (graph.coords()[i], graph.coords()[j]);
                input.extend([xj[0] - xi[0], xj[1] - xi[1]]);
            }
            for (acc, v) in m.iter_mut().zip(mlp_forward(model.phi_spec(), p_phi, &input).unwrap()) {
                *acc += v;
            }
        }
        if !nbrs.is_empty() {
            for v in &mut m {
                *v /= nbrs.len() as f64;
            }
        }
        let mut input = ui.to_vec();
        input.extend(m);
        out.extend(mlp_forward(model.gamma_spec(), p_gamma, &input).unwrap());
    }
    out
}

fn bits(v: &[f64]) -> Vec<u64> {
    v.iter().map(|x| x.to_bits()).collect()
}

#[test]
fn parameter_counts() {
    assert_eq!(SurrogateConfig::new(1).param_count().unwrap(), 19_961);
    let model = Surrogate::new(SurrogateConfig::new(1)).unwrap();
    assert_eq!(model.phi_spec().param_count(), 10_060);
    assert_eq!(model.gamma_spec().param_count(), 9_901);
    // Without edge features φ loses two inputs.
    assert_eq!(SurrogateConfig::new(1).with_edge_features(false).param_count().unwrap(), 19_961 - 2 * 60);
    let burgers = Surrogate::new(SurrogateConfig::new(2)).unwrap();
    assert_eq!(burgers.gamma_spec().input_dim(), 42);
    assert_eq!(burgers.phi_spec().input_dim(), 6);
    let mut deep = SurrogateConfig::new(1);
    deep.graph_layers = 2;
    assert!(Surrogate::new(deep).is_err());
}

#[test]
fn matches_oracle() {
    for (d, edges, seed) in [(1, true, 1), (1, false, 2), (2, true, 3)] {
        let cfg = SurrogateConfig::new(d).with_edge_features(edges);
        let model = Surrogate::new(cfg).unwrap();
        let graph = random_graph(30, seed);
        let params = model.init_params(seed);
        let u = random_vec(30 * d, 1.5, seed + 7);
        let got = eval_fhat(&graph, &u, &cfg, &params).unwrap();
        let want = oracle(&graph, &u, &cfg, &params);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() <= 1e-12, "{g} vs {w}");
        }
    }
}

#[test]
fn zero_parameters_give_zero_derivative() {
    let cfg = SurrogateConfig::new(1);
    let graph = random_graph(12, 4);
    let out = eval_fhat(&graph, &random_vec(12, 1.0, 1), &cfg, &vec![0.0; 19_961]).unwrap();
    assert!(out.iter().all(|&v| v == 0.0));
}

#[test]
fn isolated_node_gets_zero_message() {
    let cfg = SurrogateConfig::new(1);
    let model = Surrogate::new(cfg).unwrap();
    let params = model.init_params(9);
    let graph = Graph::from_edges(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [5.0, 5.0]], &[(0, 1), (1, 2), (0, 2)]).unwrap();
    let u = [0.1, 0.2, 0.3, 0.4];
    let out = eval_fhat(&graph, &u, &cfg, &params).unwrap();
    let mut input = vec![0.4];
    input.extend([0.0; 40]);
    let p_gamma = &params[model.phi_spec().param_count()..];
    assert_eq!(out[3], mlp_forward(model.gamma_spec(), p_gamma, &input).unwrap()[0]);
}

#[test]
fn zero_cotangent_gives_zero_gradients() {
    let cfg = SurrogateConfig::new(1);
    let graph = random_graph(15, 5);
    let params = Surrogate::new(cfg).unwrap().init_params(5);
    let (u_bar, theta_bar) = fhat_vjp(&graph, &random_vec(15, 1.0, 6), &cfg, &params, &[0.0; 15]).unwrap();
    assert!(u_bar.iter().chain(theta_bar.iter()).all(|&v| v == 0.0));
}

#[test]
fn vjp_matches_finite_differences() {
    for (d, edges, seed) in [(1, true, 11), (2, false, 12)] {
        let n = 12;
        let cfg = SurrogateConfig::new(d).with_edge_features(edges).with_widths(16, 8);
        let graph = random_graph(n, seed);
        let params = Surrogate::new(cfg).unwrap().init_params(seed).into_inner();
        let u = random_vec(n * d, 1.0, seed + 1);
        let v = random_vec(n * d, 1.0, seed + 2);
        let (u_bar, theta_bar) = fhat_vjp(&graph, &u, &cfg, &params, &v).unwrap();
        let f = |u: &[f64], p: &[f64]| -> f64 {
            eval_fhat(&graph, u, &cfg, p).unwrap().iter().zip(&v).map(|(a, b)| a * b).sum()
        };
        let h = 1e-6;
        let fd_u: Vec<f64> = (0..u.len())
            .map(|k| {
                let mut w = u.clone();
                w[k] += h;
                let up = f(&w, &params);
                w[k] -= 2.0 * h;
                (up - f(&w, &params)) / (2.0 * h)
            })
            .collect();
        assert!(rel_diff(&u_bar, &fd_u) <= 1e-6, "u: {:e}", rel_diff(&u_bar, &fd_u));
        let coords = rand::seq::index::sample(&mut rng(seed), params.len(), 60).into_vec();
        let mut fd_t = Vec::new();
        let mut sel = Vec::new();
        for k in coords {
            let mut p = params.clone();
            p[k] += h;
            let up = f(&u, &p);
            p[k] -= 2.0 * h;
            fd_t.push((up - f(&u, &p)) / (2.0 * h));
            sel.push(theta_bar[k]);
        }
        assert!(rel_diff(&sel, &fd_t) <= 1e-6, "theta: {:e}", rel_diff(&sel, &fd_t));
    }
}

/// Points on a 2⁻¹⁰ lattice so that translations by dyadic offsets are exact.
fn dyadic_points(n: usize, seed: u64) -> Vec<[f64; 2]> {
    let mut r = rng(seed);
    let mut seen = std::collections::HashSet::new();
    let mut pts = Vec::new();
    while pts.len() < n {
        let (a, b) = (r.random_range(0..1024u32), r.random_range(0..1024u32));
        if seen.insert((a, b)) {
            pts.push([a as f64 / 1024.0, b as f64 / 1024.0]);
        }
    }
    pts
}

fn graph_of(coords: Vec<[f64; 2]>) -> Graph {
    let points = PointSet::from_coords(coords).unwrap();
    build_graph(&delaunay(&points).unwrap(), &points).unwrap()
}

fn check_translation(seed: u64, shift: [f64; 2]) -> bool {
    let cfg = SurrogateConfig::new(1);
    let params = Surrogate::new(cfg).unwrap().init_params(seed);
    let pts = dyadic_points(60, seed);
    let moved: Vec<[f64; 2]> = pts.iter().map(|p| [p[0] + shift[0], p[1] + shift[1]]).collect();
    let u = random_vec(60, 1.0, seed);
    let a = eval_fhat(&graph_of(pts), &u, &cfg, &params).unwrap();
    let b = eval_fhat(&graph_of(moved), &u, &cfg, &params).unwrap();
    bits(&a) == bits(&b)
}

fn check_relabeling(seed: u64) -> bool {
    let cfg = SurrogateConfig::new(1);
    let params = Surrogate::new(cfg).unwrap().init_params(seed);
    let n = 50;
    let pts = common::random_points(n, seed).into_coords();
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng(seed + 1));
    let mut moved = vec![[0.0; 2]; n];
    let u = random_vec(n, 1.0, seed + 2);
    let mut u_moved = vec![0.0; n];
    for i in 0..n {
        moved[perm[i]] = pts[i];
        u_moved[perm[i]] = u[i];
    }
    let a = eval_fhat(&graph_of(pts), &u, &cfg, &params).unwrap();
    let b = eval_fhat(&graph_of(moved), &u_moved, &cfg, &params).unwrap();
    (0..n).all(|i| a[i].to_bits() == b[perm[i]].to_bits())
}

fn check_locality(seed: u64) -> bool {
    let cfg = SurrogateConfig::new(1);
    let params = Surrogate::new(cfg).unwrap().init_params(seed);
    let graph = random_graph(60, seed);
    let u = random_vec(60, 1.0, seed + 3);
    let k = (seed as usize * 7) % 60;
    let mut w = u.clone();
    w[k] += 0.75;
    let a = eval_fhat(&graph, &u, &cfg, &params).unwrap();
    let b = eval_fhat(&graph, &w, &cfg, &params).unwrap();
    let near: Vec<usize> = std::iter::once(k).chain(graph.neighbors(k).iter().copied()).collect();
    (0..60).all(|i| near.contains(&i) == (a[i].to_bits() != b[i].to_bits()))
}

#[test]
fn translation_invariance_is_bit_exact() {
    for seed in 0..5 {
        assert!(check_translation(seed, [0.375, -2.5]));
        assert!(check_translation(seed, [-64.0, 1024.125]));
    }
}

#[test]
fn relabeling_is_bit_exact() {
    for seed in 0..5 {
        assert!(check_relabeling(seed));
    }
}

#[test]
fn perturbation_stays_local() {
    for seed in 0..5 {
        assert!(check_locality(seed));
    }
}

#[test]
fn rejects_bad_shapes() {
    let cfg = SurrogateConfig::new(1);
    let graph = random_graph(10, 1);
    let params = Surrogate::new(cfg).unwrap().init_params(1);
    assert!(eval_fhat(&graph, &[0.0; 9], &cfg, &params).is_err());
    assert!(eval_fhat(&graph, &[0.0; 10], &cfg, &params[1..]).is_err());
    assert!(fhat_vjp(&graph, &[0.0; 10], &cfg, &params, &[0.0; 11]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn neighbor_storage_order_is_irrelevant(seed in 0u64..10_000) {
        // Same graph built from a shuffled edge list.
        let graph = random_graph(25, seed);
        let mut edges: Vec<(usize, usize)> = graph.undirected_edges().map(|(a, b)| if seed % 2 == 0 { (a, b) } else { (b, a) }).collect();
        edges.shuffle(&mut rng(seed));
        let rebuilt = Graph::from_edges(graph.coords().to_vec(), &edges).unwrap();
        let cfg = SurrogateConfig::new(1);
        let params = Surrogate::new(cfg).unwrap().init_params(seed);
        let u = random_vec(25, 1.0, seed);
        prop_assert_eq!(
            bits(&eval_fhat(&graph, &u, &cfg, &params).unwrap()),
            bits(&eval_fhat(&rebuilt, &u, &cfg, &params).unwrap())
        );
    }
}
