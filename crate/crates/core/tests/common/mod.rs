#![allow(dead_code)]

use graphpde_core::geometry::{build_graph, delaunay, Graph, PointSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_points(n: usize, seed: u64) -> PointSet {
    let mut rng = rng(seed);
    let coords = (0..n).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect();
    PointSet::new(coords, [0.0, 0.0], [1.0, 1.0]).unwrap()
}

pub fn random_graph(n: usize, seed: u64) -> Graph {
    let points = random_points(n, seed);
    build_graph(&delaunay(&points).unwrap(), &points).unwrap()
}

pub fn random_vec(len: usize, scale: f64, seed: u64) -> Vec<f64> {
    let mut rng = rng(seed);
    (0..len).map(|_| scale * (2.0 * rng.random::<f64>() - 1.0)).collect()
}

/// `‖a − b‖ / ‖b‖`.
pub fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}
