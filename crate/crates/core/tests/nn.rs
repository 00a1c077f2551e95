mod common;

use common::{random_vec, rel_diff, rng};
use graphpde_core::nn::{mlp_forward, mlp_vjp, param_count, MlpSpec};
use proptest::prelude::*;

/// Layer-by-layer evaluation with explicit loops and libm tanh.
fn oracle_forward(sizes: &[usize], params: &[f64], input: &[f64]) -> Vec<f64> {
    let mut a = input.to_vec();
    let mut off = 0;
    for l in 0..sizes.len() - 1 {
        let (n_in, n_out) = (sizes[l], sizes[l + 1]);
        let w = &params[off..off + n_in * n_out];
        let b = &params[off + n_in * n_out..off + n_in * n_out + n_out];
        off += n_in * n_out + n_out;
        let mut z = b.to_vec();
        for i in 0..n_in {
            for o in 0..n_out {
                z[o] += a[i] * w[i * n_out + o];
            }
        }
        if l + 2 < sizes.len() {
            for v in &mut z {
                *v = libm::tanh(*v);
            }
        }
        a = z;
    }
    assert_eq!(off, params.len());
    a
}

#[test]
fn default_network_sizes() {
    let phi = MlpSpec::uniform(4, 60, 3, 40).unwrap();
    let gamma = MlpSpec::uniform(41, 60, 3, 1).unwrap();
    assert_eq!(phi.layer_sizes(), &[4, 60, 60, 60, 40]);
    assert_eq!(phi.param_count(), 10_060);
    assert_eq!(gamma.param_count(), 9_901);
    assert_eq!(param_count(&[phi, gamma]), 19_961);
    assert!(MlpSpec::new(vec![3]).is_err());
    assert!(MlpSpec::new(vec![3, 0, 1]).is_err());
}

#[test]
fn zero_parameters_give_zero_output() {
    let spec = MlpSpec::uniform(4, 60, 3, 40).unwrap();
    let out = mlp_forward(&spec, &vec![0.0; spec.param_count()], &[0.3, -1.0, 2.0, 0.5]).unwrap();
    assert!(out.iter().all(|&v| v == 0.0));
}

#[test]
fn single_linear_layer() {
    let spec = MlpSpec::new(vec![1, 1]).unwrap();
    assert_eq!(mlp_forward(&spec, &[2.0, 0.5], &[3.0]).unwrap(), vec![6.5]);
    let (g, d_in) = mlp_vjp(&spec, &[2.0, 0.5], &[3.0], &[1.0]).unwrap();
    assert_eq!(&g[..], &[3.0, 1.0]);
    assert_eq!(d_in, vec![2.0]);
}

#[test]
fn default_network_matches_oracle() {
    let spec = MlpSpec::uniform(4, 60, 3, 40).unwrap();
    let params = spec.init_params(&mut rng(1));
    for seed in 0..5 {
        let x = random_vec(4, 2.0, seed);
        let got = mlp_forward(&spec, &params, &x).unwrap();
        let want = oracle_forward(spec.layer_sizes(), &params, &x);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() <= 1e-12, "{g} vs {w}");
        }
    }
}

#[test]
fn vjp_matches_finite_differences() {
    let spec = MlpSpec::uniform(5, 12, 2, 3).unwrap();
    let params = spec.init_params(&mut rng(2));
    let x = random_vec(5, 1.0, 3);
    let v = random_vec(3, 1.0, 4);
    let (g, d_in) = mlp_vjp(&spec, &params, &x, &v).unwrap();
    let f = |p: &[f64], x: &[f64]| -> f64 {
        oracle_forward(spec.layer_sizes(), p, x).iter().zip(&v).map(|(a, b)| a * b).sum()
    };
    let h = 1e-6;
    let fd_params: Vec<f64> = (0..params.len())
        .map(|k| {
            let mut p = params.to_vec();
            p[k] += h;
            let up = f(&p, &x);
            p[k] -= 2.0 * h;
            (up - f(&p, &x)) / (2.0 * h)
        })
        .collect();
    let fd_input: Vec<f64> = (0..x.len())
        .map(|k| {
            let mut y = x.clone();
            y[k] += h;
            let up = f(&params, &y);
            y[k] -= 2.0 * h;
            (up - f(&params, &y)) / (2.0 * h)
        })
        .collect();
    assert!(rel_diff(&g, &fd_params) <= 1e-6);
    assert!(rel_diff(&d_in, &fd_input) <= 1e-6);
}

#[test]
fn shape_errors() {
    let spec = MlpSpec::uniform(2, 4, 1, 1).unwrap();
    assert!(mlp_forward(&spec, &[0.0; 3], &[0.0, 0.0]).is_err());
    let p = vec![0.0; spec.param_count()];
    assert!(mlp_forward(&spec, &p, &[0.0]).is_err());
    assert!(mlp_vjp(&spec, &p, &[0.0, 0.0], &[1.0, 2.0]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn vjp_is_linear_in_cotangent(seed in 0u64..1000, c in -4.0f64..4.0) {
        let spec = MlpSpec::uniform(3, 8, 2, 2).unwrap();
        let params = spec.init_params(&mut rng(seed));
        let x = random_vec(3, 1.0, seed + 1);
        let v = random_vec(2, 1.0, seed + 2);
        let scaled: Vec<f64> = v.iter().map(|a| c * a).collect();
        let (g1, d1) = mlp_vjp(&spec, &params, &x, &v).unwrap();
        let (g2, d2) = mlp_vjp(&spec, &params, &x, &scaled).unwrap();
        for (a, b) in g1.iter().chain(&d1).zip(g2.iter().chain(&d2)) {
            prop_assert!((c * a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn output_is_bounded_by_last_layer(seed in 0u64..1000, scale in 0.1f64..100.0) {
        // Hidden activations lie in [-1, 1], so |out| ≤ Σ|W_last| + |b_last|.
        let spec = MlpSpec::uniform(3, 8, 2, 1).unwrap();
        let params = spec.init_params(&mut rng(seed));
        let x = random_vec(3, scale, seed + 1);
        let out = mlp_forward(&spec, &params, &x).unwrap()[0];
        let bound: f64 = params[params.len() - 9..].iter().map(|w| w.abs()).sum();
        prop_assert!(out.abs() <= bound + 1e-12);
    }
}
