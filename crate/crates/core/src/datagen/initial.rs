use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{EquationKind, EquationSpec};
use crate::{Error, Result};

/// Random field `Σ_{k,l=-N..N} λ_kl cos(kx + ly) + γ_kl sin(kx + ly)` with
/// standard normal coefficients, min-max normalized to [0, 1] on the fine
/// grid. Burgers components are mapped further to [−3, 3].
///
/// Returns the fine-grid field, node-major with `d` components per node.
/// Coefficients are drawn per component in the order `k`, `l`, `λ`, `γ`.
pub fn sample_initial_condition(spec: &EquationSpec, seed: u64) -> Result<Vec<f64>> {
    spec.validate()?;
    let grid = spec.grid();
    let d = spec.state_dim();
    let n = grid.n;
    let modes = spec.fourier_n as i64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // cos/sin of k·x for every grid line and every |k| ≤ N.
    let axis = |origin: f64| -> (Vec<f64>, Vec<f64>) {
        let width = 2 * spec.fourier_n + 1;
        let mut c = vec![0.0; n * width];
        let mut s = vec![0.0; n * width];
        for i in 0..n {
            let x = origin + i as f64 * grid.h;
            for (m, k) in (-modes..=modes).enumerate() {
                c[i * width + m] = libm::cos(k as f64 * x);
                s[i * width + m] = libm::sin(k as f64 * x);
            }
        }
        (c, s)
    };
    let (cx, sx) = axis(grid.lo[0]);
    let (cy, sy) = axis(grid.lo[1]);
    let width = 2 * spec.fourier_n + 1;

    let mut out = vec![0.0; grid.len() * d];
    for comp in 0..d {
        let mut coef = Vec::with_capacity(width * width);
        for _ in 0..width * width {
            let lambda: f64 = StandardNormal.sample(&mut rng);
            let gamma: f64 = StandardNormal.sample(&mut rng);
            coef.push((lambda, gamma));
        }
        let mut field = vec![0.0; grid.len()];
        for j in 0..n {
            for i in 0..n {
                let mut acc = 0.0;
                for mk in 0..width {
                    let (ckx, skx) = (cx[i * width + mk], sx[i * width + mk]);
                    for ml in 0..width {
                        let (cly, sly) = (cy[j * width + ml], sy[j * width + ml]);
                        let (lambda, gamma) = coef[mk * width + ml];
                        // cos(a+b) and sin(a+b) from the separable factors.
                        acc += lambda * (ckx * cly - skx * sly) + gamma * (skx * cly + ckx * sly);
                    }
                }
                field[j * n + i] = acc;
            }
        }
        let lo = field.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = field.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(hi > lo) || !hi.is_finite() || !lo.is_finite() {
            return Err(Error::DegenerateField);
        }
        let span = hi - lo;
        for (k, v) in field.iter().enumerate() {
            let unit = (v - lo) / span;
            out[k * d + comp] = if spec.kind == EquationKind::Burgers { 6.0 * (unit - 0.5) } else { unit };
        }
    }
    Ok(out)
}
