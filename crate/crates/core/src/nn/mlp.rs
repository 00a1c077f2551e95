use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::activation::tanh_in_place;
use super::gemm::{gemm, Operand};
use super::ParamVector;
use crate::{Error, Result};

/// Layer sizes of a fully connected network: input, hidden..., output.
///
/// Hidden layers use `tanh`; the output layer is affine. Parameters are laid
/// out layer by layer, each layer as a row-major `in × out` weight block
/// followed by `out` biases.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MlpSpec {
    sizes: Vec<usize>,
}

impl MlpSpec {
    pub fn new(sizes: impl Into<Vec<usize>>) -> Result<Self> {
        let sizes = sizes.into();
        if sizes.len() < 2 {
            return Err(Error::ShapeMismatch(format!(
                "an MLP needs at least 2 layers, got {}",
                sizes.len()
            )));
        }
        if sizes.contains(&0) {
            return Err(Error::ShapeMismatch(format!("zero-width layer in {sizes:?}")));
        }
        Ok(Self { sizes })
    }

    /// `input → hidden × n_hidden → output`.
    pub fn uniform(input: usize, hidden: usize, n_hidden: usize, output: usize) -> Result<Self> {
        let mut sizes = Vec::with_capacity(n_hidden + 2);
        sizes.push(input);
        sizes.extend(core::iter::repeat_n(hidden, n_hidden));
        sizes.push(output);
        Self::new(sizes)
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        self.sizes[self.sizes.len() - 1]
    }

    /// Number of affine layers.
    pub fn depth(&self) -> usize {
        self.sizes.len() - 1
    }

    pub fn param_count(&self) -> usize {
        self.sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    /// Glorot-uniform weights, zero biases.
    pub fn init_params<R: Rng + ?Sized>(&self, rng: &mut R) -> ParamVector {
        let mut out = Vec::with_capacity(self.param_count());
        for w in self.sizes.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let limit = libm::sqrt(6.0 / (fan_in + fan_out) as f64);
            out.extend((0..fan_in * fan_out).map(|_| rng.random_range(-limit..=limit)));
            out.extend(core::iter::repeat_n(0.0, fan_out));
        }
        out.into()
    }
}

/// Total parameter count of several networks.
pub fn param_count(specs: &[MlpSpec]) -> usize {
    specs.iter().map(MlpSpec::param_count).sum()
}

/// Activations retained from the last batched forward pass.
#[derive(Debug, Default, Clone)]
pub struct MlpWorkspace {
    rows: usize,
    acts: Vec<Vec<f64>>,
    delta: Vec<f64>,
    delta_prev: Vec<f64>,
}

impl MlpWorkspace {
    pub fn new() -> Self {
        Self::default()
    }

    /// Output of the last forward pass, `rows × output_dim`.
    pub fn output(&self) -> &[f64] {
        self.acts.last().map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
}

/// A network spec bound to a parameter slice.
#[derive(Debug, Clone, Copy)]
pub struct Mlp<'a> {
    spec: &'a MlpSpec,
    params: &'a [f64],
}

impl<'a> Mlp<'a> {
    pub fn new(spec: &'a MlpSpec, params: &'a [f64]) -> Result<Self> {
        if params.len() != spec.param_count() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} parameters, got {}",
                spec.param_count(),
                params.len()
            )));
        }
        Ok(Self { spec, params })
    }

    pub fn spec(&self) -> &'a MlpSpec {
        self.spec
    }

    fn layers(&self) -> impl Iterator<Item = (usize, usize, &'a [f64], &'a [f64])> + 'a {
        let params = self.params;
        let mut offset = 0;
        self.spec.sizes.windows(2).map(move |w| {
            let (n_in, n_out) = (w[0], w[1]);
            let weights = &params[offset..offset + n_in * n_out];
            let bias = &params[offset + n_in * n_out..offset + n_in * n_out + n_out];
            offset += n_in * n_out + n_out;
            (n_in, n_out, weights, bias)
        })
    }

    /// Evaluates `rows` inputs stored row-major in `input`. The output is
    /// left in the workspace and returned.
    pub fn forward_batch<'w>(&self, rows: usize, input: &[f64], ws: &'w mut MlpWorkspace) -> &'w [f64] {
        let sizes = &self.spec.sizes;
        assert_eq!(input.len(), rows * sizes[0], "batch input has wrong length");
        ws.rows = rows;
        ws.acts.resize_with(sizes.len(), Vec::new);
        ws.acts[0].clear();
        ws.acts[0].extend_from_slice(input);
        let depth = self.spec.depth();
        for (l, (n_in, n_out, weights, bias)) in self.layers().enumerate() {
            let (prev, rest) = ws.acts.split_at_mut(l + 1);
            let a_prev = &prev[l];
            let out = &mut rest[0];
            out.clear();
            out.reserve(rows * n_out);
            for _ in 0..rows {
                out.extend_from_slice(bias);
            }
            gemm(
                rows,
                n_in,
                n_out,
                1.0,
                Operand::row_major(a_prev, n_in),
                Operand::row_major(weights, n_out),
                1.0,
                out,
            );
            if l + 1 < depth {
                tanh_in_place(out);
            }
        }
        ws.output()
    }

    /// Reverse pass for the batch last evaluated with [`Mlp::forward_batch`].
    ///
    /// Accumulates `d_outᵀ ∂out/∂θ` into `grad` (which must have the full
    /// parameter length) and, if requested, overwrites `d_in` with
    /// `d_outᵀ ∂out/∂in`.
    pub fn backward_batch(
        &self,
        ws: &mut MlpWorkspace,
        d_out: &[f64],
        grad: &mut [f64],
        d_in: Option<&mut [f64]>,
    ) {
        let sizes = &self.spec.sizes;
        let rows = ws.rows;
        let depth = self.spec.depth();
        assert_eq!(grad.len(), self.params.len(), "gradient buffer has wrong length");
        assert_eq!(d_out.len(), rows * sizes[depth], "cotangent has wrong length");
        let mut delta = core::mem::take(&mut ws.delta);
        let mut delta_prev = core::mem::take(&mut ws.delta_prev);
        delta.clear();
        delta.extend_from_slice(d_out);

        let layers: Vec<_> = self.layers().collect();
        let mut offset = self.params.len();
        let mut d_in = d_in;
        for l in (0..depth).rev() {
            let (n_in, n_out, weights, _) = layers[l];
            offset -= n_in * n_out + n_out;
            let a_prev = &ws.acts[l];
            let (g_w, g_b) = grad[offset..offset + n_in * n_out + n_out].split_at_mut(n_in * n_out);
            gemm(
                n_in,
                rows,
                n_out,
                1.0,
                Operand::transposed(a_prev, n_in),
                Operand::row_major(&delta, n_out),
                1.0,
                g_w,
            );
            for row in delta.chunks_exact(n_out) {
                for (g, d) in g_b.iter_mut().zip(row) {
                    *g += d;
                }
            }
            if l == 0 && d_in.is_none() {
                break;
            }
            delta_prev.clear();
            delta_prev.resize(rows * n_in, 0.0);
            gemm(
                rows,
                n_out,
                n_in,
                1.0,
                Operand::row_major(&delta, n_out),
                Operand::transposed(weights, n_out),
                0.0,
                &mut delta_prev,
            );
            if l > 0 {
                for (d, a) in delta_prev.iter_mut().zip(a_prev) {
                    *d *= 1.0 - a * a;
                }
            } else if let Some(d_in) = d_in.take() {
                d_in.copy_from_slice(&delta_prev);
            }
            core::mem::swap(&mut delta, &mut delta_prev);
        }
        ws.delta = delta;
        ws.delta_prev = delta_prev;
    }
}

fn check_len(what: &str, expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::ShapeMismatch(format!("{what}: expected length {expected}, got {got}")));
    }
    Ok(())
}

/// Evaluates the network on a single input vector.
pub fn mlp_forward(spec: &MlpSpec, params: &[f64], input: &[f64]) -> Result<Vec<f64>> {
    let mlp = Mlp::new(spec, params)?;
    check_len("input", spec.input_dim(), input.len())?;
    let mut ws = MlpWorkspace::new();
    Ok(mlp.forward_batch(1, input, &mut ws).to_vec())
}

/// Returns `(vᵀ ∂out/∂θ, vᵀ ∂out/∂in)` for a single input and cotangent `v`.
pub fn mlp_vjp(
    spec: &MlpSpec,
    params: &[f64],
    input: &[f64],
    cotangent: &[f64],
) -> Result<(ParamVector, Vec<f64>)> {
    let mlp = Mlp::new(spec, params)?;
    check_len("input", spec.input_dim(), input.len())?;
    check_len("cotangent", spec.output_dim(), cotangent.len())?;
    let mut ws = MlpWorkspace::new();
    mlp.forward_batch(1, input, &mut ws);
    let mut grad = ParamVector::zeros(params.len());
    let mut d_in = vec![0.0; spec.input_dim()];
    mlp.backward_batch(&mut ws, cotangent, &mut grad, Some(&mut d_in));
    Ok((grad, d_in))
}
