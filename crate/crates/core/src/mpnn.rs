//! The learned differential: one round of message passing over the
//! neighbor graph mapping node states to their time derivatives.
//!
//! For node `i` with neighbors `𝒩(i)`:
//!
//! ```text
//! m_i    = mean_{j ∈ 𝒩(i)} φ(u_i, u_j − u_i, x_j − x_i)
//! du_i/dt = γ(u_i, m_i)
//! ```
//!
//! The displacement input is dropped when edge features are disabled. The
//! mean over an empty neighborhood is the zero vector. Messages are summed
//! in the graph's displacement order, so the result does not depend on node
//! labels, bit for bit.
//!
//! State vectors are flat `N × d` row-major slices. Parameters are the φ
//! parameters followed by the γ parameters.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::geometry::Graph;
use crate::nn::{Mlp, MlpSpec, MlpWorkspace, ParamVector};
use crate::{Error, Result};

/// Architecture of the surrogate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SurrogateConfig {
    pub state_dim: usize,
    pub message_dim: usize,
    pub hidden_width: usize,
    pub hidden_layers: usize,
    /// Number of message-passing rounds. Only 1 is supported.
    pub graph_layers: usize,
    pub use_edge_features: bool,
}

impl SurrogateConfig {
    /// Default architecture for a `state_dim`-component field: message
    /// width 40, three hidden layers of 60 units, one graph layer.
    pub fn new(state_dim: usize) -> Self {
        Self {
            state_dim,
            message_dim: 40,
            hidden_width: 60,
            hidden_layers: 3,
            graph_layers: 1,
            use_edge_features: true,
        }
    }

    pub fn with_edge_features(mut self, on: bool) -> Self {
        self.use_edge_features = on;
        self
    }

    pub fn with_widths(mut self, hidden_width: usize, message_dim: usize) -> Self {
        self.hidden_width = hidden_width;
        self.message_dim = message_dim;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.state_dim == 0 || self.message_dim == 0 || self.hidden_width == 0 {
            return Err(Error::InvalidConfig(format!("zero-sized surrogate: {self:?}")));
        }
        if self.graph_layers != 1 {
            return Err(Error::InvalidConfig(format!(
                "only one message-passing layer is supported, got {}",
                self.graph_layers
            )));
        }
        Ok(())
    }

    /// Width of one message-function input row.
    pub fn edge_input_dim(&self) -> usize {
        2 * self.state_dim + if self.use_edge_features { 2 } else { 0 }
    }

    pub fn phi_spec(&self) -> Result<MlpSpec> {
        MlpSpec::uniform(self.edge_input_dim(), self.hidden_width, self.hidden_layers, self.message_dim)
    }

    pub fn gamma_spec(&self) -> Result<MlpSpec> {
        MlpSpec::uniform(self.state_dim + self.message_dim, self.hidden_width, self.hidden_layers, self.state_dim)
    }

    pub fn param_count(&self) -> Result<usize> {
        Ok(self.phi_spec()?.param_count() + self.gamma_spec()?.param_count())
    }
}

/// Reusable buffers for surrogate evaluations.
#[derive(Debug, Default, Clone)]
pub struct SurrogateWorkspace {
    edge_in: Vec<f64>,
    node_in: Vec<f64>,
    phi: MlpWorkspace,
    gamma: MlpWorkspace,
    d_node_in: Vec<f64>,
    d_msgs: Vec<f64>,
    d_edge_in: Vec<f64>,
}

impl SurrogateWorkspace {
    pub fn new() -> Self {
        Self::default()
    }
}

/// A validated surrogate architecture with its two network specs.
#[derive(Debug, Clone, PartialEq)]
pub struct Surrogate {
    config: SurrogateConfig,
    phi: MlpSpec,
    gamma: MlpSpec,
}

impl Surrogate {
    pub fn new(config: SurrogateConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self { config, phi: config.phi_spec()?, gamma: config.gamma_spec()? })
    }

    pub fn config(&self) -> &SurrogateConfig {
        &self.config
    }

    pub fn phi_spec(&self) -> &MlpSpec {
        &self.phi
    }

    pub fn gamma_spec(&self) -> &MlpSpec {
        &self.gamma
    }

    pub fn param_count(&self) -> usize {
        self.phi.param_count() + self.gamma.param_count()
    }

    /// Seeded initial parameters (φ first, then γ).
    pub fn init_params(&self, seed: u64) -> ParamVector {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = self.phi.init_params(&mut rng).into_inner();
        p.extend_from_slice(&self.gamma.init_params(&mut rng));
        p.into()
    }

    fn split<'p>(&'p self, params: &'p [f64]) -> Result<(Mlp<'p>, Mlp<'p>)> {
        if params.len() != self.param_count() {
            return Err(Error::ShapeMismatch(format!(
                "surrogate expects {} parameters, got {}",
                self.param_count(),
                params.len()
            )));
        }
        let (p_phi, p_gamma) = params.split_at(self.phi.param_count());
        Ok((Mlp::new(&self.phi, p_phi)?, Mlp::new(&self.gamma, p_gamma)?))
    }

    fn check_state(&self, graph: &Graph, u: &[f64]) -> Result<()> {
        if graph.n_nodes() == 0 {
            return Err(Error::EmptyGraph);
        }
        let expected = graph.n_nodes() * self.config.state_dim;
        if u.len() != expected {
            return Err(Error::ShapeMismatch(format!("state has length {}, expected {expected}", u.len())));
        }
        Ok(())
    }

    /// Runs the forward pass, leaving activations in `ws`. Returns nothing;
    /// the output is `ws.gamma.output()`.
    fn forward(&self, graph: &Graph, u: &[f64], phi: &Mlp<'_>, gamma: &Mlp<'_>, ws: &mut SurrogateWorkspace) {
        let d = self.config.state_dim;
        let mdim = self.config.message_dim;
        let n = graph.n_nodes();
        let edge_dim = self.config.edge_input_dim();
        let n_edges = graph.n_directed_edges();

        ws.edge_in.clear();
        ws.edge_in.reserve(n_edges * edge_dim);
        for i in 0..n {
            let ui = &u[i * d..(i + 1) * d];
            for (&j, feat) in graph.neighbors(i).iter().zip(graph.neighbor_features(i)) {
                let uj = &u[j * d..(j + 1) * d];
                ws.edge_in.extend_from_slice(ui);
                ws.edge_in.extend(uj.iter().zip(ui).map(|(a, b)| a - b));
                if self.config.use_edge_features {
                    ws.edge_in.extend_from_slice(feat);
                }
            }
        }
        let msgs = phi.forward_batch(n_edges, &ws.edge_in, &mut ws.phi);

        ws.node_in.clear();
        ws.node_in.resize(n * (d + mdim), 0.0);
        let offsets = graph.offsets();
        for i in 0..n {
            let row = &mut ws.node_in[i * (d + mdim)..(i + 1) * (d + mdim)];
            row[..d].copy_from_slice(&u[i * d..(i + 1) * d]);
            let (start, end) = (offsets[i], offsets[i + 1]);
            if start == end {
                continue;
            }
            let inv = 1.0 / (end - start) as f64;
            let m = &mut row[d..];
            m.copy_from_slice(&msgs[start * mdim..(start + 1) * mdim]);
            for e in start + 1..end {
                for (acc, v) in m.iter_mut().zip(&msgs[e * mdim..(e + 1) * mdim]) {
                    *acc += v;
                }
            }
            for v in m.iter_mut() {
                *v *= inv;
            }
        }
        gamma.forward_batch(n, &ws.node_in, &mut ws.gamma);
    }

    /// Evaluates `du/dt` into `out`.
    pub fn eval(
        &self,
        graph: &Graph,
        u: &[f64],
        params: &[f64],
        ws: &mut SurrogateWorkspace,
        out: &mut [f64],
    ) -> Result<()> {
        self.check_state(graph, u)?;
        if out.len() != u.len() {
            return Err(Error::ShapeMismatch("output buffer does not match state".into()));
        }
        let (phi, gamma) = self.split(params)?;
        self.forward(graph, u, &phi, &gamma, ws);
        out.copy_from_slice(ws.gamma.output());
        Ok(())
    }

    /// Evaluates `du/dt` and the vector-Jacobian products with `cotangent`:
    /// `u_bar = (∂F/∂u)ᵀ v` and `theta_bar = (∂F/∂θ)ᵀ v`. Both output buffers
    /// are overwritten.
    #[allow(clippy::too_many_arguments)]
    pub fn eval_vjp(
        &self,
        graph: &Graph,
        u: &[f64],
        params: &[f64],
        cotangent: &[f64],
        ws: &mut SurrogateWorkspace,
        out: Option<&mut [f64]>,
        u_bar: &mut [f64],
        theta_bar: &mut [f64],
    ) -> Result<()> {
        self.check_state(graph, u)?;
        if cotangent.len() != u.len() || u_bar.len() != u.len() {
            return Err(Error::ShapeMismatch("cotangent does not match state".into()));
        }
        if theta_bar.len() != params.len() {
            return Err(Error::ShapeMismatch("parameter cotangent has wrong length".into()));
        }
        let (phi, gamma) = self.split(params)?;
        self.forward(graph, u, &phi, &gamma, ws);
        if let Some(out) = out {
            if out.len() != u.len() {
                return Err(Error::ShapeMismatch("output buffer does not match state".into()));
            }
            out.copy_from_slice(ws.gamma.output());
        }

        let d = self.config.state_dim;
        let mdim = self.config.message_dim;
        let n = graph.n_nodes();
        let edge_dim = self.config.edge_input_dim();
        let n_edges = graph.n_directed_edges();
        let (theta_phi, theta_gamma) = theta_bar.split_at_mut(phi.spec().param_count());
        theta_phi.fill(0.0);
        theta_gamma.fill(0.0);
        u_bar.fill(0.0);

        ws.d_node_in.resize(n * (d + mdim), 0.0);
        gamma.backward_batch(&mut ws.gamma, cotangent, theta_gamma, Some(&mut ws.d_node_in));

        ws.d_msgs.clear();
        ws.d_msgs.resize(n_edges * mdim, 0.0);
        let offsets = graph.offsets();
        for i in 0..n {
            let row = &ws.d_node_in[i * (d + mdim)..(i + 1) * (d + mdim)];
            for (ub, r) in u_bar[i * d..(i + 1) * d].iter_mut().zip(&row[..d]) {
                *ub += r;
            }
            let (start, end) = (offsets[i], offsets[i + 1]);
            if start == end {
                continue;
            }
            let inv = 1.0 / (end - start) as f64;
            for e in start..end {
                for (dm, r) in ws.d_msgs[e * mdim..(e + 1) * mdim].iter_mut().zip(&row[d..]) {
                    *dm = r * inv;
                }
            }
        }

        ws.d_edge_in.resize(n_edges * edge_dim, 0.0);
        phi.backward_batch(&mut ws.phi, &ws.d_msgs, theta_phi, Some(&mut ws.d_edge_in));
        let targets = graph.targets();
        for i in 0..n {
            for e in offsets[i]..offsets[i + 1] {
                let j = targets[e];
                let row = &ws.d_edge_in[e * edge_dim..(e + 1) * edge_dim];
                for c in 0..d {
                    let (d_self, d_diff) = (row[c], row[d + c]);
                    u_bar[i * d + c] += d_self - d_diff;
                    u_bar[j * d + c] += d_diff;
                }
            }
        }
        Ok(())
    }
}

/// Evaluates the surrogate differential for state `u`.
pub fn eval_fhat(graph: &Graph, u: &[f64], cfg: &SurrogateConfig, params: &[f64]) -> Result<Vec<f64>> {
    let model = Surrogate::new(*cfg)?;
    let mut out = vec![0.0; u.len()];
    model.eval(graph, u, params, &mut SurrogateWorkspace::new(), &mut out)?;
    Ok(out)
}

/// `((∂F/∂u)ᵀ v, (∂F/∂θ)ᵀ v)` for cotangent `v`.
pub fn fhat_vjp(
    graph: &Graph,
    u: &[f64],
    cfg: &SurrogateConfig,
    params: &[f64],
    cotangent: &[f64],
) -> Result<(Vec<f64>, ParamVector)> {
    let model = Surrogate::new(*cfg)?;
    let mut u_bar = vec![0.0; u.len()];
    let mut theta_bar = ParamVector::zeros(params.len());
    model.eval_vjp(graph, u, params, cotangent, &mut SurrogateWorkspace::new(), None, &mut u_bar, &mut theta_bar)?;
    Ok((u_bar, theta_bar))
}
