use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::Graph;
use crate::mpnn::{Surrogate, SurrogateWorkspace};
use crate::{Error, Result};

/// Autonomous parametric dynamics `du/dt = F(u; θ)` with reverse-mode
/// derivatives, as needed by the gradient routines.
pub trait Dynamics {
    fn state_dim(&self) -> usize;
    fn param_dim(&self) -> usize;
    fn eval(&mut self, u: &[f64], out: &mut [f64]) -> Result<()>;
    /// Overwrites `u_bar` with `(∂F/∂u)ᵀ v` and `theta_bar` with
    /// `(∂F/∂θ)ᵀ v`; also writes `F(u)` when `out` is given.
    fn vjp(
        &mut self,
        u: &[f64],
        v: &[f64],
        out: Option<&mut [f64]>,
        u_bar: &mut [f64],
        theta_bar: &mut [f64],
    ) -> Result<()>;
}

/// The surrogate bound to one graph and one parameter vector.
pub struct SurrogateDynamics<'a> {
    model: &'a Surrogate,
    graph: &'a Graph,
    params: &'a [f64],
    ws: SurrogateWorkspace,
}

impl<'a> SurrogateDynamics<'a> {
    pub fn new(model: &'a Surrogate, graph: &'a Graph, params: &'a [f64]) -> Result<Self> {
        if params.len() != model.param_count() {
            return Err(Error::ShapeMismatch(alloc::format!(
                "{} parameters for a model with {}",
                params.len(),
                model.param_count()
            )));
        }
        Ok(Self { model, graph, params, ws: SurrogateWorkspace::new() })
    }
}

impl Dynamics for SurrogateDynamics<'_> {
    fn state_dim(&self) -> usize {
        self.graph.n_nodes() * self.model.config().state_dim
    }

    fn param_dim(&self) -> usize {
        self.params.len()
    }

    fn eval(&mut self, u: &[f64], out: &mut [f64]) -> Result<()> {
        self.model.eval(self.graph, u, self.params, &mut self.ws, out)
    }

    fn vjp(
        &mut self,
        u: &[f64],
        v: &[f64],
        out: Option<&mut [f64]>,
        u_bar: &mut [f64],
        theta_bar: &mut [f64],
    ) -> Result<()> {
        self.model.eval_vjp(self.graph, u, self.params, v, &mut self.ws, out, u_bar, theta_bar)
    }
}

/// Linear dynamics `du/dt = A u` with the entries of `A` (row-major) as
/// parameters. Small enough to differentiate by hand in tests.
#[derive(Debug, Clone)]
pub struct LinearDynamics {
    pub n: usize,
    pub a: Vec<f64>,
}

impl LinearDynamics {
    pub fn new(n: usize, a: Vec<f64>) -> Self {
        assert_eq!(a.len(), n * n);
        Self { n, a }
    }
}

impl Dynamics for LinearDynamics {
    fn state_dim(&self) -> usize {
        self.n
    }

    fn param_dim(&self) -> usize {
        self.n * self.n
    }

    fn eval(&mut self, u: &[f64], out: &mut [f64]) -> Result<()> {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.a[i * self.n..(i + 1) * self.n].iter().zip(u).map(|(a, x)| a * x).sum();
        }
        Ok(())
    }

    fn vjp(
        &mut self,
        u: &[f64],
        v: &[f64],
        out: Option<&mut [f64]>,
        u_bar: &mut [f64],
        theta_bar: &mut [f64],
    ) -> Result<()> {
        if let Some(out) = out {
            self.eval(u, out)?;
        }
        let n = self.n;
        u_bar.fill(0.0);
        for i in 0..n {
            for j in 0..n {
                u_bar[j] += self.a[i * n + j] * v[i];
                theta_bar[i * n + j] = v[i] * u[j];
            }
        }
        Ok(())
    }
}

pub(crate) fn zeros(n: usize) -> Vec<f64> {
    vec![0.0; n]
}
