use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::linsolve::{bicgstab, conjugate_gradient};
use super::sampling::time_index;
use super::{Boundary, EquationKind, EquationSpec, FineGrid};
use crate::odeint::Trajectory;
use crate::{Error, Result};

/// Relative residual at which each implicit step's linear solve stops.
pub const SOLVE_TOLERANCE: f64 = 1e-10;
const MAX_ITERATIONS: usize = 2000;

/// Steps a fine-grid field forward by `gt_dt` at a time.
///
/// Heat and convection–diffusion use backward Euler on the whole operator
/// (5-point Laplacian, centered first differences). Burgers treats
/// diffusion implicitly and the convective term explicitly at the previous
/// step. On Dirichlet grids the boundary nodes keep their initial values
/// and only the interior is solved for.
#[derive(Debug, Clone)]
pub struct ReferenceSolver {
    spec: EquationSpec,
    grid: FineGrid,
    state: Vec<f64>,
    steps: usize,
    /// Initial values on the boundary, zero inside (Dirichlet only).
    lift: Vec<Vec<f64>>,
    comp: Vec<f64>,
    rhs: Vec<f64>,
    work: Vec<f64>,
    pub linear_iterations: usize,
}

impl ReferenceSolver {
    pub fn new(spec: &EquationSpec, u0: &[f64]) -> Result<Self> {
        spec.validate()?;
        let grid = spec.grid();
        let d = spec.state_dim();
        if u0.len() != grid.len() * d {
            return Err(Error::ShapeMismatch(format!(
                "initial field has {} values, grid needs {}",
                u0.len(),
                grid.len() * d
            )));
        }
        if u0.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState { t: 0.0 });
        }
        let lift = if grid.boundary == Boundary::Dirichlet {
            (0..d)
                .map(|c| (0..grid.len()).map(|k| if grid.is_boundary(k) { u0[k * d + c] } else { 0.0 }).collect())
                .collect()
        } else {
            Vec::new()
        };
        Ok(Self {
            spec: *spec,
            grid,
            state: u0.to_vec(),
            steps: 0,
            lift,
            comp: vec![0.0; grid.len()],
            rhs: vec![0.0; grid.len()],
            work: vec![0.0; grid.len()],
            linear_iterations: 0,
        })
    }

    pub fn time(&self) -> f64 {
        self.steps as f64 * self.spec.gt_dt
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn state(&self) -> &[f64] {
        &self.state
    }

    pub fn grid(&self) -> &FineGrid {
        &self.grid
    }

    /// Advances one reference step.
    pub fn step(&mut self) -> Result<()> {
        let d = self.spec.state_dim();
        let dt = self.spec.gt_dt;
        let diff = self.spec.diffusion;
        let grid = self.grid;
        let dirichlet = grid.boundary == Boundary::Dirichlet;
        let velocity = if self.spec.kind == EquationKind::ConvDiff { self.spec.velocity } else { [0.0, 0.0] };
        let implicit_convection = velocity != [0.0, 0.0];

        // Explicit Burgers convection, from the state before the step.
        let explicit: Vec<Vec<f64>> = if self.spec.kind == EquationKind::Burgers {
            (0..d).map(|c| burgers_convection(&grid, &self.state, d, c)).collect()
        } else {
            Vec::new()
        };

        for c in 0..d {
            for (k, v) in self.comp.iter_mut().enumerate() {
                *v = self.state[k * d + c];
            }
            // Right-hand side: previous interior values (plus explicit terms
            // and boundary contributions); zero on Dirichlet boundary rows.
            for k in 0..grid.len() {
                self.rhs[k] = if grid.is_boundary(k) { 0.0 } else { self.comp[k] };
            }
            if let Some(conv) = explicit.get(c) {
                for (r, v) in self.rhs.iter_mut().zip(conv) {
                    *r += dt * v;
                }
            }
            if dirichlet {
                spatial_operator(&grid, diff, velocity, &self.lift[c], &mut self.work, false);
                for (r, v) in self.rhs.iter_mut().zip(&self.work) {
                    *r += dt * v;
                }
                // Unknown is the interior part; boundary part starts at zero.
                for (k, v) in self.comp.iter_mut().enumerate() {
                    if grid.is_boundary(k) {
                        *v = 0.0;
                    }
                }
            }
            let apply = |x: &[f64], out: &mut [f64]| {
                spatial_operator(&grid, diff, velocity, x, out, dirichlet);
                for (k, o) in out.iter_mut().enumerate() {
                    *o = if dirichlet && grid.is_boundary(k) { x[k] } else { x[k] - dt * *o };
                }
            };
            let stats = if implicit_convection {
                bicgstab(apply, &self.rhs, &mut self.comp, SOLVE_TOLERANCE, MAX_ITERATIONS)?
            } else {
                conjugate_gradient(apply, &self.rhs, &mut self.comp, SOLVE_TOLERANCE, MAX_ITERATIONS)?
            };
            self.linear_iterations += stats.iterations;
            for (k, v) in self.comp.iter().enumerate() {
                let lifted = if dirichlet { self.lift[c][k] + v } else { *v };
                self.state[k * d + c] = lifted;
            }
        }
        self.steps += 1;
        if self.state.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState { t: self.time() });
        }
        Ok(())
    }
}

/// `out = D Δx − v·∇x` at every node of a periodic grid or every interior
/// node of a Dirichlet grid (zero on the boundary). With `zero_boundary`,
/// boundary values of `x` are read as zero.
fn spatial_operator(grid: &FineGrid, diff: f64, v: [f64; 2], x: &[f64], out: &mut [f64], zero_boundary: bool) {
    let n = grid.n;
    let h = grid.h;
    let (cd, cx, cy) = (diff / (h * h), v[0] / (2.0 * h), v[1] / (2.0 * h));
    let periodic = grid.boundary == Boundary::Periodic;
    let read = |i: usize, j: usize| -> f64 {
        if zero_boundary && (i == 0 || j == 0 || i == n - 1 || j == n - 1) {
            0.0
        } else {
            x[j * n + i]
        }
    };
    for j in 0..n {
        for i in 0..n {
            let k = j * n + i;
            if !periodic && grid.is_boundary(k) {
                out[k] = 0.0;
                continue;
            }
            let (e, w, no, s, c) = if periodic {
                (
                    x[j * n + (i + 1) % n],
                    x[j * n + (i + n - 1) % n],
                    x[((j + 1) % n) * n + i],
                    x[((j + n - 1) % n) * n + i],
                    x[k],
                )
            } else {
                (read(i + 1, j), read(i - 1, j), read(i, j + 1), read(i, j - 1), read(i, j))
            };
            out[k] = cd * (e + w + no + s - 4.0 * c) - (cx * (e - w) + cy * (no - s));
        }
    }
}

/// `−(u·∇) u_c` with centered differences; zero on Dirichlet boundary nodes.
fn burgers_convection(grid: &FineGrid, state: &[f64], d: usize, c: usize) -> Vec<f64> {
    let n = grid.n;
    let inv = 1.0 / (2.0 * grid.h);
    let periodic = grid.boundary == Boundary::Periodic;
    let mut out = vec![0.0; grid.len()];
    for j in 0..n {
        for i in 0..n {
            let k = j * n + i;
            if grid.is_boundary(k) {
                continue;
            }
            let (ip, im, jp, jm) = if periodic {
                ((i + 1) % n, (i + n - 1) % n, (j + 1) % n, (j + n - 1) % n)
            } else {
                (i + 1, i - 1, j + 1, j - 1)
            };
            let dx = (state[(j * n + ip) * d + c] - state[(j * n + im) * d + c]) * inv;
            let dy = (state[(jp * n + i) * d + c] - state[(jm * n + i) * d + c]) * inv;
            out[k] = -(state[k * d] * dx + state[k * d + 1] * dy);
        }
    }
    out
}

/// The reference solution at every step up to `t_end` (rounded up to a
/// whole number of steps), starting from `u0` at time 0.
pub fn solve_ground_truth(spec: &EquationSpec, u0: &[f64], t_end: f64) -> Result<Trajectory> {
    if !(t_end > 0.0) {
        return Err(Error::InvalidConfig(format!("end time {t_end} must be positive")));
    }
    let mut solver = ReferenceSolver::new(spec, u0)?;
    let steps = libm::ceil(t_end / spec.gt_dt - 1e-9) as usize;
    let mut times = vec![0.0];
    let mut states = vec![u0.to_vec()];
    for _ in 0..steps {
        solver.step()?;
        times.push(solver.time());
        states.push(solver.state().to_vec());
    }
    Ok(Trajectory { times, states })
}

/// The reference solution at the given times only. Every time must be a
/// non-negative multiple of `gt_dt` (within 1e-9).
pub fn solve_ground_truth_at(spec: &EquationSpec, u0: &[f64], t_obs: &[f64]) -> Result<Trajectory> {
    if t_obs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidConfig("observation times must be strictly increasing".into()));
    }
    let mut solver = ReferenceSolver::new(spec, u0)?;
    let mut states = Vec::with_capacity(t_obs.len());
    for &t in t_obs {
        let target = time_index(t, spec.gt_dt)?;
        while solver.steps() < target {
            solver.step()?;
        }
        states.push(solver.state().to_vec());
    }
    Ok(Trajectory { times: t_obs.to_vec(), states })
}
