//! Reference data for the three benchmark equations: random Fourier initial
//! conditions, implicit finite-difference solvers on a regular fine grid,
//! and the random node/time sampling that turns fine-grid solutions into
//! sparse observation records.

mod grid;
mod initial;
mod linsolve;
mod reference;
mod sampling;

pub use grid::FineGrid;
pub use initial::sample_initial_condition;
pub use linsolve::{bicgstab, conjugate_gradient, SolveStats};
pub use reference::{solve_ground_truth, solve_ground_truth_at, ReferenceSolver};
pub use sampling::{add_noise, downsample, perturb_times, simulate, time_index, SimulationPlan};

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::geometry::Point;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EquationKind {
    Heat,
    ConvDiff,
    Burgers,
}

impl EquationKind {
    pub fn name(self) -> &'static str {
        match self {
            EquationKind::Heat => "heat",
            EquationKind::ConvDiff => "convdiff",
            EquationKind::Burgers => "burgers",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "heat" => Some(EquationKind::Heat),
            "convdiff" => Some(EquationKind::ConvDiff),
            "burgers" => Some(EquationKind::Burgers),
            _ => None,
        }
    }

    /// Components per node: 2 for the Burgers velocity field, 1 otherwise.
    pub fn state_dim(self) -> usize {
        if self == EquationKind::Burgers {
            2
        } else {
            1
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Boundary {
    Periodic,
    Dirichlet,
}

/// One benchmark problem together with its reference discretization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquationSpec {
    pub kind: EquationKind,
    pub diffusion: f64,
    /// Convection velocity; used by convection–diffusion only.
    pub velocity: [f64; 2],
    pub lo: Point,
    pub hi: Point,
    pub boundary: Boundary,
    /// Fourier modes `-N..=N` in each direction of the initial condition.
    pub fourier_n: usize,
    /// Fine-grid nodes per side.
    pub gt_grid: usize,
    pub gt_dt: f64,
}

const TWO_PI: f64 = core::f64::consts::TAU;

impl EquationSpec {
    /// Heat equation on (0,1)² with the boundary held at its initial values.
    pub fn heat() -> Self {
        Self {
            kind: EquationKind::Heat,
            diffusion: 0.2,
            velocity: [0.0, 0.0],
            lo: [0.0, 0.0],
            hi: [1.0, 1.0],
            boundary: Boundary::Dirichlet,
            fourier_n: 10,
            gt_grid: 128,
            gt_dt: 1e-4,
        }
    }

    /// Convection–diffusion on the periodic square [0, 2π]².
    pub fn convdiff() -> Self {
        Self {
            kind: EquationKind::ConvDiff,
            diffusion: 0.25,
            velocity: [5.0, 2.0],
            lo: [0.0, 0.0],
            hi: [TWO_PI, TWO_PI],
            boundary: Boundary::Periodic,
            fourier_n: 4,
            gt_grid: 128,
            gt_dt: 2e-4,
        }
    }

    /// Viscous Burgers equations on the periodic square [0, 2π]².
    pub fn burgers() -> Self {
        Self {
            kind: EquationKind::Burgers,
            diffusion: 0.15,
            velocity: [0.0, 0.0],
            lo: [0.0, 0.0],
            hi: [TWO_PI, TWO_PI],
            boundary: Boundary::Periodic,
            fourier_n: 2,
            gt_grid: 128,
            gt_dt: 1.6e-3,
        }
    }

    pub fn for_kind(kind: EquationKind) -> Self {
        match kind {
            EquationKind::Heat => Self::heat(),
            EquationKind::ConvDiff => Self::convdiff(),
            EquationKind::Burgers => Self::burgers(),
        }
    }

    pub fn state_dim(&self) -> usize {
        self.kind.state_dim()
    }

    pub fn validate(&self) -> Result<()> {
        let side = [self.hi[0] - self.lo[0], self.hi[1] - self.lo[1]];
        let ok = self.diffusion > 0.0
            && self.diffusion.is_finite()
            && self.velocity.iter().all(|v| v.is_finite())
            && side[0] > 0.0
            && side[0] == side[1]
            && self.gt_grid >= 4
            && self.gt_dt > 0.0
            && self.gt_dt.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("invalid equation spec {self:?}")))
        }
    }

    pub fn grid(&self) -> FineGrid {
        FineGrid::new(self.gt_grid, self.lo, self.hi, self.boundary)
    }
}

/// Observations of one simulation: `states[k]` is the `N × d` row-major
/// field at `times[k]`, sampled at `coords`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationRecord {
    pub coords: Vec<Point>,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub state_dim: usize,
}

impl SimulationRecord {
    pub fn n_nodes(&self) -> usize {
        self.coords.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.coords.len();
        if self.state_dim == 0 || n == 0 {
            return Err(Error::ShapeMismatch("empty simulation record".into()));
        }
        if self.times.len() != self.states.len() || self.times.is_empty() {
            return Err(Error::ShapeMismatch(format!(
                "{} times for {} states",
                self.times.len(),
                self.states.len()
            )));
        }
        if self.times.windows(2).any(|w| w[1] <= w[0]) || self.times.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidConfig("times must be finite and strictly increasing".into()));
        }
        for s in &self.states {
            if s.len() != n * self.state_dim {
                return Err(Error::ShapeMismatch(format!("state of length {} for {n} nodes", s.len())));
            }
            if s.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteState { t: f64::NAN });
            }
        }
        if self.coords.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidPoints("non-finite coordinate".into()));
        }
        Ok(())
    }
}

/// A collection of simulations of one equation.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub equation: EquationSpec,
    pub simulations: Vec<SimulationRecord>,
    /// Free-form `key=value` provenance, seeds first.
    pub metadata: Vec<(String, String)>,
}

impl Dataset {
    pub fn state_dim(&self) -> usize {
        self.equation.state_dim()
    }

    pub fn validate(&self) -> Result<()> {
        self.equation.validate()?;
        for sim in &self.simulations {
            sim.validate()?;
            if sim.state_dim != self.state_dim() {
                return Err(Error::ShapeMismatch(format!(
                    "simulation has {} components, equation has {}",
                    sim.state_dim,
                    self.state_dim()
                )));
            }
        }
        Ok(())
    }

    pub fn metadata_value(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}
