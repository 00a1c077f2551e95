//! Training loss and evaluation error.

use alloc::format;

use crate::datagen::{EquationKind, SimulationRecord};
use crate::odeint::Trajectory;
use crate::{Error, Result};

/// Which field the relative error is measured on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorField {
    /// All node components as one flat vector.
    Raw,
    /// Per-node Euclidean norm of the components (the Burgers velocity
    /// magnitude).
    Magnitude,
}

impl ErrorField {
    pub fn for_kind(kind: EquationKind) -> Self {
        if kind == EquationKind::Burgers {
            ErrorField::Magnitude
        } else {
            ErrorField::Raw
        }
    }
}

/// `(1/(M+1)) Σ_{i≥1} ‖û(t_i) − y(t_i)‖²` over the record's `M+1` times.
pub fn mse_loss(pred: &Trajectory, obs: &SimulationRecord) -> Result<f64> {
    if pred.times.len() != obs.times.len() || pred.states.len() != obs.states.len() {
        return Err(Error::TimeMisalignment(format!(
            "{} predicted times for {} observed",
            pred.times.len(),
            obs.times.len()
        )));
    }
    if let Some((a, b)) = pred.times.iter().zip(&obs.times).find(|(a, b)| (*a - *b).abs() > 1e-9) {
        return Err(Error::TimeMisalignment(format!("predicted time {a} against observed {b}")));
    }
    let mut total = 0.0;
    for (p, y) in pred.states.iter().zip(&obs.states).skip(1) {
        if p.len() != y.len() {
            return Err(Error::ShapeMismatch("predicted state differs in length from observation".into()));
        }
        total += p.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    }
    Ok(total / obs.times.len() as f64)
}

/// `‖y − û‖ / ‖y‖` for one time, on the chosen field.
pub fn relative_error(pred: &[f64], obs: &[f64], state_dim: usize, field: ErrorField) -> Result<f64> {
    if pred.len() != obs.len() || state_dim == 0 || !obs.len().is_multiple_of(state_dim) {
        return Err(Error::ShapeMismatch(format!(
            "prediction of length {} against observation of length {}",
            pred.len(),
            obs.len()
        )));
    }
    let (num, den) = match field {
        ErrorField::Raw => pred.iter().zip(obs).fold((0.0, 0.0), |(n, d), (p, y)| (n + (y - p) * (y - p), d + y * y)),
        ErrorField::Magnitude => pred.chunks(state_dim).zip(obs.chunks(state_dim)).fold((0.0, 0.0), |(n, d), (p, y)| {
            let mp = libm::sqrt(p.iter().map(|v| v * v).sum());
            let my = libm::sqrt(y.iter().map(|v| v * v).sum());
            (n + (my - mp) * (my - mp), d + my * my)
        }),
    };
    if den == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok(libm::sqrt(num) / libm::sqrt(den))
}
