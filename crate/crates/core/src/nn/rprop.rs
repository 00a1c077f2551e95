use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Rprop constants. `step_init` plays the role of a learning rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RpropConfig {
    pub eta_plus: f64,
    pub eta_minus: f64,
    pub step_min: f64,
    pub step_max: f64,
    pub step_init: f64,
}

impl Default for RpropConfig {
    fn default() -> Self {
        Self { eta_plus: 1.2, eta_minus: 0.5, step_min: 1e-9, step_max: 1e-3, step_init: 1e-6 }
    }
}

/// iRprop⁻: sign-based updates with per-parameter step sizes; on a sign
/// flip the step shrinks and the stored gradient is zeroed so the next
/// iteration neither grows nor shrinks it.
#[derive(Debug, Clone)]
pub struct Rprop {
    config: RpropConfig,
    steps: Vec<f64>,
    prev_grad: Vec<f64>,
}

impl Rprop {
    pub fn new(config: RpropConfig, n_params: usize) -> Result<Self> {
        let c = &config;
        let valid = c.eta_plus >= 1.0
            && c.eta_minus > 0.0
            && c.eta_minus < 1.0
            && c.step_min > 0.0
            && c.step_min <= c.step_init
            && c.step_init <= c.step_max;
        if !valid {
            return Err(Error::InvalidConfig(format!("invalid Rprop constants {config:?}")));
        }
        Ok(Self { config, steps: vec![config.step_init; n_params], prev_grad: vec![0.0; n_params] })
    }

    pub fn config(&self) -> &RpropConfig {
        &self.config
    }

    pub fn steps(&self) -> &[f64] {
        &self.steps
    }

    /// Applies one update in place. A non-finite gradient leaves both the
    /// parameters and the optimizer state untouched.
    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) -> Result<()> {
        if params.len() != self.steps.len() || grad.len() != self.steps.len() {
            return Err(Error::ShapeMismatch(format!(
                "optimizer holds {} parameters, got params {} / grad {}",
                self.steps.len(),
                params.len(),
                grad.len()
            )));
        }
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFiniteGradient);
        }
        let c = self.config;
        for ((p, &g), (step, prev)) in
            params.iter_mut().zip(grad).zip(self.steps.iter_mut().zip(self.prev_grad.iter_mut()))
        {
            let agreement = *prev * g;
            let mut g = g;
            if agreement > 0.0 {
                *step = (*step * c.eta_plus).min(c.step_max);
            } else if agreement < 0.0 {
                *step = (*step * c.eta_minus).max(c.step_min);
                g = 0.0;
            }
            if g > 0.0 {
                *p -= *step;
            } else if g < 0.0 {
                *p += *step;
            }
            *prev = g;
        }
        Ok(())
    }
}
