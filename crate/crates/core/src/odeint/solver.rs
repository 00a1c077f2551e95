use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Euler,
    Rk4,
    Dopri5,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Euler => "euler",
            Method::Rk4 => "rk4",
            Method::Dopri5 => "dopri5",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "euler" => Some(Method::Euler),
            "rk4" => Some(Method::Rk4),
            "dopri5" => Some(Method::Dopri5),
            _ => None,
        }
    }

    pub fn is_adaptive(self) -> bool {
        self == Method::Dopri5
    }
}

/// Integrator settings. Fixed-step methods use `h_init` as their nominal
/// step, shortened per output interval so the interval is split evenly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub method: Method,
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            method: Method::Dopri5,
            rtol: 1e-7,
            atol: 1e-7,
            h_init: 1e-3,
            h_min: 1e-12,
            h_max: f64::INFINITY,
            max_steps: 1_000_000,
        }
    }
}

impl SolverConfig {
    pub fn dopri5(rtol: f64, atol: f64) -> Self {
        Self { rtol, atol, ..Self::default() }
    }

    pub fn fixed(method: Method, h: f64) -> Self {
        Self { method, h_init: h, h_min: h.min(1e-12), h_max: h, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.rtol > 0.0
            && self.atol > 0.0
            && self.h_min > 0.0
            && self.h_min <= self.h_init
            && self.h_init <= self.h_max
            && self.h_init.is_finite()
            && self.max_steps > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("invalid solver configuration {self:?}")))
        }
    }
}

/// Solution sampled at the requested output times.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

/// Work counters for one integration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolverStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

impl SolverStats {
    pub fn merge(&mut self, other: SolverStats) {
        self.accepted += other.accepted;
        self.rejected += other.rejected;
        self.rhs_evals += other.rhs_evals;
    }
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// Difference between the 5th-order weights (row 6 of A) and the embedded
// 4th-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;
const BETA: f64 = 0.04;
const ALPHA: f64 = 0.2 - 0.75 * BETA;

pub(crate) fn check_times(t_eval: &[f64]) -> Result<()> {
    if t_eval.is_empty() {
        return Err(Error::InvalidConfig("no output times".into()));
    }
    if t_eval.iter().any(|t| !t.is_finite()) || t_eval.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidConfig("output times must be finite and strictly increasing".into()));
    }
    Ok(())
}

/// Stepper state carried across output intervals.
pub(crate) struct Integrator<'f, F> {
    rhs: &'f mut F,
    cfg: SolverConfig,
    dim: usize,
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
    y_new: Vec<f64>,
    /// Derivative at the current state is valid in `k[0]` (FSAL).
    fsal: bool,
    h: f64,
    err_prev: f64,
    pub stats: SolverStats,
}

impl<'f, F> Integrator<'f, F>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    pub fn new(rhs: &'f mut F, cfg: SolverConfig, dim: usize) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            rhs,
            cfg,
            dim,
            k: core::array::from_fn(|_| vec![0.0; dim]),
            tmp: vec![0.0; dim],
            y_new: vec![0.0; dim],
            fsal: false,
            h: cfg.h_init,
            err_prev: 1e-4,
            stats: SolverStats::default(),
        })
    }

    /// Drops the cached derivative after a jump in the state. The step-size
    /// proposal is kept: the jump changes the solution, not its time scale.
    pub fn restart(&mut self) {
        self.fsal = false;
    }

    fn eval(&mut self, t: f64, y_is_tmp: bool, y: &[f64], stage: usize) -> Result<()> {
        self.stats.rhs_evals += 1;
        let src = if y_is_tmp { &self.tmp[..] } else { y };
        (self.rhs)(t, src, &mut self.k[stage])
    }

    /// Advances `y` from `t0` to exactly `t1`.
    pub fn advance(&mut self, y: &mut [f64], t0: f64, t1: f64) -> Result<()> {
        assert_eq!(y.len(), self.dim);
        if t1 <= t0 {
            return Ok(());
        }
        match self.cfg.method {
            Method::Euler | Method::Rk4 => self.advance_fixed(y, t0, t1),
            Method::Dopri5 => self.advance_adaptive(y, t0, t1),
        }
    }

    fn advance_fixed(&mut self, y: &mut [f64], t0: f64, t1: f64) -> Result<()> {
        let span = t1 - t0;
        let n = libm::ceil(span / self.cfg.h_init - 1e-9).max(1.0) as usize;
        let h = span / n as f64;
        for s in 0..n {
            if self.stats.accepted >= self.cfg.max_steps {
                return Err(Error::MaxStepsExceeded(self.cfg.max_steps));
            }
            let t = t0 + s as f64 * h;
            match self.cfg.method {
                Method::Euler => {
                    self.eval(t, false, y, 0)?;
                    for (yi, ki) in y.iter_mut().zip(&self.k[0]) {
                        *yi += h * ki;
                    }
                }
                _ => self.rk4_step(y, t, h)?,
            }
            self.stats.accepted += 1;
            if y.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteState { t: t + h });
            }
        }
        Ok(())
    }

    fn rk4_step(&mut self, y: &mut [f64], t: f64, h: f64) -> Result<()> {
        self.eval(t, false, y, 0)?;
        for (stage, (c, prev)) in [(0.5, 0), (0.5, 1), (1.0, 2)].into_iter().enumerate() {
            for ((tv, yi), ki) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k[prev]) {
                *tv = yi + c * h * ki;
            }
            self.eval(t + c * h, true, y, stage + 1)?;
        }
        let [k1, k2, k3, k4, ..] = &self.k;
        for i in 0..self.dim {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        Ok(())
    }

    fn advance_adaptive(&mut self, y: &mut [f64], t0: f64, t1: f64) -> Result<()> {
        let cfg = self.cfg;
        let mut t = t0;
        if !self.fsal {
            self.eval(t, false, y, 0)?;
            if self.k[0].iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteState { t });
            }
            self.fsal = true;
        }
        while t < t1 {
            if self.stats.accepted + self.stats.rejected >= cfg.max_steps {
                return Err(Error::MaxStepsExceeded(cfg.max_steps));
            }
            let h_free = self.h.min(cfg.h_max);
            let remaining = t1 - t;
            // Land exactly on t1; stretch slightly rather than leave a sliver.
            let lands = h_free >= remaining * (1.0 - 1e-10) || remaining - h_free < 1e-3 * h_free;
            let h = if lands { remaining } else { h_free };
            if h < cfg.h_min && !lands {
                return Err(Error::StepUnderflow { t, h });
            }

            for s in 1..7 {
                for i in 0..self.dim {
                    let mut acc = 0.0;
                    for (j, a) in A[s][..s].iter().enumerate() {
                        acc += a * self.k[j][i];
                    }
                    self.tmp[i] = y[i] + h * acc;
                }
                self.eval(t + C[s] * h, true, y, s)?;
            }
            // Stage 7 was evaluated at the 5th-order solution, held in tmp.
            core::mem::swap(&mut self.y_new, &mut self.tmp);

            let mut sq = 0.0;
            for i in 0..self.dim {
                let mut e = 0.0;
                for (j, ej) in E.iter().enumerate() {
                    e += ej * self.k[j][i];
                }
                let scale = cfg.atol + cfg.rtol * y[i].abs().max(self.y_new[i].abs());
                let r = h * e / scale;
                sq += r * r;
            }
            let err = libm::sqrt(sq / self.dim.max(1) as f64);

            if err.is_finite() && err <= 1.0 {
                let fac = if err == 0.0 {
                    FAC_MAX
                } else {
                    (SAFETY * libm::pow(err, -ALPHA) * libm::pow(self.err_prev, BETA)).clamp(FAC_MIN, FAC_MAX)
                };
                self.err_prev = err.max(1e-4);
                if self.y_new.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFiniteState { t: t + h });
                }
                y.copy_from_slice(&self.y_new);
                self.k.swap(0, 6);
                t = if lands { t1 } else { t + h };
                self.stats.accepted += 1;
                // A step shortened to land on t1 does not shrink the next proposal.
                self.h = if lands { h_free.max(h * fac) } else { h * fac };
            } else {
                let fac = if err.is_finite() {
                    (SAFETY * libm::pow(err, -0.2)).clamp(FAC_MIN, 1.0)
                } else {
                    FAC_MIN
                };
                self.h = h * fac;
                self.stats.rejected += 1;
                if self.h < cfg.h_min {
                    return Err(Error::StepUnderflow { t, h: self.h });
                }
            }
        }
        Ok(())
    }
}

/// Integrates `dy/dt = f(t, y)` from `t_eval[0]` (where `y = y0`) and
/// returns the solution at every `t_eval`.
pub fn integrate<F>(rhs: F, y0: &[f64], t_eval: &[f64], cfg: &SolverConfig) -> Result<Trajectory>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    integrate_with_stats(rhs, y0, t_eval, cfg).map(|(traj, _)| traj)
}

pub fn integrate_with_stats<F>(
    mut rhs: F,
    y0: &[f64],
    t_eval: &[f64],
    cfg: &SolverConfig,
) -> Result<(Trajectory, SolverStats)>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    check_times(t_eval)?;
    if y0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteState { t: t_eval[0] });
    }
    let mut integrator = Integrator::new(&mut rhs, *cfg, y0.len())?;
    let mut y = y0.to_vec();
    let mut states = Vec::with_capacity(t_eval.len());
    states.push(y.clone());
    for w in t_eval.windows(2) {
        integrator.advance(&mut y, w[0], w[1])?;
        states.push(y.clone());
    }
    let stats = integrator.stats;
    Ok((Trajectory { times: t_eval.to_vec(), states }, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decay(_t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        dy[0] = -y[0];
        Ok(())
    }

    #[test]
    fn zero_rhs_keeps_state_exactly() {
        for cfg in [SolverConfig::default(), SolverConfig::fixed(Method::Rk4, 0.1), SolverConfig::fixed(Method::Euler, 0.1)] {
            let y0 = [0.3, -1.7, 2.5];
            let traj = integrate(|_, _, dy: &mut [f64]| {
                dy.fill(0.0);
                Ok(())
            }, &y0, &[0.0, 0.5, 1.0, 3.0], &cfg)
            .unwrap();
            for s in &traj.states {
                assert_eq!(s.as_slice(), &y0);
            }
        }
    }

    #[test]
    fn dopri5_exponential_decay() {
        let traj = integrate(decay, &[1.0], &[0.0, 1.0], &SolverConfig::dopri5(1e-7, 1e-7)).unwrap();
        let exact = libm::exp(-1.0);
        assert!((traj.states[1][0] - exact).abs() <= 1e-6);
        assert_eq!(exact, 0.36787944117144233);
    }

    #[test]
    fn rotation_returns_after_one_period() {
        let traj = integrate(
            |_, y: &[f64], dy: &mut [f64]| {
                dy[0] = -y[1];
                dy[1] = y[0];
                Ok(())
            },
            &[1.0, 0.0],
            &[0.0, core::f64::consts::TAU],
            &SolverConfig::dopri5(1e-7, 1e-7),
        )
        .unwrap();
        let end = &traj.states[1];
        assert!((end[0] - 1.0).abs() < 1e-5 && end[1].abs() < 1e-5, "{end:?}");
        let norm = libm::sqrt(end[0] * end[0] + end[1] * end[1]);
        assert!((norm - 1.0).abs() < 1e-5);
    }

    #[test]
    fn global_error_tracks_tolerance() {
        for rtol in [1e-5, 1e-7, 1e-9] {
            let traj = integrate(decay, &[1.0], &[0.0, 1.0], &SolverConfig::dopri5(rtol, rtol)).unwrap();
            let err = (traj.states[1][0] - libm::exp(-1.0)).abs();
            assert!(err <= 100.0 * rtol, "rtol {rtol}: error {err:e}");
        }
    }

    #[test]
    fn fixed_step_orders() {
        // Halving the step cuts the RK4 error ~16×, the Euler error ~2×.
        let err = |m, h| {
            let traj = integrate(decay, &[1.0], &[0.0, 1.0], &SolverConfig::fixed(m, h)).unwrap();
            (traj.states[1][0] - libm::exp(-1.0)).abs()
        };
        let r4 = err(Method::Rk4, 0.1) / err(Method::Rk4, 0.05);
        assert!((14.0..18.0).contains(&r4), "{r4}");
        let r1 = err(Method::Euler, 0.01) / err(Method::Euler, 0.005);
        assert!((1.9..2.1).contains(&r1), "{r1}");
    }

    #[test]
    fn lands_on_every_output_time() {
        let t_eval = [0.0, 0.013, 0.2, 0.2001, 0.9];
        let mut seen = Vec::new();
        let traj = integrate(
            |t, y: &[f64], dy: &mut [f64]| {
                seen.push(t);
                dy[0] = -y[0];
                Ok(())
            },
            &[1.0],
            &t_eval,
            &SolverConfig::dopri5(1e-8, 1e-8),
        )
        .unwrap();
        assert_eq!(traj.times, t_eval);
        for (t, s) in t_eval.iter().zip(&traj.states) {
            assert!((s[0] - libm::exp(-t)).abs() < 1e-7);
        }
        // Stage times never cross an output time.
        assert!(seen.iter().all(|&t| t <= 0.9));
    }

    #[test]
    fn errors_are_reported() {
        let bad_times = integrate(decay, &[1.0], &[0.0, 0.0], &SolverConfig::default());
        assert!(matches!(bad_times, Err(Error::InvalidConfig(_))));
        let mut cfg = SolverConfig::default();
        cfg.max_steps = 3;
        let too_many = integrate(decay, &[1.0], &[0.0, 100.0], &SolverConfig { h_init: 1e-6, ..cfg });
        assert!(matches!(too_many, Err(Error::MaxStepsExceeded(3))));
        // Finite-time blow-up of y' = y² from y(0) = 1 at t = 1.
        let blowup = integrate(
            |_, y: &[f64], dy: &mut [f64]| {
                dy[0] = y[0] * y[0];
                Ok(())
            },
            &[1.0],
            &[0.0, 2.0],
            &SolverConfig { h_min: 1e-10, ..SolverConfig::default() },
        );
        assert!(matches!(blowup, Err(Error::StepUnderflow { .. }) | Err(Error::NonFiniteState { .. }) | Err(Error::MaxStepsExceeded(_))), "{blowup:?}");
        let nan = integrate(
            |_, _y: &[f64], dy: &mut [f64]| {
                dy[0] = f64::NAN;
                Ok(())
            },
            &[1.0],
            &[0.0, 1.0],
            &SolverConfig::fixed(Method::Rk4, 0.1),
        );
        assert!(matches!(nan, Err(Error::NonFiniteState { .. })));
    }
}
