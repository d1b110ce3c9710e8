//! Pseudo-spectral time stepping of
//! `∂_tθ + u·∇θ + κ(-Δ)^αθ = 0`, `u = R^⊥θ`, on the periodic box.
//!
//! The dissipation is integrated exactly (integrating factor); the transport
//! term is evaluated in physical space and truncated by the dealias rule.

mod kernel;
mod observe;
mod picard;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::spectral::{riesz_velocity, DealiasRule, GridSpec, RealField, SpectralField};

pub(crate) use kernel::Kernel;
pub use observe::{EnergyBudget, NormTrajectory, Observer, TrajectoryRow};
pub use picard::{picard_run, PicardConfig, PicardIterate, PicardOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Integrator {
    /// Lawson RK4 in the integrating-factor variable.
    #[default]
    Ifrk4,
    /// First order; a baseline for debugging.
    Ifeuler,
}

impl fmt::Display for Integrator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Integrator::Ifrk4 => "ifrk4",
            Integrator::Ifeuler => "ifeuler",
        })
    }
}

impl FromStr for Integrator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ifrk4" => Ok(Integrator::Ifrk4),
            "ifeuler" => Ok(Integrator::Ifeuler),
            other => Err(Error::Format(format!("unknown integrator '{other}' (ifrk4 | ifeuler)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub alpha: f64,
    /// `κ = 0` is accepted for conservation checks.
    pub kappa: f64,
    pub grid: GridSpec,
    pub dt: f64,
    pub t_end: f64,
    pub integrator: Integrator,
    pub dealias: DealiasRule,
    /// When false the transport term is dropped and the flow is diagonal.
    pub nonlinear: bool,
    /// Trajectory rows are kept every `record_stride` steps (and at the end).
    pub record_stride: usize,
}

impl SolverConfig {
    pub fn new(alpha: f64, kappa: f64, grid: GridSpec, dt: f64, t_end: f64) -> Result<Self> {
        let cfg = SolverConfig {
            alpha,
            kappa,
            grid,
            dt,
            t_end,
            integrator: Integrator::Ifrk4,
            dealias: DealiasRule::TwoThirds,
            nonlinear: true,
            record_stride: 1,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Parameter(m));
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad(format!("alpha = {} must lie in (0, 1]", self.alpha));
        }
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return bad(format!("kappa = {} must be finite and >= 0", self.kappa));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt = {} must be positive", self.dt));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end = {} must be finite and >= 0", self.t_end));
        }
        if self.record_stride == 0 {
            return bad("record_stride must be >= 1".into());
        }
        Ok(())
    }

    /// Step sizes covering `[0, t_end]`: full steps, then one shorter step if needed.
    pub fn step_sizes(&self) -> Vec<f64> {
        let full = (self.t_end / self.dt * (1.0 + 1e-12)).floor() as usize;
        let mut h = vec![self.dt; full];
        let rest = self.t_end - full as f64 * self.dt;
        if rest > 1e-12 * self.dt.max(self.t_end) {
            h.push(rest);
        }
        h
    }

    /// `0.5 / (κ N^{2α} + U_max N)` with `N` the Nyquist wavenumber.
    pub fn suggested_dt(&self, theta0: &SpectralField) -> f64 {
        let nyq = self.grid.nyquist_radius();
        let (u1, u2) = riesz_velocity(theta0);
        let (a, b) = (u1.to_real(), u2.to_real());
        let umax = a.samples().iter().zip(b.samples()).fold(0.0_f64, |m, (x, y)| m.max(x.hypot(*y)));
        0.5 / (self.kappa * nyq.powf(2.0 * self.alpha) + umax * nyq)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub theta: SpectralField,
    pub t: f64,
    pub step: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AbortReason {
    NonFinite,
    /// `‖θ‖_∞` exceeded ten times its initial value.
    Growth,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Abort {
    pub reason: AbortReason,
    /// Time of the last healthy state.
    pub t: f64,
    pub step: usize,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub trajectory: NormTrajectory,
    pub final_state: State,
    pub abort: Option<Abort>,
}

impl RunOutcome {
    pub fn completed(&self) -> bool {
        self.abort.is_none()
    }
}

/// `-P(u·∇θ)` with `u = R^⊥θ`, truncated by `rule`.
pub fn nonlinear_term(theta: &SpectralField, rule: DealiasRule) -> SpectralField {
    let k = Kernel::new(*theta.grid(), 1.0, rule);
    SpectralField::from_raw(*theta.grid(), k.nonlinear(theta.coeffs()))
}

/// The same term in divergence form, `-P div(uθ)`.
pub fn nonlinear_term_divergence(theta: &SpectralField, rule: DealiasRule) -> SpectralField {
    let k = Kernel::new(*theta.grid(), 1.0, rule);
    SpectralField::from_raw(*theta.grid(), k.nonlinear_divergence(theta.coeffs()))
}

/// Where a right-hand side evaluation sits inside a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Stage {
    Start,
    Mid,
    End,
}

type Spectrum = Vec<Complex64>;

fn scale(e: &[f64], x: &[Complex64]) -> Spectrum {
    x.iter().zip(e).map(|(x, e)| x * e).collect()
}

fn axpy(y: &[Complex64], a: f64, x: &[Complex64]) -> Spectrum {
    y.iter().zip(x).map(|(y, x)| y + x * a).collect()
}

/// One integrating-factor step of size `h` for `θ' = -κΛ^{2α}θ + N(stage, θ)`.
/// Returns the new state and `N` at the start of the step.
pub(crate) fn if_step(
    integrator: Integrator,
    theta: &[Complex64],
    h: f64,
    e_full: &[f64],
    e_half: &[f64],
    mut rhs: impl FnMut(Stage, &[Complex64]) -> Spectrum,
) -> (Spectrum, Spectrum) {
    let k1 = rhs(Stage::Start, theta);
    match integrator {
        Integrator::Ifeuler => (scale(e_full, &axpy(theta, h, &k1)), k1),
        Integrator::Ifrk4 => {
            let half_theta = scale(e_half, theta);
            let k2 = rhs(Stage::Mid, &scale(e_half, &axpy(theta, 0.5 * h, &k1)));
            let k3 = rhs(Stage::Mid, &axpy(&half_theta, 0.5 * h, &k2));
            let k4 = rhs(Stage::End, &axpy(&scale(e_full, theta), h, &scale(e_half, &k3)));
            let out = (0..theta.len())
                .map(|i| {
                    e_full[i] * theta[i] + (h / 6.0) * (e_full[i] * k1[i] + 2.0 * e_half[i] * (k2[i] + k3[i]) + k4[i])
                })
                .collect();
            (out, k1)
        }
    }
}

/// Time stepper bound to one configuration.
pub struct Stepper {
    cfg: SolverConfig,
    kernel: Kernel,
    factors: Vec<(f64, Vec<f64>, Vec<f64>)>,
}

impl Stepper {
    pub fn new(cfg: &SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let kernel = Kernel::new(cfg.grid, cfg.alpha, cfg.dealias);
        Ok(Stepper { cfg: *cfg, kernel, factors: Vec::new() })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub(crate) fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub(crate) fn factors(&mut self, h: f64) -> (Vec<f64>, Vec<f64>) {
        if let Some((_, a, b)) = self.factors.iter().find(|f| f.0 == h) {
            return (a.clone(), b.clone());
        }
        let f = (h, self.kernel.decay(self.cfg.kappa, h), self.kernel.decay(self.cfg.kappa, 0.5 * h));
        self.factors.push(f.clone());
        (f.1, f.2)
    }

    /// Advances by `h`.
    pub fn step_by(&mut self, state: &State, h: f64) -> Result<State> {
        self.cfg.grid.ensure_same(state.theta.grid())?;
        let (e_full, e_half) = self.factors(h);
        let nonlinear = self.cfg.nonlinear;
        let kernel = &self.kernel;
        let (next, _) = if_step(self.cfg.integrator, state.theta.coeffs(), h, &e_full, &e_half, |_, x| {
            if nonlinear {
                kernel.nonlinear(x)
            } else {
                vec![Complex64::new(0.0, 0.0); x.len()]
            }
        });
        Ok(State { theta: SpectralField::from_raw(self.cfg.grid, next), t: state.t + h, step: state.step + 1 })
    }

    pub fn step(&mut self, state: &State) -> Result<State> {
        self.step_by(state, self.cfg.dt)
    }
}

/// One step of size `cfg.dt`.
pub fn step(state: &State, cfg: &SolverConfig) -> Result<State> {
    Stepper::new(cfg)?.step(state)
}

/// Checks the run's preconditions and returns the projected initial spectrum.
pub(crate) fn initial_spectrum(theta0: &RealField, cfg: &SolverConfig, kernel: &Kernel) -> Result<SpectralField> {
    cfg.validate()?;
    cfg.grid.ensure_same(theta0.grid())?;
    let s = theta0.forward();
    s.ensure_mean_zero()?;
    let mut c = kernel.project(s.coeffs());
    c[0] = Complex64::new(0.0, 0.0);
    Ok(SpectralField::from_raw(cfg.grid, c))
}

/// Integrates from `θ_0` to `t_end`.
///
/// `θ_0` must be mean-zero; it is projected onto the dealiased band first.
/// Every state (including the initial one) goes to the trajectory and to each
/// observer. A non-finite state or ten-fold growth of `‖θ‖_∞` stops the run and
/// keeps the last healthy state.
pub fn run(theta0: &RealField, cfg: &SolverConfig, observers: &mut [&mut dyn Observer]) -> Result<RunOutcome> {
    let mut stepper = Stepper::new(cfg)?;
    let theta = initial_spectrum(theta0, cfg, stepper.kernel())?;
    let mut traj = NormTrajectory::new(cfg.grid, cfg.record_stride)?;
    let mut state = State { theta, t: 0.0, step: 0 };
    let limit = 10.0 * state.theta.to_real().max_abs();
    traj.observe(&state)?;
    for o in observers.iter_mut() {
        o.observe(&state)?;
    }
    let sizes = cfg.step_sizes();
    let last = sizes.len();
    let mut abort = None;
    for h in sizes {
        let next = stepper.step_by(&state, h)?;
        let reason = if next.theta.coeffs().iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            Some(AbortReason::NonFinite)
        } else if limit > 0.0 && next.theta.to_real().max_abs() > limit {
            Some(AbortReason::Growth)
        } else {
            None
        };
        if let Some(reason) = reason {
            abort = Some(Abort { reason, t: state.t, step: state.step });
            break;
        }
        state = next;
        // k·dt rather than a running sum, so the clock does not drift
        state.t = if state.step == last { cfg.t_end } else { state.step as f64 * cfg.dt };
        if state.step == last {
            traj.force_next();
        }
        traj.observe(&state)?;
        for o in observers.iter_mut() {
            o.observe(&state)?;
        }
    }
    if abort.is_some() {
        traj.force_next();
        traj.observe(&state)?;
    }
    Ok(RunOutcome { trajectory: traj, final_state: state, abort })
}

#[cfg(test)]
mod tests;
