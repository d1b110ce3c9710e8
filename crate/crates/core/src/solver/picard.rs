//! Successive approximations: iterate `n` solves the linear problem
//! `∂_tθ⁽ⁿ⁾ + u⁽ⁿ⁻¹⁾·∇θ⁽ⁿ⁾ + κΛ^{2α}θ⁽ⁿ⁾ = 0`, `θ⁽ⁿ⁾(0) = Σ_{j≤n} Δ_jθ_0`,
//! with `u⁽ⁿ⁻¹⁾ = R^⊥θ⁽ⁿ⁻¹⁾` frozen from the previous iterate and `θ⁽⁰⁾ = 0`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{if_step, initial_spectrum, Kernel, NormTrajectory, Observer, SolverConfig, Stage, State};
use crate::error::{Error, Result};
use crate::littlewood_paley::make_family;
use crate::spectral::{RealField, SpectralField};

type Spectrum = Vec<Complex64>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PicardConfig {
    pub max_iter: usize,
    pub inner: SolverConfig,
    /// Threshold on `sup_t ‖θ⁽ⁿ⁾ - θ⁽ⁿ⁻¹⁾‖_2`.
    pub tolerance: f64,
}

#[derive(Debug, Clone)]
pub struct PicardIterate {
    pub index: usize,
    pub trajectory: NormTrajectory,
    pub final_theta: SpectralField,
    /// `sup_t ‖θ⁽ⁿ⁾(t) - θ⁽ⁿ⁻¹⁾(t)‖_2` over the step times.
    pub difference: f64,
    /// Whether the initial data of this iterate is all of `θ_0`.
    pub full_data: bool,
}

#[derive(Debug, Clone)]
pub struct PicardOutcome {
    pub iterates: Vec<PicardIterate>,
    pub converged: bool,
}

impl PicardOutcome {
    pub fn differences(&self) -> Vec<f64> {
        self.iterates.iter().map(|i| i.difference).collect()
    }

    /// `d_{n+1} / d_n` for consecutive differences.
    pub fn contraction_ratios(&self) -> Vec<f64> {
        self.differences().windows(2).map(|w| w[1] / w[0]).collect()
    }

    pub fn last(&self) -> Option<&PicardIterate> {
        self.iterates.last()
    }
}

/// Stored history of one iterate: states and forcing at the step times.
struct History {
    theta: Vec<Spectrum>,
    forcing: Vec<Spectrum>,
}

/// Cubic Hermite midpoint of a stored step, in the integrating-factor frame
/// when the step is not stiff for that mode and in the plain frame otherwise.
fn midpoint(hist: &History, k: usize, h: f64, kernel: &Kernel, kappa: f64) -> Spectrum {
    let (a, b) = (&hist.theta[k], &hist.theta[k + 1]);
    let (na, nb) = (&hist.forcing[k], &hist.forcing[k + 1]);
    (0..a.len())
        .map(|i| {
            let lh = kappa * kernel.lambda[i] * h;
            if lh <= 30.0 {
                let (em, ep) = ((-0.5 * lh).exp(), (0.5 * lh).exp());
                0.5 * (em * a[i] + ep * b[i]) + (h / 8.0) * (em * na[i] - ep * nb[i])
            } else {
                let l = kappa * kernel.lambda[i];
                let (da, db) = (na[i] - a[i] * l, nb[i] - b[i] * l);
                0.5 * (a[i] + b[i]) + (h / 8.0) * (da - db)
            }
        })
        .collect()
}

fn l2_distance(a: &[Complex64], b: &[Complex64], area: f64) -> f64 {
    (area * a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>()).sqrt()
}

/// Runs up to `max_iter` iterates. Convergence needs the last two iterates to
/// start from the complete data and to differ by less than `tolerance`.
/// Non-finite iterates stop the loop with `converged = false`.
pub fn picard_run(theta0: &RealField, pcfg: &PicardConfig) -> Result<PicardOutcome> {
    if pcfg.max_iter == 0 {
        return Err(Error::Parameter("max_iter must be >= 1".into()));
    }
    let cfg = pcfg.inner;
    let kernel = Kernel::new(cfg.grid, cfg.alpha, cfg.dealias);
    let full = initial_spectrum(theta0, &cfg, &kernel)?;
    let fam = make_family(cfg.grid)?;
    let area = cfg.grid.area();
    let sizes = cfg.step_sizes();
    let factors: Vec<(Vec<f64>, Vec<f64>)> =
        sizes.iter().map(|&h| (kernel.decay(cfg.kappa, h), kernel.decay(cfg.kappa, 0.5 * h))).collect();
    let zero: Spectrum = vec![Complex64::new(0.0, 0.0); cfg.grid.len()];

    let mut prev: Option<History> = None;
    let mut prev_full = false;
    let mut out = PicardOutcome { iterates: Vec::new(), converged: false };
    for n in 1..=pcfg.max_iter {
        let data = fam.low_pass(&full, n as i32 + 1)?;
        let full_data = data == full;
        let mut theta = data.into_coeffs();
        let mut traj = NormTrajectory::new(cfg.grid, cfg.record_stride)?;
        let mut hist = History { theta: vec![theta.clone()], forcing: Vec::new() };
        let mut diff = l2_distance(&theta, prev.as_ref().map_or(&zero, |p| &p.theta[0]), area);
        let mut t = 0.0;
        traj.observe(&State { theta: SpectralField::from_raw(cfg.grid, theta.clone()), t, step: 0 })?;
        let velocity = |hist: Option<&History>, k: usize, stage: Stage, h: f64| -> Option<(Spectrum, Spectrum)> {
            let p = hist?;
            if !cfg.nonlinear {
                return None;
            }
            Some(match stage {
                Stage::Start => kernel.velocity(&p.theta[k]),
                Stage::End => kernel.velocity(&p.theta[k + 1]),
                Stage::Mid => kernel.velocity(&midpoint(p, k, h, &kernel, cfg.kappa)),
            })
        };
        let mut healthy = true;
        for (k, &h) in sizes.iter().enumerate() {
            let u: [Option<(Spectrum, Spectrum)>; 3] =
                [Stage::Start, Stage::Mid, Stage::End].map(|s| velocity(prev.as_ref(), k, s, h));
            let (e_full, e_half) = (&factors[k].0, &factors[k].1);
            let (next, k1) = if_step(cfg.integrator, &theta, h, e_full, e_half, |stage, x| {
                let slot = match stage {
                    Stage::Start => 0,
                    Stage::Mid => 1,
                    Stage::End => 2,
                };
                match &u[slot] {
                    Some((u1, u2)) => kernel.advect((u1, u2), x),
                    None => zero.clone(),
                }
            });
            if next.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
                healthy = false;
                break;
            }
            hist.forcing.push(k1);
            theta = next;
            t += h;
            if let Some(p) = &prev {
                diff = diff.max(l2_distance(&theta, &p.theta[k + 1], area));
            } else {
                diff = diff.max(l2_distance(&theta, &zero, area));
            }
            if k + 1 == sizes.len() {
                traj.force_next();
            }
            traj.observe(&State { theta: SpectralField::from_raw(cfg.grid, theta.clone()), t, step: k + 1 })?;
            hist.theta.push(theta.clone());
        }
        if !healthy {
            out.iterates.push(PicardIterate {
                index: n,
                trajectory: traj,
                final_theta: SpectralField::from_raw(cfg.grid, theta),
                difference: f64::INFINITY,
                full_data,
            });
            return Ok(out);
        }
        let last = sizes.len();
        let tail = match velocity(prev.as_ref(), last.saturating_sub(1), Stage::End, 0.0) {
            Some((u1, u2)) if last > 0 => kernel.advect((&u1, &u2), &theta),
            _ => zero.clone(),
        };
        hist.forcing.push(tail);
        out.iterates.push(PicardIterate {
            index: n,
            trajectory: traj,
            final_theta: SpectralField::from_raw(cfg.grid, theta),
            difference: diff,
            full_data,
        });
        let done = full_data && prev_full && diff < pcfg.tolerance;
        prev = Some(hist);
        prev_full = full_data;
        if done || (full_data && n == 1 && diff < pcfg.tolerance) {
            out.converged = true;
            break;
        }
    }
    Ok(out)
}
