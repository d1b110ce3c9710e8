use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

use super::{Kernel, SolverConfig, State};
use crate::error::Result;
use crate::littlewood_paley::{make_family, DyadicFamily};
use crate::spectral::{sup_norm, GridSpec};

/// Receives every state of a run, the initial one included.
pub trait Observer {
    fn observe(&mut self, state: &State) -> Result<()>;
}

impl<F: FnMut(&State) -> Result<()>> Observer for F {
    fn observe(&mut self, state: &State) -> Result<()> {
        self(state)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub step: usize,
    pub t: f64,
    pub l2: f64,
    /// Supremum of the interpolant, see [`crate::spectral::sup_norm`].
    pub linf: f64,
    /// `‖Δ_jθ‖_2` for `j = j_min..=j_max`.
    pub blocks: Vec<f64>,
}

/// Norm history of a run.
#[derive(Debug, Clone)]
pub struct NormTrajectory {
    fam: DyadicFamily,
    stride: usize,
    force: bool,
    pub rows: Vec<TrajectoryRow>,
}

pub const FORMAT_VERSION: u32 = 1;

impl NormTrajectory {
    pub fn new(grid: GridSpec, stride: usize) -> Result<Self> {
        Ok(Self { fam: make_family(grid)?, stride: stride.max(1), force: false, rows: Vec::new() })
    }

    pub fn j_min(&self) -> i32 {
        self.fam.j_min()
    }

    pub fn j_max(&self) -> i32 {
        self.fam.j_max()
    }

    /// Records the next observed state regardless of the stride.
    pub fn force_next(&mut self) {
        self.force = true;
    }

    pub fn last(&self) -> Option<&TrajectoryRow> {
        self.rows.last()
    }

    pub fn row(&self, state: &State) -> Result<TrajectoryRow> {
        let g = self.fam.grid();
        let c = state.theta.coeffs();
        let blocks = self
            .fam
            .j_range()
            .map(|j| {
                let s = self.fam.symbol(j)?;
                Ok((g.area() * c.iter().zip(s).map(|(c, s)| s * s * c.norm_sqr()).sum::<f64>()).sqrt())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TrajectoryRow { step: state.step, t: state.t, l2: state.theta.l2_norm(), linf: sup_norm(&state.theta), blocks })
    }

    /// Largest `(v(t_2)/v(t_1) - 1)/(t_2 - t_1)` over recorded pairs, i.e. how far
    /// the column is from being nonincreasing, per unit time.
    pub fn growth_rate(&self, column: impl Fn(&TrajectoryRow) -> f64) -> f64 {
        let v: Vec<(f64, f64)> = self.rows.iter().map(|r| (r.t, column(r))).collect();
        let mut worst = f64::NEG_INFINITY;
        for (i, a) in v.iter().enumerate() {
            for b in &v[i + 1..] {
                if a.1 > 0.0 && b.0 > a.0 {
                    worst = worst.max((b.1 / a.1 - 1.0) / (b.0 - a.0));
                }
            }
        }
        worst
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("# format_version: {FORMAT_VERSION}\nstep,t,l2,linf");
        for j in self.fam.j_range() {
            let _ = write!(out, ",block_{j}");
        }
        out.push('\n');
        for r in &self.rows {
            let _ = write!(out, "{},{:.17e},{:.17e},{:.17e}", r.step, r.t, r.l2, r.linf);
            for b in &r.blocks {
                let _ = write!(out, ",{b:.17e}");
            }
            out.push('\n');
        }
        out
    }
}

impl Observer for NormTrajectory {
    fn observe(&mut self, state: &State) -> Result<()> {
        if self.rows.last().is_some_and(|r| r.step == state.step) {
            self.force = false;
            return Ok(());
        }
        if self.force || state.step.is_multiple_of(self.stride) {
            self.force = false;
            let row = self.row(state)?;
            self.rows.push(row);
        }
        Ok(())
    }
}

/// Integrated per-block energy law
/// `‖Δ_jθ(t)‖² - ‖Δ_jθ(0)‖² + 2κ∫‖Λ^αΔ_jθ‖² = 2∫⟨Δ_jθ, Δ_j N(θ)⟩`,
/// with the time integrals taken by the trapezoid rule over observed states.
pub struct EnergyBudget {
    kernel: Kernel,
    fam: DyadicFamily,
    kappa: f64,
    nonlinear: bool,
    initial: Vec<f64>,
    energy: Vec<f64>,
    dissipated: Vec<f64>,
    transferred: Vec<f64>,
    prev: Option<(f64, Vec<f64>, Vec<f64>)>,
}

impl EnergyBudget {
    pub fn new(cfg: &SolverConfig) -> Result<Self> {
        let fam = make_family(cfg.grid)?;
        let nb = fam.len();
        Ok(Self {
            kernel: Kernel::new(cfg.grid, cfg.alpha, cfg.dealias),
            fam,
            kappa: cfg.kappa,
            nonlinear: cfg.nonlinear,
            initial: Vec::new(),
            energy: vec![0.0; nb],
            dissipated: vec![0.0; nb],
            transferred: vec![0.0; nb],
            prev: None,
        })
    }

    /// `|residual_j| / Σ_j ‖Δ_jθ(0)‖²` per block.
    pub fn residuals(&self) -> Vec<(i32, f64)> {
        let total: f64 = self.initial.iter().sum();
        self.fam
            .j_range()
            .enumerate()
            .map(|(i, j)| {
                let r = self.energy[i] - self.initial[i] + self.dissipated[i] - self.transferred[i];
                (j, if total > 0.0 { r.abs() / total } else { r.abs() })
            })
            .collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals().iter().fold(0.0, |m, r| m.max(r.1))
    }
}

impl Observer for EnergyBudget {
    fn observe(&mut self, state: &State) -> Result<()> {
        let c = state.theta.coeffs();
        let area = state.theta.grid().area();
        let n = if self.nonlinear { Some(self.kernel.nonlinear(c)) } else { None };
        let nb = self.fam.len();
        let (mut diss, mut trans) = (vec![0.0; nb], vec![0.0; nb]);
        for (i, j) in self.fam.j_range().enumerate() {
            let s = self.fam.symbol(j)?;
            let mut e = 0.0;
            for idx in 0..c.len() {
                let w = s[idx] * s[idx];
                if w == 0.0 {
                    continue;
                }
                e += w * c[idx].norm_sqr();
                diss[i] += w * self.kernel.lambda[idx] * c[idx].norm_sqr();
                if let Some(n) = &n {
                    trans[i] += w * (c[idx].conj() * n[idx]).re;
                }
            }
            self.energy[i] = area * e;
            diss[i] *= 2.0 * self.kappa * area;
            trans[i] *= 2.0 * area;
        }
        if self.initial.is_empty() {
            self.initial = self.energy.clone();
        }
        if let Some((t0, d0, r0)) = &self.prev {
            let h = state.t - t0;
            for i in 0..nb {
                self.dissipated[i] += 0.5 * h * (d0[i] + diss[i]);
                self.transferred[i] += 0.5 * h * (r0[i] + trans[i]);
            }
        }
        self.prev = Some((state.t, diss, trans));
        Ok(())
    }
}
