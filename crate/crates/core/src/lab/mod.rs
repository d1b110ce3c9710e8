//! Numerical checks of the frequency-localized inequalities: the Bernstein
//! family for `|Δ_j f|^{p/2}`, the positivity lemma, the dissipation chain,
//! the composition estimate, product and commutator bounds.
//!
//! Fractional derivatives of order `a > 0` act on the resolved modes only:
//! the Nyquist lines carry no well-defined derivative on the grid, so they
//! are dropped before `Λ^a` or `∇` is applied. With that convention
//! `‖∇g‖_2 = ‖Λg‖_2` holds exactly on the lattice.
//!
//! At `p = 2` the power map `|g|^{p/2}` is replaced by `g` itself, which is
//! the form in which the `p = 2` estimates are linear and Plancherel closes
//! them; for `p > 2` the pointwise power is used.

mod report;
mod suites;

pub use report::{Check, GroupConstants, RatioReport, Sample};
pub use suites::{run_suite, stability_ratio, Suite, SuiteConfig};

use num_complex::Complex64;

use crate::besov::{besov_norm, vector_besov_norm, BesovIndex};
use crate::error::{Error, Result};
use crate::littlewood_paley::DyadicFamily;
use crate::spectral::{
    dealiased_product, divergence_residual, forward_samples, inverse_coeffs, inverse_pair, lp_norm_samples,
    product_spectrum, DealiasRule, GridSpec, RealField, SpectralField,
};

/// `(lower, middle, upper)` of a two-sided estimate. Here `lower` and
/// `upper` carry the shared scale; the empirical constants are `middle/scale`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triple {
    pub lower: f64,
    pub middle: f64,
    pub upper: f64,
}

impl Triple {
    const ZERO: Triple = Triple { lower: 0.0, middle: 0.0, upper: 0.0 };

    /// `middle / scale`, or 0 for an empty block.
    pub fn ratio(&self) -> f64 {
        if self.upper == 0.0 {
            0.0
        } else {
            self.middle / self.upper
        }
    }
}

fn check_p(p: f64, min: f64, strict: bool) -> Result<()> {
    let bad = p.is_nan() || p.is_infinite() || if strict { p <= min } else { p < min };
    if bad {
        let rel = if strict { ">" } else { ">=" };
        return Err(Error::Parameter(format!("p = {p} must be finite and {rel} {min}")));
    }
    Ok(())
}

fn check_unit(name: &str, a: f64, lo: f64, hi: f64) -> Result<()> {
    if !(a >= lo && a <= hi) {
        return Err(Error::Parameter(format!("{name} = {a} must lie in [{lo}, {hi}]")));
    }
    Ok(())
}

/// `|g|^{p/2}` pointwise (`g` itself at `p = 2`).
pub(crate) fn power_map(g: &[f64], p: f64) -> Vec<f64> {
    if p == 2.0 {
        g.to_vec()
    } else {
        let e = 0.5 * p;
        g.iter().map(|v| v.abs().powf(e)).collect()
    }
}

/// `|g|^{p-2} g` pointwise.
fn dual_power(g: &[f64], p: f64) -> Vec<f64> {
    if p == 2.0 {
        g.to_vec()
    } else {
        g.iter().map(|v| v.abs().powf(p - 2.0) * v).collect()
    }
}

/// Lattice weights `|ξ|^{b}` restricted to resolved modes (all ones at `b = 0`).
pub(crate) fn resolved_weights(grid: &GridSpec, b: f64) -> Vec<f64> {
    (0..grid.len())
        .map(|idx| {
            if b == 0.0 {
                1.0
            } else if idx == 0 || grid.on_nyquist_line(idx) {
                0.0
            } else {
                grid.radius(idx).powf(b)
            }
        })
        .collect()
}

/// `‖Λ^a h‖_2^2` from the spectrum of `h`, resolved modes only when `a > 0`.
pub(crate) fn lambda_energy(grid: &GridSpec, h: &[Complex64], a: f64) -> f64 {
    weighted_energy(grid, h, &resolved_weights(grid, 2.0 * a))
}

/// `area · Σ w |h|^2` for a precomputed weight table.
pub(crate) fn weighted_energy(grid: &GridSpec, h: &[Complex64], w: &[f64]) -> f64 {
    grid.area() * h.iter().zip(w).map(|(c, w)| w * c.norm_sqr()).sum::<f64>()
}

/// Physical samples of one block together with its `L^p` norms.
pub(crate) struct BlockProbe {
    pub grid: GridSpec,
    pub j: i32,
    pub samples: Vec<f64>,
}

impl BlockProbe {
    pub fn new(f: &SpectralField, j: i32, fam: &DyadicFamily) -> Result<Self> {
        let b = fam.block(f, j)?;
        Ok(Self { grid: *f.grid(), j, samples: inverse_coeffs(f.grid(), b.coeffs()) })
    }

    pub fn is_zero(&self) -> bool {
        self.samples.iter().all(|v| *v == 0.0)
    }

    pub fn lp(&self, p: f64) -> Result<f64> {
        lp_norm_samples(&self.samples, p, self.grid.cell_area())
    }

    /// Spectrum of the power map.
    pub fn power_spectrum(&self, p: f64) -> Vec<Complex64> {
        forward_samples(&self.grid, &power_map(&self.samples, p))
    }

    /// `2^{2aj/p}‖Δ_j f‖_p`.
    pub fn scale(&self, p: f64, a: f64) -> Result<f64> {
        Ok((2.0 * a * self.j as f64 / p).exp2() * self.lp(p)?)
    }

    /// `‖Λ^a P_p(Δ_j f)‖_2^{2/p}` given the power spectrum.
    pub fn middle(&self, h: &[Complex64], p: f64, a: f64) -> f64 {
        lambda_energy(&self.grid, h, a).powf(1.0 / p)
    }

    /// `‖∇P_p(Δ_j f)‖_2^{2/p}` with physical-space derivatives and quadrature.
    pub fn gradient_middle(&self, h: &[Complex64], p: f64) -> f64 {
        let g = self.grid;
        let mut dx = vec![Complex64::new(0.0, 0.0); g.len()];
        let mut dy = dx.clone();
        for idx in 0..g.len() {
            if g.on_nyquist_line(idx) {
                continue;
            }
            let (x, y) = g.wavevector(idx);
            dx[idx] = h[idx] * Complex64::new(0.0, x);
            dy[idx] = h[idx] * Complex64::new(0.0, y);
        }
        let (gx, gy) = inverse_pair(&g, &dx, &dy);
        let e: f64 = gx.iter().zip(&gy).map(|(a, b)| a * a + b * b).sum::<f64>() * g.cell_area();
        e.powf(1.0 / p)
    }

    /// `p ∫ Λ^{2a}g · |g|^{p-2} g`.
    pub fn dissipation(&self, p: f64, a: f64) -> f64 {
        let g = self.grid;
        let lam = weighted_inverse(&g, &forward_samples(&g, &self.samples), 2.0 * a);
        let w = dual_power(&self.samples, p);
        p * g.cell_area() * lam.iter().zip(&w).map(|(x, y)| x * y).sum::<f64>()
    }
}

/// Physical samples of `Λ^b` applied to the spectrum `c` (resolved modes).
fn weighted_inverse(grid: &GridSpec, c: &[Complex64], b: f64) -> Vec<f64> {
    apply_weights(grid, c, &resolved_weights(grid, b))
}

pub(crate) fn apply_weights(grid: &GridSpec, c: &[Complex64], w: &[f64]) -> Vec<f64> {
    let lc: Vec<Complex64> = c.iter().zip(w).map(|(c, w)| c * w).collect();
    inverse_coeffs(grid, &lc)
}

/// Bernstein triple for `Δ_j f`: `middle = ‖Λ^a(|Δ_j f|^{p/2})‖_2^{2/p}`,
/// `lower = upper = 2^{2aj/p}‖Δ_j f‖_p`.
pub fn bernstein_triple(f: &SpectralField, j: i32, p: f64, a: f64, fam: &DyadicFamily) -> Result<Triple> {
    check_p(p, 2.0, false)?;
    check_unit("a", a, 0.0, 1.0)?;
    let probe = BlockProbe::new(f, j, fam)?;
    if probe.is_zero() {
        return Ok(Triple::ZERO);
    }
    let scale = probe.scale(p, a)?;
    let middle = probe.middle(&probe.power_spectrum(p), p, a);
    Ok(Triple { lower: scale, middle, upper: scale })
}

/// Gradient form of the `a = 1` triple: `middle = ‖∇(|Δ_j f|^{p/2})‖_2^{2/p}`.
pub fn prop31_triple(f: &SpectralField, j: i32, p: f64, fam: &DyadicFamily) -> Result<Triple> {
    check_p(p, 2.0, true)?;
    let probe = BlockProbe::new(f, j, fam)?;
    if probe.is_zero() {
        return Ok(Triple::ZERO);
    }
    let scale = probe.scale(p, 1.0)?;
    let middle = probe.gradient_middle(&probe.power_spectrum(p), p);
    Ok(Triple { lower: scale, middle, upper: scale })
}

/// Both sides of `∫|f|^{p-2} f Λ^s f ≥ (2/p) ∫ (Λ^{s/2}|f|^{p/2})^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositivityGap {
    pub lhs: f64,
    pub rhs: f64,
}

impl PositivityGap {
    pub fn gap(&self) -> f64 {
        self.lhs - self.rhs
    }

    pub fn scale(&self) -> f64 {
        self.lhs.abs().max(self.rhs.abs())
    }
}

pub fn positivity_gap(f: &SpectralField, s: f64, p: f64) -> Result<PositivityGap> {
    check_p(p, 2.0, false)?;
    check_unit("s", s, 0.0, 2.0)?;
    let g = *f.grid();
    let x = inverse_coeffs(&g, f.coeffs());
    let lam = weighted_inverse(&g, f.coeffs(), s);
    let w = dual_power(&x, p);
    let lhs = g.cell_area() * lam.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
    let rhs = 2.0 / p * lambda_energy(&g, &forward_samples(&g, &power_map(&x, p)), 0.5 * s);
    Ok(PositivityGap { lhs, rhs })
}

/// The three members `A >= B >= C` of the dissipation chain for `Δ_jθ`:
/// `A = p∫Λ^{2a}Δ_jθ |Δ_jθ|^{p-2}Δ_jθ`, `B = 2‖Λ^a(|Δ_jθ|^{p/2})‖_2^2` and
/// `C = 2 c^p 2^{2aj}‖Δ_jθ‖_p^p` with `c` the Bernstein lower constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Chain {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

pub fn dissipation_chain(theta: &SpectralField, j: i32, p: f64, a: f64, fam: &DyadicFamily, c_emp: f64) -> Result<Chain> {
    check_p(p, 2.0, false)?;
    if !(a > 0.0 && a <= 1.0) {
        return Err(Error::Parameter(format!("a = {a} must lie in (0, 1]")));
    }
    let probe = BlockProbe::new(theta, j, fam)?;
    if probe.is_zero() {
        return Ok(Chain { a: 0.0, b: 0.0, c: 0.0 });
    }
    chain_from_probe(&probe, &probe.power_spectrum(p), p, a, c_emp)
}

pub(crate) fn chain_from_probe(probe: &BlockProbe, h: &[Complex64], p: f64, a: f64, c_emp: f64) -> Result<Chain> {
    let big_a = probe.dissipation(p, a);
    let b = 2.0 * lambda_energy(&probe.grid, h, a);
    let c = chain_constant(c_emp, p) * probe.scale(p, a)?.powf(p);
    Ok(Chain { a: big_a, b, c })
}

/// Constant `c_p` of the chain's last link given the Bernstein constant:
/// `2 c^p`, so that `B >= c_p 2^{2aj}‖Δ_jθ‖_p^p`.
pub fn chain_constant(c_emp: f64, p: f64) -> f64 {
    2.0 * c_emp.powf(p)
}

/// `‖|z|^p‖_{Ḃ^s_{ℓ,2}} / (‖z‖_{Ḃ^0_{m,2}}^{p-1} ‖z‖_{Ḃ^s_{r,2}})`, the mean of
/// `|z|^p` being removed before the homogeneous norm is taken.
pub fn composition_ratio(z: &SpectralField, p: f64, s: f64, ell: f64, r: f64, m: f64, fam: &DyadicFamily) -> Result<f64> {
    check_p(p, 1.0, false)?;
    if !(ell > 1.0 && ell <= r && r.is_finite() && m > 1.0 && m.is_finite()) {
        return Err(Error::Parameter(format!("need 1 < ell <= r < inf and 1 < m < inf (ell {ell}, r {r}, m {m})")));
    }
    if ((1.0 / ell) - (1.0 / r + (p - 1.0) / m)).abs() > 1e-12 {
        return Err(Error::Parameter(format!("1/ell = {} but 1/r + (p-1)/m = {}", 1.0 / ell, 1.0 / r + (p - 1.0) / m)));
    }
    if !(s >= 0.0 && s < p.min(2.0)) {
        return Err(Error::Parameter(format!("s = {s} must lie in [0, min(p, 2))")));
    }
    if z.max_coeff() == 0.0 {
        return Ok(0.0);
    }
    let x = z.to_real();
    let fz = x.map(|v| v.abs().powf(p))?.forward().without_mean();
    let lhs = besov_norm(&fz, BesovIndex::homogeneous(s, ell, 2.0)?, fam)?;
    let rhs = besov_norm(z, BesovIndex::homogeneous(0.0, m, 2.0)?, fam)?.powf(p - 1.0)
        * besov_norm(z, BesovIndex::homogeneous(s, r, 2.0)?, fam)?;
    Ok(ratio(lhs, rhs))
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 && rhs == 0.0 {
        0.0
    } else {
        lhs / rhs
    }
}

fn ensure_solenoidal(u1: &SpectralField, u2: &SpectralField) -> Result<()> {
    let (res, scale) = divergence_residual(u1, u2)?;
    if res > 1e-12 * scale {
        return Err(Error::NotSolenoidal { residual: res / scale.max(f64::MIN_POSITIVE) });
    }
    Ok(())
}

/// Spectra of `u·∇Δ_j v` and `Δ_j(u·∇v)` for every block, products dealiased.
struct Transport {
    grid: GridSpec,
    u: (Vec<f64>, Vec<f64>),
    dv: (Vec<Complex64>, Vec<Complex64>),
    flux: Vec<Complex64>,
    rule: DealiasRule,
}

impl Transport {
    fn new(u1: &SpectralField, u2: &SpectralField, v: &SpectralField, rule: DealiasRule) -> Result<Self> {
        u1.grid().ensure_same(u2.grid())?;
        u1.grid().ensure_same(v.grid())?;
        ensure_solenoidal(u1, u2)?;
        let grid = *v.grid();
        let (d1, d2) = crate::spectral::gradient(v);
        let u = inverse_pair(&grid, u1.coeffs(), u2.coeffs());
        let (g1, g2) = inverse_pair(&grid, d1.coeffs(), d2.coeffs());
        let adv: Vec<f64> = (0..grid.len()).map(|i| u.0[i] * g1[i] + u.1[i] * g2[i]).collect();
        let flux = product_spectrum(&grid, &adv, rule);
        Ok(Self { grid, u, dv: (d1.into_coeffs(), d2.into_coeffs()), flux, rule })
    }

    /// Spectrum of `[u, Δ_j]·∇v`.
    fn commutator(&self, j: i32, fam: &DyadicFamily) -> Result<Vec<Complex64>> {
        let sym = fam.symbol(j)?;
        let b1: Vec<Complex64> = self.dv.0.iter().zip(sym).map(|(c, s)| c * s).collect();
        let b2: Vec<Complex64> = self.dv.1.iter().zip(sym).map(|(c, s)| c * s).collect();
        let (g1, g2) = inverse_pair(&self.grid, &b1, &b2);
        let adv: Vec<f64> = (0..self.grid.len()).map(|i| self.u.0[i] * g1[i] + self.u.1[i] * g2[i]).collect();
        let first = product_spectrum(&self.grid, &adv, self.rule);
        Ok(first.iter().zip(&self.flux).zip(sym).map(|((a, b), s)| a - b * s).collect())
    }
}

/// `[u, Δ_j]·∇v = u·∇Δ_j v - Δ_j(u·∇v)` for a solenoidal `u`.
pub fn commutator(u: (&SpectralField, &SpectralField), v: &SpectralField, j: i32, fam: &DyadicFamily, rule: DealiasRule) -> Result<RealField> {
    fam.grid().ensure_same(v.grid())?;
    let t = Transport::new(u.0, u.1, v, rule)?;
    let c = t.commutator(j, fam)?;
    RealField::new(t.grid, inverse_coeffs(&t.grid, &c))
}

/// Both sides of the static commutator bound
/// `‖2^{jσ}‖[u,Δ_j]·∇θ‖_p‖_{ℓ^q} <= C ‖u‖_{Ḃ^{σ+α}_{p,q}} ‖θ‖_{Ḃ^{σ+α}_{p,q}}`
/// with `u = R^⊥θ` and `σ = 2/p + 1 - 2α`.
pub fn commutator_sides(theta: &SpectralField, alpha: f64, p: f64, q: f64, fam: &DyadicFamily, rule: DealiasRule) -> Result<(f64, f64)> {
    let sigma = crate::besov::critical_sigma(alpha, p)?.sigma;
    let (u1, u2) = crate::spectral::riesz_velocity(theta);
    let t = Transport::new(&u1, &u2, theta, rule)?;
    let mut terms = Vec::with_capacity(fam.len());
    for j in fam.j_range() {
        let c = SpectralField::new(t.grid, t.commutator(j, fam)?)?;
        terms.push((j as f64 * sigma).exp2() * crate::besov::vector_lp_norm(&[&c], p)?);
    }
    let lhs = crate::besov::lq_sum(terms, q);
    let idx = BesovIndex::homogeneous(sigma + alpha, p, q)?;
    let rhs = vector_besov_norm(&[&u1, &u2], idx, fam)? * besov_norm(theta, idx, fam)?;
    Ok((lhs, rhs))
}

/// `‖uv‖_{B^s_{p,q}} / (‖u‖_p‖v‖_{B^{2/p+s}_{p,q}} + ‖v‖_p‖u‖_{B^{2/p+s}_{p,q}})`.
pub fn product_ratio_a1(u: &SpectralField, v: &SpectralField, s: f64, p: f64, q: f64, fam: &DyadicFamily, rule: DealiasRule) -> Result<f64> {
    check_p(p, 2.0, false)?;
    if !(s > -2.0 / p) {
        return Err(Error::Parameter(format!("s = {s} must exceed -2/p")));
    }
    let (ur, vr) = (u.to_real(), v.to_real());
    let uv = dealiased_product(&ur, &vr, rule)?.forward();
    let lhs = besov_norm(&uv, BesovIndex::inhomogeneous(s, p, q)?, fam)?;
    let hi = BesovIndex::inhomogeneous(2.0 / p + s, p, q)?;
    let rhs = ur.lp_norm(p)? * besov_norm(v, hi, fam)? + vr.lp_norm(p)? * besov_norm(u, hi, fam)?;
    Ok(ratio(lhs, rhs))
}
