use num_complex::Complex64;

use super::field::SpectralField;
use super::grid::GridSpec;
use crate::error::{Error, Result};

/// A Fourier multiplier tabulated on one grid: `(m f)^(ξ) = m(ξ) f^(ξ)`.
#[derive(Debug, Clone)]
pub struct Multiplier {
    name: String,
    grid: GridSpec,
    symbol: Vec<Complex64>,
}

impl Multiplier {
    pub fn from_fn(name: impl Into<String>, grid: GridSpec, symbol: impl Fn(f64, f64) -> Complex64) -> Self {
        let symbol = (0..grid.len())
            .map(|idx| {
                let (x, y) = grid.wavevector(idx);
                symbol(x, y)
            })
            .collect();
        Self { name: name.into(), grid, symbol }
    }

    /// `Λ^a` with symbol `|ξ|^a`. The zero mode is kept only for `a = 0`.
    pub fn lambda(grid: GridSpec, a: f64) -> Result<Self> {
        if !(a.is_finite() && a >= 0.0) {
            return Err(Error::Parameter(format!("Λ exponent a = {a} must be >= 0")));
        }
        let symbol = lambda_symbol(&grid, a).into_iter().map(|s| Complex64::new(s, 0.0)).collect();
        Ok(Self { name: format!("Lambda^{a}"), grid, symbol })
    }

    /// `(-Δ)^β = Λ^{2β}`.
    pub fn fractional_laplacian(grid: GridSpec, beta: f64) -> Result<Self> {
        let mut m = Self::lambda(grid, 2.0 * beta)?;
        m.name = format!("(-Laplacian)^{beta}");
        Ok(m)
    }

    /// Riesz transform `R_k` with symbol `-i ξ_k / |ξ|`, `k ∈ {1, 2}`.
    /// Zero at `ξ = 0` and on the Nyquist line of axis `k`.
    pub fn riesz(grid: GridSpec, axis: usize) -> Result<Self> {
        let symbol = riesz_symbol(&grid, axis)?;
        Ok(Self { name: format!("R_{axis}"), grid, symbol })
    }

    /// `∂_k` with symbol `i ξ_k`, zero on the Nyquist line of axis `k`.
    pub fn derivative(grid: GridSpec, axis: usize) -> Result<Self> {
        let symbol = derivative_symbol(&grid, axis)?;
        Ok(Self { name: format!("d_{axis}"), grid, symbol })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn symbol(&self) -> &[Complex64] {
        &self.symbol
    }

    pub fn apply(&self, f: &SpectralField) -> Result<SpectralField> {
        self.grid.ensure_same(f.grid())?;
        let coeffs = f.coeffs().iter().zip(&self.symbol).map(|(c, m)| c * m).collect();
        SpectralField::new(self.grid, coeffs)
    }
}

pub(crate) fn lambda_symbol(grid: &GridSpec, a: f64) -> Vec<f64> {
    (0..grid.len())
        .map(|idx| {
            if a == 0.0 {
                1.0
            } else if idx == 0 {
                0.0
            } else {
                grid.radius(idx).powf(a)
            }
        })
        .collect()
}

fn check_axis(axis: usize) -> Result<()> {
    if axis == 1 || axis == 2 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("axis {axis} must be 1 or 2")))
    }
}

fn on_axis_nyquist(grid: &GridSpec, idx: usize, axis: usize) -> bool {
    let half = (grid.n() / 2) as i64;
    let (kx, ky) = grid.lattice(idx);
    if axis == 1 {
        kx == -half
    } else {
        ky == -half
    }
}

pub(crate) fn derivative_symbol(grid: &GridSpec, axis: usize) -> Result<Vec<Complex64>> {
    check_axis(axis)?;
    Ok((0..grid.len())
        .map(|idx| {
            if on_axis_nyquist(grid, idx, axis) {
                return Complex64::new(0.0, 0.0);
            }
            let (x, y) = grid.wavevector(idx);
            let xi = if axis == 1 { x } else { y };
            Complex64::new(0.0, xi)
        })
        .collect())
}

pub(crate) fn riesz_symbol(grid: &GridSpec, axis: usize) -> Result<Vec<Complex64>> {
    check_axis(axis)?;
    Ok((0..grid.len())
        .map(|idx| {
            if idx == 0 || on_axis_nyquist(grid, idx, axis) {
                return Complex64::new(0.0, 0.0);
            }
            let (x, y) = grid.wavevector(idx);
            let xi = if axis == 1 { x } else { y };
            Complex64::new(0.0, -xi / x.hypot(y))
        })
        .collect())
}

/// `Λ^a f`. The zero mode is removed when `a > 0`.
pub fn apply_lambda(f: &SpectralField, a: f64) -> Result<SpectralField> {
    if !(a.is_finite() && a >= 0.0) {
        return Err(Error::Parameter(format!("Λ exponent a = {a} must be >= 0")));
    }
    if a == 0.0 {
        return Ok(f.clone());
    }
    Ok(f.mul_symbol(&lambda_symbol(f.grid(), a)))
}

/// QG velocity `u = R^⊥θ = (-R_2 θ, R_1 θ)`.
///
/// Both components vanish at `ξ = 0` and on both Nyquist lines, so the pair
/// is exactly divergence-free on the lattice.
pub fn riesz_velocity(theta: &SpectralField) -> (SpectralField, SpectralField) {
    let grid = *theta.grid();
    let mut u1 = Vec::with_capacity(grid.len());
    let mut u2 = Vec::with_capacity(grid.len());
    for (idx, c) in theta.coeffs().iter().enumerate() {
        if idx == 0 || grid.on_nyquist_line(idx) {
            u1.push(Complex64::new(0.0, 0.0));
            u2.push(Complex64::new(0.0, 0.0));
            continue;
        }
        let (x, y) = grid.wavevector(idx);
        let r = x.hypot(y);
        // -R_2: symbol i ξ_2/|ξ| ; R_1: symbol -i ξ_1/|ξ|
        u1.push(c * Complex64::new(0.0, y / r));
        u2.push(c * Complex64::new(0.0, -x / r));
    }
    (SpectralField::from_raw(grid, u1), SpectralField::from_raw(grid, u2))
}

/// Spectral divergence `ξ_1 u_1^ + ξ_2 u_2^`, maximum modulus over the lattice,
/// alongside the matching scale `max |ξ| |u^|`.
pub fn divergence_residual(u1: &SpectralField, u2: &SpectralField) -> Result<(f64, f64)> {
    u1.grid().ensure_same(u2.grid())?;
    let grid = *u1.grid();
    let mut residual: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for idx in 0..grid.len() {
        let (x, y) = grid.wavevector(idx);
        let a = u1.coeffs()[idx];
        let b = u2.coeffs()[idx];
        residual = residual.max((a * x + b * y).norm());
        scale = scale.max(x.hypot(y) * a.norm().hypot(b.norm()));
    }
    Ok((residual, scale))
}

/// Spectral gradient `(∂_1 f, ∂_2 f)`.
pub fn gradient(f: &SpectralField) -> (SpectralField, SpectralField) {
    let grid = *f.grid();
    let d1 = derivative_symbol(&grid, 1).expect("axis 1");
    let d2 = derivative_symbol(&grid, 2).expect("axis 2");
    let g1 = f.coeffs().iter().zip(&d1).map(|(c, m)| c * m).collect();
    let g2 = f.coeffs().iter().zip(&d2).map(|(c, m)| c * m).collect();
    (SpectralField::from_raw(grid, g1), SpectralField::from_raw(grid, g2))
}
