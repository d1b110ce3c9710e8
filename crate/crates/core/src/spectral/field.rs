use num_complex::Complex64;
use std::ops::{Add, Sub};

use super::fft;
use super::grid::GridSpec;
use crate::error::{Error, Result};

/// Real scalar field sampled on a periodic grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    grid: GridSpec,
    samples: Vec<f64>,
}

/// Fourier coefficients of a real field.
///
/// Normalization: `f(x) = Σ_ξ c(ξ) e^{i ξ·x}`, so `c(ξ)` is the Fourier-series
/// coefficient and `∫ |f|^2 dx = period^2 Σ |c(ξ)|^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
}

impl RealField {
    pub fn new(grid: GridSpec, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} samples, got {}",
                grid.len(),
                samples.len()
            )));
        }
        if let Some((index, &value)) = samples.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(Self { grid, samples })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self { grid, samples: vec![0.0; grid.len()] }
    }

    pub fn constant(grid: GridSpec, value: f64) -> Self {
        Self { grid, samples: vec![value; grid.len()] }
    }

    /// Samples `f(x, y)` at the grid points.
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let samples = (0..grid.len())
            .map(|i| {
                let (x, y) = grid.point(i);
                f(x, y)
            })
            .collect();
        Self::new(grid, samples)
    }

    pub(crate) fn from_raw(grid: GridSpec, samples: Vec<f64>) -> Self {
        debug_assert_eq!(samples.len(), grid.len());
        Self { grid, samples }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, a: f64) -> RealField {
        Self::from_raw(self.grid, self.samples.iter().map(|v| a * v).collect())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<RealField> {
        Self::new(self.grid, self.samples.iter().map(|&v| f(v)).collect())
    }

    /// `L^p` norm by uniform Riemann quadrature; `p = ∞` gives the max norm.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        lp_norm_samples(&self.samples, p, self.grid.cell_area())
    }

    /// `∫ f g dx` by uniform quadrature.
    pub fn inner(&self, other: &RealField) -> Result<f64> {
        self.grid.ensure_same(&other.grid)?;
        Ok(dot(&self.samples, &other.samples) * self.grid.cell_area())
    }

    pub fn forward(&self) -> SpectralField {
        SpectralField::from_real(self)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn lp_norm_samples(samples: &[f64], p: f64, cell_area: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::Parameter(format!("L^p exponent p = {p} must be >= 1")));
    }
    if p.is_infinite() {
        return Ok(samples.iter().fold(0.0, |m, v| m.max(v.abs())));
    }
    let max = samples.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if max == 0.0 {
        return Ok(0.0);
    }
    // scale by the max to keep |f|^p in range for large p
    let sum: f64 = if p == 2.0 {
        samples.iter().map(|v| (v / max) * (v / max)).sum()
    } else {
        samples.iter().map(|v| (v.abs() / max).powf(p)).sum()
    };
    Ok(max * (sum * cell_area).powf(1.0 / p))
}

impl SpectralField {
    pub fn new(grid: GridSpec, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        Ok(Self { grid, coeffs })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self { grid, coeffs: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    pub(crate) fn from_raw(grid: GridSpec, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(coeffs.len(), grid.len());
        Self { grid, coeffs }
    }

    /// Forward transform. Samples of a `RealField` are finite by construction.
    pub fn from_real(f: &RealField) -> Self {
        let grid = f.grid;
        let mut data: Vec<Complex64> = f.samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft::plan(grid.n()).forward(&mut data);
        let norm = 1.0 / grid.len() as f64;
        data.iter_mut().for_each(|c| *c *= norm);
        Self { grid, coeffs: data }
    }

    /// Inverse transform; the imaginary residue of round-off is discarded.
    pub fn to_real(&self) -> RealField {
        RealField::from_raw(self.grid, self.inverse_raw())
    }

    pub(crate) fn inverse_raw(&self) -> Vec<f64> {
        let mut data = self.coeffs.clone();
        fft::plan(self.grid.n()).inverse(&mut data);
        data.into_iter().map(|c| c.re).collect()
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient at the signed lattice wavevector `(kx, ky)`.
    pub fn coeff(&self, kx: i64, ky: i64) -> Complex64 {
        self.coeffs[self.grid.flat_index(kx, ky)]
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    /// Copy with the zero mode removed.
    pub fn without_mean(&self) -> SpectralField {
        let mut out = self.clone();
        out.coeffs[0] = Complex64::new(0.0, 0.0);
        out
    }

    /// `Σ |c|^2` over all coefficients.
    pub fn coeff_energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `‖f‖_2` through Plancherel.
    pub fn l2_norm(&self) -> f64 {
        (self.grid.area() * self.coeff_energy()).sqrt()
    }

    /// Whether the zero mode is negligible against the rest of the spectrum.
    pub fn is_mean_zero(&self) -> bool {
        let c0 = self.coeffs[0].norm();
        c0 <= 1e-10 * self.coeff_energy().sqrt() || c0 < 1e-300
    }

    pub fn ensure_mean_zero(&self) -> Result<()> {
        if self.is_mean_zero() {
            Ok(())
        } else {
            Err(Error::NonZeroMean { mean: self.mean() })
        }
    }

    pub fn scaled(&self, a: f64) -> SpectralField {
        Self::from_raw(self.grid, self.coeffs.iter().map(|c| c * a).collect())
    }

    /// Pointwise product with a real symbol table.
    pub fn mul_symbol(&self, symbol: &[f64]) -> SpectralField {
        debug_assert_eq!(symbol.len(), self.coeffs.len());
        Self::from_raw(self.grid, self.coeffs.iter().zip(symbol).map(|(c, s)| c * s).collect())
    }

    /// Largest violation of Hermitian symmetry `c(-ξ) = conj c(ξ)`.
    pub fn hermitian_defect(&self) -> f64 {
        let g = self.grid;
        (0..g.len())
            .map(|idx| {
                let (kx, ky) = g.lattice(idx);
                let partner = g.flat_index(-kx, -ky);
                (self.coeffs[idx] - self.coeffs[partner].conj()).norm()
            })
            .fold(0.0, f64::max)
    }

    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        assert_eq!(self.grid, rhs.grid, "grid mismatch in spectral addition");
        SpectralField::from_raw(
            self.grid,
            self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect(),
        )
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        assert_eq!(self.grid, rhs.grid, "grid mismatch in spectral subtraction");
        SpectralField::from_raw(
            self.grid,
            self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect(),
        )
    }
}

/// Inverse-transforms two Hermitian spectra with a single complex FFT by
/// packing them as `a + i b`.
pub(crate) fn inverse_pair(grid: &GridSpec, a: &[Complex64], b: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
    let i = Complex64::new(0.0, 1.0);
    let mut data: Vec<Complex64> = a.iter().zip(b).map(|(x, y)| x + i * y).collect();
    fft::plan(grid.n()).inverse(&mut data);
    data.into_iter().map(|c| (c.re, c.im)).unzip()
}

/// Forward transform of real samples into normalized coefficients.
pub(crate) fn forward_samples(grid: &GridSpec, samples: &[f64]) -> Vec<Complex64> {
    let mut data: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft::plan(grid.n()).forward(&mut data);
    let norm = 1.0 / grid.len() as f64;
    data.iter_mut().for_each(|c| *c *= norm);
    data
}

pub(crate) fn inverse_coeffs(grid: &GridSpec, coeffs: &[Complex64]) -> Vec<f64> {
    let mut data = coeffs.to_vec();
    fft::plan(grid.n()).inverse(&mut data);
    data.into_iter().map(|c| c.re).collect()
}
