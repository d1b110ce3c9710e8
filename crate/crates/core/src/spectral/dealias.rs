use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use super::field::{forward_samples, inverse_coeffs, RealField, SpectralField};
use super::grid::GridSpec;
use crate::error::{Error, Result};

/// Truncation applied to quadratic products computed on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum DealiasRule {
    /// Keep `|k_x|, |k_y| < n/3` (Orszag's rule).
    #[default]
    TwoThirds,
    /// No truncation.
    None,
}

impl DealiasRule {
    /// Largest retained lattice index per axis.
    pub fn cutoff(&self, n: usize) -> i64 {
        match self {
            DealiasRule::TwoThirds => ((n - 1) / 3) as i64,
            DealiasRule::None => (n / 2) as i64,
        }
    }

    pub fn keeps(&self, grid: &GridSpec, idx: usize) -> bool {
        let k = self.cutoff(grid.n());
        let (kx, ky) = grid.lattice(idx);
        kx.abs() <= k && ky.abs() <= k
    }

    /// 0/1 mask over the coefficient array.
    pub fn mask(&self, grid: &GridSpec) -> Vec<bool> {
        (0..grid.len()).map(|idx| self.keeps(grid, idx)).collect()
    }

    pub fn apply(&self, f: &SpectralField) -> SpectralField {
        let grid = *f.grid();
        let coeffs = f
            .coeffs()
            .iter()
            .enumerate()
            .map(|(idx, &c)| if self.keeps(&grid, idx) { c } else { Complex64::new(0.0, 0.0) })
            .collect();
        SpectralField::from_raw(grid, coeffs)
    }
}

impl fmt::Display for DealiasRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DealiasRule::TwoThirds => write!(f, "two-thirds"),
            DealiasRule::None => write!(f, "none"),
        }
    }
}

impl FromStr for DealiasRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two-thirds" | "2/3" => Ok(DealiasRule::TwoThirds),
            "none" => Ok(DealiasRule::None),
            other => Err(Error::Format(format!("unknown dealias rule '{other}'"))),
        }
    }
}

/// Pointwise product followed by spectral truncation.
pub fn dealiased_product(f: &RealField, g: &RealField, rule: DealiasRule) -> Result<RealField> {
    f.grid().ensure_same(g.grid())?;
    let grid = *f.grid();
    let prod: Vec<f64> = f.samples().iter().zip(g.samples()).map(|(a, b)| a * b).collect();
    Ok(RealField::from_raw(grid, truncate_samples(&grid, &prod, rule)))
}

/// Applies the truncation to physical samples.
pub(crate) fn truncate_samples(grid: &GridSpec, samples: &[f64], rule: DealiasRule) -> Vec<f64> {
    if rule == DealiasRule::None {
        return samples.to_vec();
    }
    let mut coeffs = forward_samples(grid, samples);
    for (idx, c) in coeffs.iter_mut().enumerate() {
        if !rule.keeps(grid, idx) {
            *c = Complex64::new(0.0, 0.0);
        }
    }
    inverse_coeffs(grid, &coeffs)
}

/// Truncated spectrum of a physical product, without returning to physical space.
pub(crate) fn product_spectrum(grid: &GridSpec, samples: &[f64], rule: DealiasRule) -> Vec<Complex64> {
    let mut coeffs = forward_samples(grid, samples);
    for (idx, c) in coeffs.iter_mut().enumerate() {
        if !rule.keeps(grid, idx) {
            *c = Complex64::new(0.0, 0.0);
        }
    }
    coeffs
}

/// Zero-pads (or truncates) a spectrum onto another grid over the same box.
pub fn resample(f: &SpectralField, target: GridSpec) -> Result<SpectralField> {
    let src = *f.grid();
    if (src.period() - target.period()).abs() > 0.0 {
        return Err(Error::GridMismatch {
            left: format!("period {}", src.period()),
            right: format!("period {}", target.period()),
        });
    }
    let half = (src.n().min(target.n()) / 2) as i64;
    let mut out = SpectralField::zeros(target);
    for idx in 0..src.len() {
        let (kx, ky) = src.lattice(idx);
        // Nyquist modes are dropped so the result stays Hermitian
        if kx.abs() >= half || ky.abs() >= half {
            continue;
        }
        out.coeffs_mut()[target.flat_index(kx, ky)] = f.coeffs()[idx];
    }
    Ok(out)
}

/// Exact product of two spectra, formed on a grid twice as fine and
/// truncated back to `rule`'s band on the original grid.
pub fn fine_grid_product(f: &SpectralField, g: &SpectralField, rule: DealiasRule) -> Result<SpectralField> {
    f.grid().ensure_same(g.grid())?;
    let coarse = *f.grid();
    let fine = coarse.refined();
    let a = resample(f, fine)?.inverse_raw();
    let b = resample(g, fine)?.inverse_raw();
    let prod: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
    let prod = SpectralField::from_raw(fine, forward_samples(&fine, &prod));
    Ok(rule.apply(&resample(&prod, coarse)?))
}
