use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Uniform `n x n` lattice on the periodic box `[0, period)^2`.
///
/// Samples and coefficients are stored row-major with `x` varying fastest:
/// `index = iy * n + ix`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    n: usize,
    period: f64,
}

impl GridSpec {
    pub fn new(n: usize, period: f64) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n = {n} must be a power of two and at least 8"
            )));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::InvalidGrid(format!("period = {period} must be positive")));
        }
        Ok(Self { n, period })
    }

    /// Grid on the `2π` box, where wavevectors are integers.
    pub fn periodic(n: usize) -> Result<Self> {
        Self::new(n, 2.0 * PI)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.period / self.n as f64
    }

    pub fn cell_area(&self) -> f64 {
        let h = self.spacing();
        h * h
    }

    pub fn area(&self) -> f64 {
        self.period * self.period
    }

    /// Factor converting lattice indices to physical wavenumbers, `2π / period`.
    pub fn wave_scale(&self) -> f64 {
        2.0 * PI / self.period
    }

    /// Signed lattice index for FFT position `i`; position `n/2` maps to `-n/2`.
    pub fn lattice_index(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// FFT position for a signed lattice index.
    pub fn position(&self, k: i64) -> usize {
        k.rem_euclid(self.n as i64) as usize
    }

    /// Signed lattice indices `(kx, ky)` of the coefficient stored at `idx`.
    pub fn lattice(&self, idx: usize) -> (i64, i64) {
        (self.lattice_index(idx % self.n), self.lattice_index(idx / self.n))
    }

    pub fn flat_index(&self, kx: i64, ky: i64) -> usize {
        self.position(ky) * self.n + self.position(kx)
    }

    /// Physical wavevector `ξ` at `idx`.
    pub fn wavevector(&self, idx: usize) -> (f64, f64) {
        let (kx, ky) = self.lattice(idx);
        let s = self.wave_scale();
        (s * kx as f64, s * ky as f64)
    }

    pub fn radius(&self, idx: usize) -> f64 {
        let (x, y) = self.wavevector(idx);
        x.hypot(y)
    }

    /// True on the rows/columns holding the `-n/2` Nyquist index, where odd
    /// symbols cannot be represented by a real field.
    pub fn on_nyquist_line(&self, idx: usize) -> bool {
        let half = (self.n / 2) as i64;
        let (kx, ky) = self.lattice(idx);
        kx == -half || ky == -half
    }

    pub fn nyquist_radius(&self) -> f64 {
        self.wave_scale() * (self.n / 2) as f64
    }

    /// Smallest nonzero lattice radius.
    pub fn min_radius(&self) -> f64 {
        self.wave_scale()
    }

    /// Physical coordinates of sample `idx`.
    pub fn point(&self, idx: usize) -> (f64, f64) {
        let h = self.spacing();
        ((idx % self.n) as f64 * h, (idx / self.n) as f64 * h)
    }

    pub(crate) fn ensure_same(&self, other: &GridSpec) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                left: format!("{}x{} period {}", self.n, self.n, self.period),
                right: format!("{}x{} period {}", other.n, other.n, other.period),
            })
        }
    }

    /// Same box at twice the resolution.
    pub fn refined(&self) -> GridSpec {
        GridSpec { n: self.n * 2, period: self.period }
    }

    /// Vector of radii `|ξ|` for every stored coefficient.
    pub fn radii(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.radius(i)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_or_odd_sizes() {
        assert!(GridSpec::periodic(4).is_err());
        assert!(GridSpec::periodic(24).is_err());
        assert!(GridSpec::new(16, -1.0).is_err());
        assert!(GridSpec::periodic(8).is_ok());
    }

    #[test]
    fn lattice_round_trip() {
        let g = GridSpec::periodic(16).unwrap();
        for idx in 0..g.len() {
            let (kx, ky) = g.lattice(idx);
            assert_eq!(g.flat_index(kx, ky), idx);
        }
        assert_eq!(g.lattice_index(8), -8);
        assert_eq!(g.nyquist_radius(), 8.0);
    }

    #[test]
    fn wavevectors_are_integers_on_two_pi_box() {
        let g = GridSpec::periodic(32).unwrap();
        let idx = g.flat_index(3, -5);
        let (x, y) = g.wavevector(idx);
        assert!((x - 3.0).abs() < 1e-14 && (y + 5.0).abs() < 1e-14);
    }
}
