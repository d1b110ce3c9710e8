//! Seeded ensembles of random band-limited fields.
//!
//! Member `i` draws from its own ChaCha stream (`seed`, stream `i`), and the
//! lattice is walked in a fixed order that does not depend on the grid size,
//! so the same member can be rebuilt on a finer grid and a parallel map
//! returns exactly what a serial loop would.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::spectral::{GridSpec, SpectralField};

/// Radial envelope of the random spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumShape {
    Flat,
    /// Amplitude `1/|ξ|`.
    Decaying,
    /// Spectrum confined to the annulus `2^j · [3/4, 8/3]`.
    SingleBlock(i32),
    /// Cycles flat, decaying and a random single block by member index.
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub seed: u64,
    pub count: usize,
    /// Modes with `k_min <= |ξ| <= k_max` (lattice radius) may be populated.
    pub k_min: f64,
    pub k_max: f64,
    pub shape: SpectrumShape,
}

impl Ensemble {
    pub fn new(seed: u64, count: usize, k_min: f64, k_max: f64, shape: SpectrumShape) -> Result<Self> {
        if !(k_min >= 0.0 && k_max >= k_min.max(1.0)) {
            return Err(Error::Parameter(format!("invalid radial band [{k_min}, {k_max}]")));
        }
        Ok(Self { seed, count, k_min, k_max, shape })
    }

    fn rng(&self, index: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        rng
    }

    /// Member `index` on `grid`, normalized to `‖f‖_2 = 1` (unless empty).
    pub fn member(&self, grid: GridSpec, index: usize) -> Result<SpectralField> {
        let kk = self.k_max.ceil() as i64;
        if kk >= (grid.n() / 2) as i64 {
            return Err(Error::BandLimit { k_max: self.k_max, limit: (grid.n() / 2 - 1) as f64 });
        }
        let mut rng = self.rng(index);
        let shape = match self.shape {
            SpectrumShape::Mixed => match index % 3 {
                0 => SpectrumShape::Flat,
                1 => SpectrumShape::Decaying,
                _ => {
                    let lo = (self.k_min.max(1.0) / 0.75).log2().ceil() as i32;
                    let hi = (self.k_max * 3.0 / 8.0).log2().floor() as i32;
                    if hi >= lo {
                        SpectrumShape::SingleBlock(rng.random_range(lo..=hi))
                    } else {
                        SpectrumShape::Flat
                    }
                }
            },
            s => s,
        };
        let (lo, hi) = match shape {
            SpectrumShape::SingleBlock(j) => {
                let s = (j as f64).exp2();
                (self.k_min.max(0.75 * s), self.k_max.min(8.0 / 3.0 * s))
            }
            _ => (self.k_min, self.k_max),
        };
        let scale = grid.wave_scale();
        let mut f = SpectralField::zeros(grid);
        for ky in 0..=kk {
            for kx in -kk..=kk {
                if ky == 0 && kx <= 0 {
                    continue;
                }
                let r = ((kx * kx + ky * ky) as f64).sqrt();
                if r < lo || r > hi {
                    continue;
                }
                let amp = match shape {
                    SpectrumShape::Decaying => 1.0 / (r * scale),
                    _ => 1.0,
                } * (0.5 + rng.random::<f64>());
                let c = Complex64::from_polar(amp, TAU * rng.random::<f64>());
                f.coeffs_mut()[grid.flat_index(kx, ky)] = c;
                f.coeffs_mut()[grid.flat_index(-kx, -ky)] = c.conj();
            }
        }
        let norm = f.l2_norm();
        Ok(if norm > 0.0 { f.scaled(1.0 / norm) } else { f })
    }

    /// Ordered parallel map over the members.
    pub fn map<T: Send>(&self, grid: GridSpec, f: impl Fn(usize, SpectralField) -> Result<T> + Sync) -> Result<Vec<T>> {
        (0..self.count).into_par_iter().map(|i| f(i, self.member(grid, i)?)).collect()
    }

    pub fn members(&self, grid: GridSpec) -> Result<Vec<SpectralField>> {
        self.map(grid, |_, f| Ok(f))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::resample;

    #[test]
    fn same_seed_same_members() {
        let g = GridSpec::periodic(32).unwrap();
        let e = Ensemble::new(5, 6, 1.0, 10.0, SpectrumShape::Mixed).unwrap();
        assert_eq!(e.members(g).unwrap(), e.members(g).unwrap());
        let serial: Vec<_> = (0..6).map(|i| e.member(g, i).unwrap()).collect();
        assert_eq!(serial, e.members(g).unwrap());
        let other = Ensemble { seed: 6, ..e };
        assert_ne!(e.member(g, 0).unwrap(), other.member(g, 0).unwrap());
    }

    #[test]
    fn members_are_real_normalized_and_band_limited() {
        let g = GridSpec::periodic(64).unwrap();
        let e = Ensemble::new(1, 9, 2.0, 20.0, SpectrumShape::Mixed).unwrap();
        for f in e.members(g).unwrap() {
            assert!((f.l2_norm() - 1.0).abs() < 1e-12);
            assert_eq!(f.hermitian_defect(), 0.0);
            assert_eq!(f.mean(), 0.0);
            for (idx, c) in f.coeffs().iter().enumerate() {
                let r = g.radius(idx);
                if c.norm() > 0.0 {
                    assert!((2.0..=20.0).contains(&r));
                }
            }
        }
    }

    #[test]
    fn members_do_not_depend_on_grid_size() {
        let e = Ensemble::new(3, 4, 1.0, 9.0, SpectrumShape::Decaying).unwrap();
        let (a, b) = (GridSpec::periodic(32).unwrap(), GridSpec::periodic(64).unwrap());
        for i in 0..4 {
            let coarse = resample(&e.member(a, i).unwrap(), b).unwrap();
            assert!((&coarse - &e.member(b, i).unwrap()).max_coeff() < 1e-15);
        }
    }

    #[test]
    fn band_limit_is_checked() {
        let e = Ensemble::new(3, 1, 1.0, 16.0, SpectrumShape::Flat).unwrap();
        assert!(e.member(GridSpec::periodic(32).unwrap(), 0).is_err());
        assert!(Ensemble::new(0, 1, 5.0, 2.0, SpectrumShape::Flat).is_err());
    }
}
