//! Helpers shared by unit tests.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::spectral::{GridSpec, SpectralField};

/// Random mean-zero real field with lattice modes `1 <= |k|_∞ <= kmax`.
pub fn random_band_limited(grid: GridSpec, kmax: i64, seed: u64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = SpectralField::zeros(grid);
    for ky in 0..=kmax {
        for kx in -kmax..=kmax {
            if ky == 0 && kx <= 0 {
                continue;
            }
            let c = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let i = grid.flat_index(kx, ky);
            let j = grid.flat_index(-kx, -ky);
            f.coeffs_mut()[i] = c;
            f.coeffs_mut()[j] = c.conj();
        }
    }
    f
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}
