//! Periodic-grid representation of real scalar fields and the Fourier
//! multipliers acting on them.

mod dealias;
mod fft;
mod field;
mod grid;
mod multiplier;
mod peak;

pub use dealias::{dealiased_product, fine_grid_product, resample, DealiasRule};
pub use field::{RealField, SpectralField};
pub use grid::GridSpec;
pub use multiplier::{apply_lambda, divergence_residual, gradient, riesz_velocity, Multiplier};
pub use peak::sup_norm;

pub(crate) use dealias::product_spectrum;
pub(crate) use field::{forward_samples, inverse_coeffs, inverse_pair, lp_norm_samples};

use crate::error::Result;

/// Forward transform. `RealField` rejects non-finite samples at construction.
pub fn forward_transform(f: &RealField) -> SpectralField {
    f.forward()
}

pub fn inverse_transform(f: &SpectralField) -> RealField {
    f.to_real()
}

/// `(Σ |f|^p · cell area)^{1/p}`, or the max norm for `p = ∞`.
pub fn lp_norm(f: &RealField, p: f64) -> Result<f64> {
    f.lp_norm(p)
}

#[cfg(test)]
mod tests;
