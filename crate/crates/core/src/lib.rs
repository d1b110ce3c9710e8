//! Pseudo-spectral solver for the two-dimensional dissipative
//! quasi-geostrophic equation with fractional dissipation, together with a
//! Littlewood-Paley / Besov analysis toolkit used to check frequency-localized
//! estimates numerically on periodic grids.

pub mod besov;
pub mod ensemble;
pub mod lab;
pub mod error;
pub mod io;
pub mod littlewood_paley;
pub mod solver;
pub mod spectral;
pub mod wellposedness;

#[cfg(test)]
mod test_util;

pub use error::{Error, Result};
