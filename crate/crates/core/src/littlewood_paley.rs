//! Dyadic partition of unity and the frequency-localization operators
//! `Δ_j`, `S_j`, plus Bony's paraproduct decomposition.
//!
//! The low-frequency profile `χ` equals 1 on `r <= 3/4`, vanishes on
//! `r >= 4/3` and is built from the bump primitive `h(t) = exp(-1/t)` in
//! between. The annulus profile is `φ(r) = χ(r/2) - χ(r)`, which is supported
//! in `[3/4, 8/3]`, and both telescoping identities hold by construction.
//!
//! On a finite lattice the dyadic range is truncated to `[j_min, j_max]`.
//! The bottom block carries `Σ_{j <= j_min} φ_j` and the top block carries
//! `Σ_{j >= j_max} φ_j`, so `Σ_j Δ_j f = f - mean(f)` holds exactly.

use std::fmt::Write as _;
use std::ops::RangeInclusive;

use crate::error::{Error, Result};
use crate::spectral::{inverse_coeffs, product_spectrum, DealiasRule, GridSpec, RealField, SpectralField};

const INNER: f64 = 3.0 / 4.0;
const OUTER: f64 = 4.0 / 3.0;

fn bump(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// Smooth radial cutoff: 1 on `[0, 3/4]`, 0 on `[4/3, ∞)`, monotone between.
pub fn chi(r: f64) -> f64 {
    if r <= INNER {
        1.0
    } else if r >= OUTER {
        0.0
    } else {
        let t = (r - INNER) / (OUTER - INNER);
        let a = bump(1.0 - t);
        a / (a + bump(t))
    }
}

/// Annulus profile `φ(r) = χ(r/2) - χ(r)`, supported in `[3/4, 8/3]`.
pub fn phi(r: f64) -> f64 {
    chi(0.5 * r) - chi(r)
}

fn pow2(j: i32) -> f64 {
    2f64.powi(j)
}

/// The dyadic family tabulated on one grid.
#[derive(Debug, Clone)]
pub struct DyadicFamily {
    grid: GridSpec,
    j_min: i32,
    j_max: i32,
    radii: Vec<f64>,
    symbols: Vec<Vec<f64>>,
}

/// The pieces `Δ_j f` together with the low-frequency part `S_0 f`.
#[derive(Debug, Clone)]
pub struct BlockSet {
    pub blocks: Vec<(i32, SpectralField)>,
    pub low: SpectralField,
}

impl BlockSet {
    /// `Σ_j Δ_j f`.
    pub fn homogeneous_sum(&self) -> SpectralField {
        let grid = *self.low.grid();
        self.blocks.iter().fold(SpectralField::zeros(grid), |acc, (_, b)| &acc + b)
    }

    /// `S_0 f + Σ_{j >= 0} Δ_j f`.
    pub fn inhomogeneous_sum(&self) -> SpectralField {
        self.blocks
            .iter()
            .filter(|(j, _)| *j >= 0)
            .fold(self.low.clone(), |acc, (_, b)| &acc + b)
    }
}

/// Builds the family for `grid`.
///
/// `j_max` is the largest index with `2^j · 8/3` at or below the Nyquist
/// radius; `j_min` is the smallest index whose annulus reaches the lowest
/// nonzero lattice radius (`-1` on the `2π` box, since `φ(2) = χ(1) > 0`).
pub fn make_family(grid: GridSpec) -> Result<DyadicFamily> {
    let nyq = grid.nyquist_radius();
    let j_max = (nyq * 3.0 / 8.0).log2().floor() as i32;
    let j_min = (3.0 * grid.min_radius() / 8.0).log2().floor() as i32 + 1;
    if j_max - j_min + 1 < 3 {
        return Err(Error::InvalidGrid(format!(
            "{}x{} grid hosts only {} dyadic blocks (need 3)",
            grid.n(),
            grid.n(),
            (j_max - j_min + 1).max(0)
        )));
    }
    let radii = grid.radii();
    let mut family = DyadicFamily { grid, j_min, j_max, radii, symbols: Vec::new() };
    family.symbols = (j_min..=j_max)
        .map(|j| family.radii.iter().map(|&r| family.block_symbol(j, r)).collect())
        .collect();
    Ok(family)
}

impl DyadicFamily {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn j_min(&self) -> i32 {
        self.j_min
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    pub fn j_range(&self) -> RangeInclusive<i32> {
        self.j_min..=self.j_max
    }

    pub fn len(&self) -> usize {
        (self.j_max - self.j_min + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Multiplier of `Δ_j` at radius `r`, boundary blocks included.
    pub fn block_symbol(&self, j: i32, r: f64) -> f64 {
        if r == 0.0 {
            return 0.0;
        }
        let x = r / pow2(j);
        if j == self.j_min {
            chi(0.5 * x)
        } else if j == self.j_max {
            1.0 - chi(x)
        } else {
            phi(x)
        }
    }

    /// Multiplier of `S_j` at radius `r`: `mean + Σ_{k<j} Δ_k`.
    pub fn low_symbol(&self, j: i32, r: f64) -> f64 {
        if r == 0.0 || j > self.j_max {
            1.0
        } else if j <= self.j_min {
            0.0
        } else {
            chi(r / pow2(j))
        }
    }

    fn check(&self, j: i32) -> Result<()> {
        if self.j_range().contains(&j) {
            Ok(())
        } else {
            Err(Error::BlockOutOfRange { j, j_min: self.j_min, j_max: self.j_max })
        }
    }

    /// Tabulated multiplier of `Δ_j` over the coefficient array.
    pub fn symbol(&self, j: i32) -> Result<&[f64]> {
        self.check(j)?;
        Ok(&self.symbols[(j - self.j_min) as usize])
    }

    pub fn low_symbol_table(&self, j: i32) -> Vec<f64> {
        self.radii.iter().map(|&r| self.low_symbol(j, r)).collect()
    }

    fn ensure_grid(&self, f: &SpectralField) -> Result<()> {
        self.grid.ensure_same(f.grid())
    }

    /// `Δ_j f`.
    pub fn block(&self, f: &SpectralField, j: i32) -> Result<SpectralField> {
        self.ensure_grid(f)?;
        Ok(f.mul_symbol(self.symbol(j)?))
    }

    /// `Δ̃_j f = (Δ_{j-1} + Δ_j + Δ_{j+1}) f`, with out-of-range neighbours dropped.
    pub fn block_tilde(&self, f: &SpectralField, j: i32) -> Result<SpectralField> {
        self.check(j)?;
        self.ensure_grid(f)?;
        let sym: Vec<f64> = (0..self.grid.len())
            .map(|i| {
                ((j - 1)..=(j + 1))
                    .filter(|k| self.j_range().contains(k))
                    .map(|k| self.symbols[(k - self.j_min) as usize][i])
                    .sum()
            })
            .collect();
        Ok(f.mul_symbol(&sym))
    }

    /// `S_j f`.
    pub fn low_pass(&self, f: &SpectralField, j: i32) -> Result<SpectralField> {
        if j < self.j_min {
            return Err(Error::BlockOutOfRange { j, j_min: self.j_min, j_max: self.j_max });
        }
        self.ensure_grid(f)?;
        Ok(f.mul_symbol(&self.low_symbol_table(j)))
    }

    pub fn blocks(&self, f: &SpectralField) -> Result<BlockSet> {
        self.ensure_grid(f)?;
        let blocks = self
            .j_range()
            .map(|j| Ok((j, self.block(f, j)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(BlockSet { blocks, low: self.low_pass(f, 0.max(self.j_min))? })
    }

    /// Largest deviation of `Σ_j block_symbol(j, r)` from 1 over the nonzero
    /// lattice radii.
    pub fn homogeneous_partition_defect(&self) -> f64 {
        (1..self.grid.len())
            .map(|i| {
                let s: f64 = self.symbols.iter().map(|t| t[i]).sum();
                (s - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Largest deviation of `χ(r) + Σ_{j>=0} φ(2^{-j} r)` from 1 on the lattice
    /// (untruncated profiles, summed until the terms vanish).
    pub fn inhomogeneous_partition_defect(&self) -> f64 {
        self.radii
            .iter()
            .map(|&r| {
                let mut s = chi(r);
                let mut j = 0;
                while pow2(j) * INNER < r.max(1.0) * 2.0 {
                    s += phi(r / pow2(j));
                    j += 1;
                }
                (s - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    /// CSV dump of `(r, χ(r), φ(r))` at `samples` radii on `[0, r_max]`.
    pub fn profile_csv(samples: usize, r_max: f64) -> String {
        let mut out = String::from("# format_version: 1\nr,chi,phi\n");
        for i in 0..samples {
            let r = r_max * i as f64 / (samples.max(2) - 1) as f64;
            let _ = writeln!(out, "{r:.12e},{:.17e},{:.17e}", chi(r), phi(r));
        }
        out
    }
}

/// Output of [`bony_decompose`]: `uv = T_u v + T_v u + R(u, v)`.
#[derive(Debug, Clone)]
pub struct BonyParts {
    pub t_uv: RealField,
    pub t_vu: RealField,
    pub remainder: RealField,
}

impl BonyParts {
    pub fn sum(&self) -> RealField {
        let s = self
            .t_uv
            .samples()
            .iter()
            .zip(self.t_vu.samples())
            .zip(self.remainder.samples())
            .map(|((a, b), c)| a + b + c)
            .collect();
        RealField::new(*self.t_uv.grid(), s).expect("finite parts")
    }
}

/// Bony's decomposition `uv = T_u v + T_v u + R(u, v)` with
/// `T_u v = Σ_j S_{j-1} u Δ_j v` and `R(u, v) = Σ_j Δ_j u Δ̃_j v`.
///
/// Zero modes ride along in `S_{j-1}` and the product of the two means is
/// routed into the remainder. All products are truncated with `rule`, so the
/// three parts add up to the dealiased product `uv`.
pub fn bony_decompose(u: &RealField, v: &RealField, fam: &DyadicFamily, rule: DealiasRule) -> Result<BonyParts> {
    u.grid().ensure_same(v.grid())?;
    fam.grid.ensure_same(u.grid())?;
    let grid = *u.grid();
    let uh = u.forward();
    let vh = v.forward();
    let physical = |f: &SpectralField| inverse_coeffs(&grid, f.coeffs());

    let u_blocks = fam.j_range().map(|j| fam.block(&uh, j).map(|b| physical(&b))).collect::<Result<Vec<_>>>()?;
    let v_blocks = fam.j_range().map(|j| fam.block(&vh, j).map(|b| physical(&b))).collect::<Result<Vec<_>>>()?;

    let mut t_uv = vec![0.0; grid.len()];
    let mut t_vu = vec![0.0; grid.len()];
    let mut rem = vec![0.0; grid.len()];
    for (k, j) in fam.j_range().enumerate() {
        let su = physical(&fam.low_pass(&uh, j - 1).unwrap_or_else(|_| mean_only(&uh)));
        let sv = physical(&fam.low_pass(&vh, j - 1).unwrap_or_else(|_| mean_only(&vh)));
        for i in 0..grid.len() {
            t_uv[i] += su[i] * v_blocks[k][i];
            t_vu[i] += sv[i] * u_blocks[k][i];
        }
        for vb in &v_blocks[k.saturating_sub(1)..=(k + 1).min(fam.len() - 1)] {
            for i in 0..grid.len() {
                rem[i] += u_blocks[k][i] * vb[i];
            }
        }
    }
    let means = uh.mean() * vh.mean();
    rem.iter_mut().for_each(|r| *r += means);

    let finish = |s: Vec<f64>| RealField::new(grid, inverse_coeffs(&grid, &product_spectrum(&grid, &s, rule)));
    Ok(BonyParts { t_uv: finish(t_uv)?, t_vu: finish(t_vu)?, remainder: finish(rem)? })
}

fn mean_only(f: &SpectralField) -> SpectralField {
    let mut out = SpectralField::zeros(*f.grid());
    out.coeffs_mut()[0] = f.coeffs()[0];
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{dealiased_product, resample};
    use crate::test_util::random_band_limited;

    fn fam(n: usize) -> DyadicFamily {
        make_family(GridSpec::periodic(n).unwrap()).unwrap()
    }

    #[test]
    fn profiles_have_the_stated_supports() {
        for i in 0..=4000 {
            let r = 4.0 * i as f64 / 4000.0;
            let (c, p) = (chi(r), phi(r));
            assert!((0.0..=1.0).contains(&c) && (0.0..=1.0).contains(&p));
            if r >= 4.0 / 3.0 {
                assert_eq!(c, 0.0);
            }
            if r <= 0.75 || r >= 8.0 / 3.0 {
                assert_eq!(p, 0.0, "phi({r})");
            }
        }
    }

    #[test]
    fn partition_checks_at_small_radii() {
        // only j = 0 contributes at r = 1 since phi(1/2) = 0
        assert!((chi(1.0) + phi(1.0) - 1.0).abs() < 1e-15);
        assert_eq!(phi(0.5), 0.0);
        assert_eq!(chi(2.0), 0.0);
        assert!((phi(2.0) + phi(1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn index_range_on_256_grid() {
        let f = fam(256);
        // 2^5 * 8/3 ≈ 85 <= 128 < 2^6 * 8/3
        assert_eq!(f.j_max(), 5);
        assert_eq!(f.j_min(), -1);
        assert!(make_family(GridSpec::periodic(8).unwrap()).is_err());
        assert_eq!(fam(16).len(), 3);
    }

    #[test]
    fn partition_of_unity_on_lattice() {
        let f = fam(256);
        assert!(f.homogeneous_partition_defect() <= 1e-12);
        assert!(f.inhomogeneous_partition_defect() <= 1e-12);
    }

    #[test]
    fn block_of_cos_two_x() {
        let f = fam(64);
        let g = *f.grid();
        let c = RealField::from_fn(g, |x, _| (2.0 * x).cos()).unwrap().forward();
        for j in f.j_range() {
            let b = f.block(&c, j).unwrap();
            let amp = b.coeff(2, 0).re / 0.5;
            let want = if j == f.j_max() { f.block_symbol(j, 2.0) } else { phi(2.0 / pow2(j)) };
            assert!((amp - want).abs() < 1e-15);
            if j != 0 && j != 1 {
                assert!(b.max_coeff() < 1e-15, "j = {j}");
            }
        }
        assert!(f.block(&c, 10).is_err());
    }

    #[test]
    fn quasi_orthogonality_is_exact() {
        let f = fam(128);
        let x = random_band_limited(*f.grid(), 63, 9);
        for j in f.j_range() {
            for k in f.j_range() {
                if (j - k).abs() >= 2 {
                    let jk = f.block(&f.block(&x, k).unwrap(), j).unwrap();
                    assert_eq!(jk.max_coeff(), 0.0);
                }
            }
        }
    }

    #[test]
    fn low_pass_examples() {
        let f = fam(64);
        let g = *f.grid();
        let c = RealField::from_fn(g, |x, _| (2.0 * x).cos()).unwrap().forward();
        assert!((&f.low_pass(&c, 3).unwrap() - &c).max_coeff() < 1e-16);
        assert!(f.low_pass(&c, 0).unwrap().max_coeff() < 1e-15);
        let x = random_band_limited(g, 31, 4);
        let top = f.low_pass(&x, f.j_max() + 1).unwrap();
        assert!((&top - &x).max_coeff() <= 1e-12 * x.max_coeff());
        assert!(f.low_pass(&x, f.j_min() - 1).is_err());
    }

    #[test]
    fn low_pass_is_mean_plus_lower_blocks() {
        let f = fam(128);
        let mut x = random_band_limited(*f.grid(), 63, 21);
        x.coeffs_mut()[0] = num_complex::Complex64::new(0.7, 0.0);
        for j in f.j_min()..=f.j_max() + 1 {
            let mut sum = mean_only(&x);
            for k in f.j_min()..j {
                sum = &sum + &f.block(&x, k).unwrap();
            }
            let s = f.low_pass(&x, j).unwrap();
            assert!((&s - &sum).max_coeff() <= 1e-12 * x.max_coeff(), "j = {j}");
        }
    }

    #[test]
    fn reconstruction_is_exact() {
        let f = fam(128);
        let mut x = random_band_limited(*f.grid(), 64, 2);
        x.coeffs_mut()[0] = num_complex::Complex64::new(-1.5, 0.0);
        let set = f.blocks(&x).unwrap();
        let hom = set.homogeneous_sum();
        assert!((&hom - &x.without_mean()).max_coeff() <= 1e-12 * x.max_coeff());
        let inh = set.inhomogeneous_sum();
        assert!((&inh - &x).max_coeff() <= 1e-12 * x.max_coeff());
    }

    #[test]
    fn bony_of_zero_is_zero() {
        let f = fam(32);
        let g = *f.grid();
        let v = random_band_limited(g, 10, 1).to_real();
        let parts = bony_decompose(&RealField::zeros(g), &v, &f, DealiasRule::TwoThirds).unwrap();
        assert_eq!(parts.t_uv.max_abs(), 0.0);
        assert_eq!(parts.t_vu.max_abs(), 0.0);
        assert_eq!(parts.remainder.max_abs(), 0.0);
    }

    #[test]
    fn bony_single_mode_lands_in_remainder() {
        let f = fam(128);
        let g = *f.grid();
        let u = RealField::from_fn(g, |x, _| (16.0 * x).cos()).unwrap();
        let parts = bony_decompose(&u, &u, &f, DealiasRule::TwoThirds).unwrap();
        assert!(parts.t_uv.max_abs() < 1e-15);
        assert!(parts.t_vu.max_abs() < 1e-15);
        let prod = dealiased_product(&u, &u, DealiasRule::TwoThirds).unwrap();
        let err = parts.remainder.samples().iter().zip(prod.samples()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-14);
    }

    #[test]
    fn bony_sum_matches_fine_grid_product() {
        let f = fam(64);
        let g = *f.grid();
        let rule = DealiasRule::TwoThirds;
        let k = rule.cutoff(64);
        let mut u = random_band_limited(g, k, 31);
        u.coeffs_mut()[0] = num_complex::Complex64::new(0.4, 0.0);
        let v = random_band_limited(g, k, 32);
        let parts = bony_decompose(&u.to_real(), &v.to_real(), &f, rule).unwrap();
        let fine = g.refined();
        let uf = resample(&u, fine).unwrap().to_real();
        let vf = resample(&v, fine).unwrap().to_real();
        let exact: Vec<f64> = uf.samples().iter().zip(vf.samples()).map(|(a, b)| a * b).collect();
        let exact = rule.apply(&resample(&RealField::new(fine, exact).unwrap().forward(), g).unwrap()).to_real();
        let got = parts.sum();
        let err = got.samples().iter().zip(exact.samples()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err <= 1e-12 * exact.max_abs());
    }
}
