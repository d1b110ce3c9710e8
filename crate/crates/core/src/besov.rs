//! Besov norms built on the dyadic family, Chemin-Lerner time-space norms and
//! the critical regularity index of the dissipative QG equation.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::littlewood_paley::DyadicFamily;
use crate::spectral::{inverse_coeffs, inverse_pair, lp_norm_samples, GridSpec, SpectralField};

/// Selects `Ḃ^s_{p,q}` (homogeneous) or `B^s_{p,q}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesovIndex {
    pub s: f64,
    pub p: f64,
    pub q: f64,
    pub homogeneous: bool,
}

impl BesovIndex {
    pub fn new(s: f64, p: f64, q: f64, homogeneous: bool) -> Result<Self> {
        if !s.is_finite() {
            return Err(Error::Parameter(format!("regularity s = {s} must be finite")));
        }
        for (name, v) in [("p", p), ("q", q)] {
            if v.is_nan() || v < 1.0 {
                return Err(Error::Parameter(format!("{name} = {v} must lie in [1, inf]")));
            }
        }
        Ok(Self { s, p, q, homogeneous })
    }

    pub fn homogeneous(s: f64, p: f64, q: f64) -> Result<Self> {
        Self::new(s, p, q, true)
    }

    pub fn inhomogeneous(s: f64, p: f64, q: f64) -> Result<Self> {
        Self::new(s, p, q, false)
    }

    /// Dyadic weight `2^{js}`.
    pub fn weight(&self, j: i32) -> f64 {
        (j as f64 * self.s).exp2()
    }
}

/// `ℓ^q` norm of a nonnegative sequence; `q = ∞` gives the supremum.
pub fn lq_sum(values: impl IntoIterator<Item = f64>, q: f64) -> f64 {
    let v: Vec<f64> = values.into_iter().collect();
    let max = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if q.is_infinite() || max == 0.0 {
        return max;
    }
    if q == 1.0 {
        return v.iter().map(|x| x.abs()).sum();
    }
    max * v.iter().map(|x| (x.abs() / max).powf(q)).sum::<f64>().powf(1.0 / q)
}

/// `‖ |(g_1, …, g_m)| ‖_p` for a vector field given by its component spectra.
pub(crate) fn vector_lp_norm(components: &[&SpectralField], p: f64) -> Result<f64> {
    let grid = *components[0].grid();
    if p == 2.0 {
        let e: f64 = components.iter().map(|c| c.coeff_energy()).sum();
        return Ok((grid.area() * e).sqrt());
    }
    let mag = magnitude_samples(&grid, components);
    lp_norm_samples(&mag, p, grid.cell_area())
}

fn magnitude_samples(grid: &GridSpec, components: &[&SpectralField]) -> Vec<f64> {
    if components.len() == 1 {
        return inverse_coeffs(grid, components[0].coeffs());
    }
    let mut sq = vec![0.0; grid.len()];
    let mut add = |s: &[f64]| sq.iter_mut().zip(s).for_each(|(a, v)| *a += v * v);
    for pair in components.chunks(2) {
        if let [a, b] = pair {
            let (x, y) = inverse_pair(grid, a.coeffs(), b.coeffs());
            add(&x);
            add(&y);
        } else {
            add(&inverse_coeffs(grid, pair[0].coeffs()));
        }
    }
    sq.into_iter().map(f64::sqrt).collect()
}

/// Unweighted `‖Δ_j f‖_p` for every block of the family.
pub fn block_lp_norms(f: &SpectralField, p: f64, fam: &DyadicFamily) -> Result<Vec<(i32, f64)>> {
    vector_block_lp_norms(&[f], p, fam)
}

/// Block norms of a vector field, measured with the Euclidean magnitude.
pub fn vector_block_lp_norms(components: &[&SpectralField], p: f64, fam: &DyadicFamily) -> Result<Vec<(i32, f64)>> {
    if components.is_empty() {
        return Err(Error::Parameter("empty vector field".into()));
    }
    if p.is_nan() || p < 1.0 {
        return Err(Error::Parameter(format!("L^p exponent p = {p} must be >= 1")));
    }
    for c in components {
        fam.grid().ensure_same(c.grid())?;
    }
    let grid = *fam.grid();
    let blocked = |j: i32| -> Result<Vec<SpectralField>> {
        components.iter().map(|c| fam.block(c, j)).collect()
    };
    if p == 2.0 || components.len() > 1 {
        return fam
            .j_range()
            .map(|j| {
                let b = blocked(j)?;
                let refs: Vec<&SpectralField> = b.iter().collect();
                Ok((j, vector_lp_norm(&refs, p)?))
            })
            .collect();
    }
    // scalar, p != 2: invert two blocks per FFT
    let js: Vec<i32> = fam.j_range().collect();
    let mut out = Vec::with_capacity(js.len());
    for pair in js.chunks(2) {
        let a = fam.block(components[0], pair[0])?;
        if let Some(&jb) = pair.get(1) {
            let b = fam.block(components[0], jb)?;
            let (x, y) = inverse_pair(&grid, a.coeffs(), b.coeffs());
            out.push((pair[0], lp_norm_samples(&x, p, grid.cell_area())?));
            out.push((jb, lp_norm_samples(&y, p, grid.cell_area())?));
        } else {
            out.push((pair[0], vector_lp_norm(&[&a], p)?));
        }
    }
    Ok(out)
}

/// Per-block data behind one Besov norm: raw `‖Δ_j f‖_p` for the blocks the
/// index sums over, and `‖S_0 f‖_p` for inhomogeneous indices.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSequence {
    pub index: BesovIndex,
    pub low: Option<f64>,
    pub blocks: Vec<(i32, f64)>,
}

impl BlockSequence {
    /// `(j, 2^{js}‖Δ_j f‖_p)`.
    pub fn weighted(&self) -> Vec<(i32, f64)> {
        self.blocks.iter().map(|&(j, b)| (j, self.index.weight(j) * b)).collect()
    }

    pub fn norm(&self) -> f64 {
        self.low.unwrap_or(0.0) + lq_sum(self.weighted().into_iter().map(|(_, w)| w), self.index.q)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("# format_version: 1\nj,block_norm,weighted\n");
        if let Some(low) = self.low {
            let _ = writeln!(out, "low,{low:.17e},{low:.17e}");
        }
        for (&(j, b), (_, w)) in self.blocks.iter().zip(self.weighted()) {
            let _ = writeln!(out, "{j},{b:.17e},{w:.17e}");
        }
        out
    }
}

/// Block sequence of a (possibly vector-valued) field for `idx`.
///
/// Homogeneous indices reject fields whose zero mode is not negligible.
pub fn vector_block_sequence(components: &[&SpectralField], idx: BesovIndex, fam: &DyadicFamily) -> Result<BlockSequence> {
    if idx.homogeneous {
        for c in components {
            c.ensure_mean_zero()?;
        }
    }
    let mut blocks = vector_block_lp_norms(components, idx.p, fam)?;
    let low = if idx.homogeneous {
        None
    } else {
        blocks.retain(|&(j, _)| j >= 0);
        let lows = components.iter().map(|c| fam.low_pass(c, 0)).collect::<Result<Vec<_>>>()?;
        let refs: Vec<&SpectralField> = lows.iter().collect();
        Some(vector_lp_norm(&refs, idx.p)?)
    };
    Ok(BlockSequence { index: idx, low, blocks })
}

pub fn block_sequence(f: &SpectralField, idx: BesovIndex, fam: &DyadicFamily) -> Result<BlockSequence> {
    vector_block_sequence(&[f], idx, fam)
}

/// `‖f‖_{Ḃ^s_{p,q}}` or `‖f‖_{B^s_{p,q}} = ‖S_0 f‖_p + ‖2^{js}‖Δ_j f‖_p‖_{ℓ^q(j>=0)}`.
pub fn besov_norm(f: &SpectralField, idx: BesovIndex, fam: &DyadicFamily) -> Result<f64> {
    Ok(block_sequence(f, idx, fam)?.norm())
}

pub fn vector_besov_norm(components: &[&SpectralField], idx: BesovIndex, fam: &DyadicFamily) -> Result<f64> {
    Ok(vector_block_sequence(components, idx, fam)?.norm())
}

/// Scaling-critical regularity `σ = 2/p + 1 - 2α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalIndex {
    pub alpha: f64,
    pub p: f64,
    pub sigma: f64,
}

impl CriticalIndex {
    pub fn index(&self, q: f64) -> Result<BesovIndex> {
        BesovIndex::homogeneous(self.sigma, self.p, q)
    }
}

/// `p = ∞` is accepted here (σ = 1 - 2α) but rejected by the solvers.
pub fn critical_sigma(alpha: f64, p: f64) -> Result<CriticalIndex> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Parameter(format!("alpha = {alpha} must lie in (0, 1]")));
    }
    if p.is_nan() || p < 2.0 {
        return Err(Error::Parameter(format!("p = {p} must lie in [2, inf)")));
    }
    Ok(CriticalIndex { alpha, p, sigma: 2.0 / p + 1.0 - 2.0 * alpha })
}

/// Dyadic rescaling `θ(x) ↦ 2^{2α-1} θ(2x)` transplanted to the torus.
///
/// On the box `θ(2·)` has the same `L^p` norm as `θ`, whereas on the plane it
/// picks up `2^{-2/p}`; that Jacobian is applied explicitly so the critical
/// norm is preserved. Modes whose image leaves the resolved band are dropped.
pub fn critical_rescale(f: &SpectralField, alpha: f64, p: f64) -> Result<SpectralField> {
    critical_sigma(alpha, p)?;
    let grid = *f.grid();
    let jac = if p.is_infinite() { 0.0 } else { 2.0 / p };
    let factor = (2.0 * alpha - 1.0 - jac).exp2();
    let half = (grid.n() / 2) as i64;
    let mut out = SpectralField::zeros(grid);
    for idx in 0..grid.len() {
        let (kx, ky) = grid.lattice(idx);
        if (2 * kx).abs() >= half || (2 * ky).abs() >= half {
            continue;
        }
        out.coeffs_mut()[grid.flat_index(2 * kx, 2 * ky)] = f.coeffs()[idx] * factor;
    }
    Ok(out)
}

/// Running Chemin-Lerner integrals `∫ ‖Δ_j f(τ)‖_p^r dτ` (suprema when
/// `r = ∞`), with the time integral taken by the trapezoidal rule over the
/// samples handed in.
#[derive(Debug, Clone, PartialEq)]
pub struct CheminLerner {
    index: BesovIndex,
    r: f64,
    grid: GridSpec,
    js: Vec<i32>,
    integrals: Vec<f64>,
    last: Vec<f64>,
    low_integral: f64,
    low_last: f64,
    elapsed: f64,
}

impl CheminLerner {
    pub fn start(index: BesovIndex, r: f64, fam: &DyadicFamily, f0: &SpectralField) -> Result<Self> {
        Self::from_sequence(r, *fam.grid(), &block_sequence(f0, index, fam)?)
    }

    /// Starts from block norms computed elsewhere (e.g. by a trajectory recorder).
    pub fn from_sequence(r: f64, grid: GridSpec, seq: &BlockSequence) -> Result<Self> {
        if r.is_nan() || r < 1.0 {
            return Err(Error::Parameter(format!("time exponent r = {r} must lie in [1, inf]")));
        }
        let last: Vec<f64> = seq.blocks.iter().map(|&(_, b)| b).collect();
        let low = seq.low.unwrap_or(0.0);
        let sup = r.is_infinite();
        Ok(Self {
            index: seq.index,
            r,
            grid,
            js: seq.blocks.iter().map(|&(j, _)| j).collect(),
            integrals: if sup { last.clone() } else { vec![0.0; last.len()] },
            last,
            low_integral: if sup { low } else { 0.0 },
            low_last: low,
            elapsed: 0.0,
        })
    }

    pub fn index(&self) -> BesovIndex {
        self.index
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn elapsed(&self) -> f64 {
        self.elapsed
    }

    pub fn accumulate(&mut self, f: &SpectralField, fam: &DyadicFamily, dt: f64) -> Result<()> {
        self.grid.ensure_same(fam.grid())?;
        let seq = block_sequence(f, self.index, fam)?;
        self.accumulate_sequence(&seq, dt)
    }

    pub fn accumulate_sequence(&mut self, seq: &BlockSequence, dt: f64) -> Result<()> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::Parameter(format!("time step dt = {dt} must be positive")));
        }
        if seq.index != self.index || seq.blocks.len() != self.js.len() || seq.blocks.iter().zip(&self.js).any(|(b, j)| b.0 != *j) {
            return Err(Error::Parameter("block sequence does not match the accumulator's index or family".into()));
        }
        let r = self.r;
        let step = |acc: &mut f64, prev: f64, cur: f64| {
            if r.is_infinite() {
                *acc = acc.max(cur);
            } else {
                *acc += 0.5 * dt * (prev.powf(r) + cur.powf(r));
            }
        };
        for (k, &(_, b)) in seq.blocks.iter().enumerate() {
            step(&mut self.integrals[k], self.last[k], b);
            self.last[k] = b;
        }
        if let Some(low) = seq.low {
            step(&mut self.low_integral, self.low_last, low);
            self.low_last = low;
        }
        self.elapsed += dt;
        Ok(())
    }

    /// Appends an accumulator covering the following time interval.
    pub fn merge(&mut self, later: &CheminLerner) -> Result<()> {
        if later.index != self.index || later.r != self.r || later.js != self.js || later.grid != self.grid {
            return Err(Error::Parameter("cannot merge accumulators with different indices".into()));
        }
        let sup = self.r.is_infinite();
        let join = |a: &mut f64, b: f64| if sup { *a = a.max(b) } else { *a += b };
        self.integrals.iter_mut().zip(&later.integrals).for_each(|(a, &b)| join(a, b));
        join(&mut self.low_integral, later.low_integral);
        self.last.clone_from(&later.last);
        self.low_last = later.low_last;
        self.elapsed += later.elapsed;
        Ok(())
    }

    /// `(j, (∫ ‖Δ_j f‖_p^r)^{1/r})`, unweighted.
    pub fn per_block(&self) -> Vec<(i32, f64)> {
        self.js.iter().zip(&self.integrals).map(|(&j, &i)| (j, self.root(i))).collect()
    }

    fn root(&self, v: f64) -> f64 {
        if self.r.is_infinite() {
            v
        } else {
            v.powf(1.0 / self.r)
        }
    }

    /// `‖f‖_{L̃^r(Ḃ^s_{p,q})}`, plus the `L^r(L^p)` norm of `S_0 f` for
    /// inhomogeneous indices.
    pub fn finalize(&self) -> f64 {
        let low = if self.index.homogeneous { 0.0 } else { self.root(self.low_integral) };
        low + lq_sum(self.per_block().into_iter().map(|(j, v)| self.index.weight(j) * v), self.index.q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::littlewood_paley::make_family;
    use crate::spectral::{gradient, RealField};
    use crate::test_util::{random_band_limited, rel_diff};
    use proptest::prelude::*;

    fn fam(n: usize) -> DyadicFamily {
        make_family(GridSpec::periodic(n).unwrap()).unwrap()
    }

    fn cos6(g: GridSpec) -> SpectralField {
        // |ξ| = 6 sits where φ(6/4) = 1 and both neighbours vanish
        RealField::from_fn(g, |x, _| (6.0 * x).cos()).unwrap().forward()
    }

    #[test]
    fn single_block_norm_for_every_q() {
        let f = fam(64);
        let c = cos6(*f.grid());
        for p in [2.0, 3.0, 4.0, f64::INFINITY] {
            let lp = c.to_real().lp_norm(p).unwrap();
            for q in [1.0, 2.0, 5.0, f64::INFINITY] {
                let idx = BesovIndex::homogeneous(0.7, p, q).unwrap();
                let got = besov_norm(&c, idx, &f).unwrap();
                assert!(rel_diff(got, 4f64.powf(0.7) * lp) < 1e-12, "p {p} q {q}");
            }
        }
    }

    #[test]
    fn zero_field_and_mean_rejection() {
        let f = fam(32);
        let g = *f.grid();
        let idx = BesovIndex::homogeneous(1.0, 2.0, 2.0).unwrap();
        assert_eq!(besov_norm(&SpectralField::zeros(g), idx, &f).unwrap(), 0.0);
        let with_mean = RealField::from_fn(g, |x, _| 1.0 + x.cos()).unwrap().forward();
        assert!(matches!(besov_norm(&with_mean, idx, &f), Err(Error::NonZeroMean { .. })));
        let inh = BesovIndex::inhomogeneous(1.0, 2.0, 2.0).unwrap();
        assert!(besov_norm(&with_mean, inh, &f).unwrap() > 0.0);
        assert!(BesovIndex::new(0.0, 0.5, 2.0, true).is_err());
    }

    #[test]
    fn l2_equivalence_on_random_fields() {
        let f = fam(64);
        let idx = BesovIndex::homogeneous(0.0, 2.0, 2.0).unwrap();
        for seed in 0..20 {
            let x = random_band_limited(*f.grid(), 21, seed);
            let ratio = besov_norm(&x, idx, &f).unwrap() / x.l2_norm();
            assert!((0.5..=2.0).contains(&ratio), "{ratio}");
        }
    }

    #[test]
    fn inhomogeneous_norm_of_constant() {
        let f = fam(32);
        let g = *f.grid();
        let idx = BesovIndex::inhomogeneous(1.0, 2.0, 2.0).unwrap();
        let one = RealField::constant(g, 1.0).forward();
        assert!(rel_diff(besov_norm(&one, idx, &f).unwrap(), g.area().sqrt()) < 1e-14);
    }

    #[test]
    fn block_csv_layout() {
        let f = fam(32);
        let seq = block_sequence(&cos6(*f.grid()), BesovIndex::homogeneous(1.0, 2.0, 2.0).unwrap(), &f).unwrap();
        let csv = seq.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "# format_version: 1");
        assert_eq!(lines[1], "j,block_norm,weighted");
        assert_eq!(lines.len(), 2 + f.len());
    }

    #[test]
    fn critical_sigma_examples() {
        assert_eq!(critical_sigma(0.5, 2.0).unwrap().sigma, 1.0);
        assert_eq!(critical_sigma(0.25, 2.0).unwrap().sigma, 1.5);
        assert_eq!(critical_sigma(0.5, f64::INFINITY).unwrap().sigma, 0.0);
        assert!(critical_sigma(0.0, 2.0).is_err());
        assert!(critical_sigma(0.5, 1.5).is_err());
    }

    #[test]
    fn chemin_lerner_constant_in_time() {
        let f = fam(64);
        let c = cos6(*f.grid());
        let idx = BesovIndex::homogeneous(1.0, 2.0, 2.0).unwrap();
        let norm = besov_norm(&c, idx, &f).unwrap();
        let mut one = CheminLerner::start(idx, 1.0, &f, &c).unwrap();
        let mut sup = CheminLerner::start(idx, f64::INFINITY, &f, &c).unwrap();
        for _ in 0..8 {
            one.accumulate(&c, &f, 0.25).unwrap();
            sup.accumulate(&c, &f, 0.25).unwrap();
        }
        assert!(rel_diff(one.finalize(), 2.0 * norm) < 1e-13);
        assert!(rel_diff(sup.finalize(), norm) < 1e-13);
        assert!(one.accumulate(&c, &f, 0.0).is_err());
        assert!(one.accumulate(&c, &fam(32), 0.1).is_err());
    }

    #[test]
    fn chemin_lerner_sup_tracks_the_peak() {
        let f = fam(64);
        let c = cos6(*f.grid());
        let idx = BesovIndex::homogeneous(0.0, 2.0, 1.0).unwrap();
        let mut acc = CheminLerner::start(idx, f64::INFINITY, &f, &c.scaled(0.5)).unwrap();
        acc.accumulate(&c.scaled(2.0), &f, 0.1).unwrap();
        acc.accumulate(&c.scaled(0.1), &f, 0.1).unwrap();
        assert!(rel_diff(acc.finalize(), 2.0 * c.l2_norm()) < 1e-13);
    }

    #[test]
    fn chemin_lerner_exponential_decay() {
        let f = fam(64);
        let c = cos6(*f.grid());
        let idx = BesovIndex::homogeneous(0.5, 2.0, 2.0).unwrap();
        let (lambda, t_end) = (3.0_f64, 1.0);
        let exact = (1.0 - (-lambda * t_end).exp()) / lambda * besov_norm(&c, idx, &f).unwrap();
        let mut errs = Vec::new();
        for steps in [50, 100] {
            let dt = t_end / steps as f64;
            let mut acc = CheminLerner::start(idx, 1.0, &f, &c).unwrap();
            for k in 1..=steps {
                acc.accumulate(&c.scaled((-lambda * k as f64 * dt).exp()), &f, dt).unwrap();
            }
            errs.push((acc.finalize() - exact).abs());
        }
        assert!(errs[0] < 1e-3 * exact);
        let order = (errs[0] / errs[1]).log2();
        assert!((order - 2.0).abs() < 0.05, "{order}");
    }

    #[test]
    fn merge_equals_single_accumulation() {
        let f = fam(32);
        let g = *f.grid();
        let idx = BesovIndex::inhomogeneous(0.5, 2.0, 2.0).unwrap();
        let xs: Vec<SpectralField> = (0..6).map(|s| random_band_limited(g, 10, s)).collect();
        for r in [1.0, 2.0, f64::INFINITY] {
            let mut whole = CheminLerner::start(idx, r, &f, &xs[0]).unwrap();
            xs[1..].iter().for_each(|x| whole.accumulate(x, &f, 0.1).unwrap());
            let mut a = CheminLerner::start(idx, r, &f, &xs[0]).unwrap();
            xs[1..3].iter().for_each(|x| a.accumulate(x, &f, 0.1).unwrap());
            let mut b = CheminLerner::start(idx, r, &f, &xs[2]).unwrap();
            xs[3..].iter().for_each(|x| b.accumulate(x, &f, 0.1).unwrap());
            a.merge(&b).unwrap();
            assert!(rel_diff(a.finalize(), whole.finalize()) < 1e-13);
        }
    }

    #[test]
    fn minkowski_ordering_of_time_space_norms() {
        let f = fam(64);
        let g = *f.grid();
        let x = random_band_limited(g, 21, 77);
        let decay = crate::spectral::Multiplier::from_fn("heat", g, |a, b| num_complex::Complex64::new(-(a * a + b * b).sqrt(), 0.0));
        let dt = 0.02;
        let states: Vec<SpectralField> = (0..=50)
            .map(|k| {
                let t = k as f64 * dt;
                let sym: Vec<f64> = decay.symbol().iter().map(|s| (s.re * t).exp()).collect();
                x.mul_symbol(&sym)
            })
            .collect();
        for (r, q) in [(1.0, 2.0), (2.0, 1.0), (1.0, 1.0)] {
            let idx = BesovIndex::homogeneous(0.5, 2.0, q).unwrap();
            let mut tilde = CheminLerner::start(idx, r, &f, &states[0]).unwrap();
            states[1..].iter().for_each(|s| tilde.accumulate(s, &f, dt).unwrap());
            // L^r_t(Ḃ) by the same trapezoid rule
            let norms: Vec<f64> = states.iter().map(|s| besov_norm(s, idx, &f).unwrap()).collect();
            let lr = norms.windows(2).map(|w| 0.5 * dt * (w[0].powf(r) + w[1].powf(r))).sum::<f64>().powf(1.0 / r);
            let lt = tilde.finalize();
            if r <= q {
                assert!(lt <= lr * (1.0 + 1e-12), "r {r} q {q}: {lt} vs {lr}");
            }
            if r >= q {
                assert!(lt >= lr * (1.0 - 1e-12), "r {r} q {q}: {lt} vs {lr}");
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn q_monotonicity(seed in 0u64..500, s in -1.0f64..2.0, p in prop::sample::select(vec![2.0, 3.0, 4.0])) {
            let f = fam(32);
            let x = random_band_limited(*f.grid(), 10, seed);
            for hom in [true, false] {
                let mut prev = f64::INFINITY;
                for q in [1.0, 1.5, 2.0, 4.0, f64::INFINITY] {
                    let n = besov_norm(&x, BesovIndex::new(s, p, q, hom).unwrap(), &f).unwrap();
                    prop_assert!(n <= prev * (1.0 + 1e-14));
                    prev = n;
                }
            }
        }

        #[test]
        fn interpolation_inequality(seed in 0u64..500, s1 in -1.0f64..2.0, s2 in -1.0f64..2.0, th in 0.0f64..1.0) {
            let f = fam(32);
            let x = random_band_limited(*f.grid(), 10, seed);
            for q in [1.0, 2.0, f64::INFINITY] {
                let n = |s: f64| besov_norm(&x, BesovIndex::homogeneous(s, 2.0, q).unwrap(), &f).unwrap();
                let lhs = n(th * s1 + (1.0 - th) * s2);
                let rhs = n(s1).powf(th) * n(s2).powf(1.0 - th);
                prop_assert!(lhs <= rhs * (1.0 + 1e-12));
            }
        }

        #[test]
        fn derivative_equivalence(seed in 0u64..500, s in -0.5f64..1.5, p in prop::sample::select(vec![2.0, 4.0])) {
            let f = fam(64);
            let x = random_band_limited(*f.grid(), 21, seed);
            let (dx, dy) = gradient(&x);
            let lhs = vector_besov_norm(&[&dx, &dy], BesovIndex::homogeneous(s, p, 2.0).unwrap(), &f).unwrap();
            let rhs = besov_norm(&x, BesovIndex::homogeneous(s + 1.0, p, 2.0).unwrap(), &f).unwrap();
            let ratio = lhs / rhs;
            prop_assert!((0.25..=4.0).contains(&ratio), "ratio {}", ratio);
        }

        #[test]
        fn critical_norm_is_rescaling_invariant(seed in 0u64..500, alpha in 0.1f64..1.0, p in prop::sample::select(vec![2.0, 3.0, 4.0])) {
            let f = fam(128);
            // spectrum inside blocks 1..=3 so the image stays clear of the top block
            let x = random_band_limited(*f.grid(), 8, seed);
            let x = &x - &f.low_pass(&x, 1).unwrap();
            let idx = critical_sigma(alpha, p).unwrap().index(2.0).unwrap();
            let before = besov_norm(&x, idx, &f).unwrap();
            let after = besov_norm(&critical_rescale(&x, alpha, p).unwrap(), idx, &f).unwrap();
            prop_assert!(rel_diff(before, after) < 0.01, "{} vs {}", before, after);
        }
    }
}
