//! Ensemble-driven verification suites. Every suite is a deterministic
//! function of its [`SuiteConfig`]; members are evaluated in parallel and
//! collected in member order.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::{RatioReport, Sample};
use super::{
    chain_constant, commutator, commutator_sides, composition_ratio, dual_power, lambda_energy, product_ratio_a1,
    apply_weights, resolved_weights, weighted_energy, weighted_inverse, BlockProbe,
};
use crate::ensemble::{Ensemble, SpectrumShape};
use crate::error::{Error, Result};
use crate::littlewood_paley::{bony_decompose, make_family, DyadicFamily};
use crate::spectral::{fine_grid_product, DealiasRule, GridSpec, SpectralField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Bernstein,
    Positivity,
    Dissipation,
    Composition,
    Product,
    Commutator,
    LpIdentities,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Bernstein,
        Suite::Positivity,
        Suite::Dissipation,
        Suite::Composition,
        Suite::Product,
        Suite::Commutator,
        Suite::LpIdentities,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Bernstein => "bernstein",
            Suite::Positivity => "positivity",
            Suite::Dissipation => "dissipation",
            Suite::Composition => "composition",
            Suite::Product => "product",
            Suite::Commutator => "commutator",
            Suite::LpIdentities => "lp-identities",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown suite '{s}'")))
    }
}

/// Parameters of one suite run. Unused fields are ignored by a given suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub n: usize,
    pub count: usize,
    pub seed: u64,
    pub p: Vec<f64>,
    /// Derivative orders `a` (Bernstein, dissipation) or `α` (commutator).
    pub alpha: Vec<f64>,
    pub s: Vec<f64>,
    pub q: f64,
    pub j_min: i32,
    pub j_max: i32,
}

impl SuiteConfig {
    pub fn defaults(suite: Suite) -> Self {
        let base = SuiteConfig {
            n: 256,
            count: 100,
            seed: 1,
            p: vec![2.0, 3.0, 4.0, 6.0, 8.0],
            alpha: vec![0.0, 0.1, 0.25, 0.5, 0.75, 1.0],
            s: vec![],
            q: 2.0,
            j_min: 1,
            j_max: 4,
        };
        match suite {
            Suite::Bernstein => base,
            Suite::Dissipation => SuiteConfig { alpha: vec![0.1, 0.25, 0.5, 0.75, 1.0], ..base },
            Suite::Positivity => SuiteConfig { n: 128, count: 500, p: vec![2.0, 3.0, 4.0, 8.0], alpha: vec![], s: vec![0.0, 0.5, 1.0, 2.0], ..base },
            Suite::Composition => SuiteConfig { n: 128, p: vec![2.0, 3.0], alpha: vec![], s: vec![0.5, 1.0], ..base },
            Suite::Product => SuiteConfig { n: 64, count: 50, p: vec![2.0], alpha: vec![], s: vec![1.0], ..base },
            Suite::Commutator => SuiteConfig { n: 64, count: 50, p: vec![2.0], alpha: vec![0.5], ..base },
            Suite::LpIdentities => SuiteConfig { p: vec![], alpha: vec![], ..base },
        }
    }

    fn params(&self, suite: Suite) -> BTreeMap<String, String> {
        let list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let mut m = BTreeMap::new();
        m.insert("suite".into(), suite.name().into());
        m.insert("n".into(), self.n.to_string());
        m.insert("count".into(), self.count.to_string());
        m.insert("seed".into(), self.seed.to_string());
        m.insert("p".into(), list(&self.p));
        m.insert("alpha".into(), list(&self.alpha));
        m.insert("s".into(), list(&self.s));
        m.insert("q".into(), self.q.to_string());
        m.insert("j".into(), format!("{}..{}", self.j_min, self.j_max));
        m
    }

    fn grid(&self) -> Result<GridSpec> {
        GridSpec::periodic(self.n)
    }
}

pub fn run_suite(suite: Suite, cfg: &SuiteConfig) -> Result<RatioReport> {
    if cfg.count == 0 {
        return Err(Error::Parameter("ensemble count must be positive".into()));
    }
    match suite {
        Suite::Bernstein => bernstein(cfg, false),
        Suite::Dissipation => bernstein(cfg, true),
        Suite::Positivity => positivity(cfg),
        Suite::Composition => composition(cfg),
        Suite::Product => doubled(suite, cfg, product_rows),
        Suite::Commutator => doubled(suite, cfg, commutator_rows),
        Suite::LpIdentities => lp_identities(cfg),
    }
}

fn worst<'a>(items: impl Iterator<Item = &'a Sample>, score: impl Fn(&Sample) -> f64) -> (f64, Option<&'a Sample>) {
    items.fold((f64::NEG_INFINITY, None), |(best, who), s| {
        let v = score(s);
        if v > best || v.is_nan() {
            (v, Some(s))
        } else {
            (best, who)
        }
    })
}

fn describe(s: Option<&Sample>) -> String {
    match s {
        Some(s) => format!("{:?} lhs {:e} rhs {:e} ratio {:e}", s.params, s.lhs, s.rhs, s.ratio),
        None => "no violation".into(),
    }
}

fn p_of(s: &Sample) -> f64 {
    s.params["p"]
}

fn a_of(s: &Sample) -> f64 {
    s.params["a"]
}

struct ScanRow {
    member: usize,
    j: i32,
    p: f64,
    a: f64,
    middle: f64,
    scale: f64,
    gradient: Option<f64>,
    chain: Option<(f64, f64)>,
}

/// Per-member, per-block evaluation shared by the Bernstein and dissipation suites.
fn scan(cfg: &SuiteConfig, fam: &DyadicFamily, js: &[i32], with_chain: bool) -> Result<Vec<ScanRow>> {
    let grid = *fam.grid();
    let top = js.iter().copied().max().unwrap_or(1);
    let k_max = ((8.0 / 3.0) * (top as f64).exp2()).min((cfg.n / 2 - 1) as f64);
    let ens = Ensemble::new(cfg.seed, cfg.count, 1.0, k_max, SpectrumShape::Mixed)?;
    let weights: Vec<Vec<f64>> = cfg.alpha.iter().map(|&a| resolved_weights(&grid, 2.0 * a)).collect();
    let rows = ens.map(grid, |member, f| {
        let mut rows = Vec::new();
        for &j in js {
            let probe = BlockProbe::new(&f, j, fam)?;
            if probe.is_zero() {
                continue;
            }
            let lam: Vec<Vec<f64>> = if with_chain {
                let spec = crate::spectral::forward_samples(&grid, &probe.samples);
                weights.iter().map(|w| apply_weights(&grid, &spec, w)).collect()
            } else {
                Vec::new()
            };
            for &p in &cfg.p {
                let h = probe.power_spectrum(p);
                let lp = probe.lp(p)?;
                let dual = if with_chain { dual_power(&probe.samples, p) } else { Vec::new() };
                for (ia, &a) in cfg.alpha.iter().enumerate() {
                    let gradient = (a == 1.0 && p > 2.0).then(|| probe.gradient_middle(&h, p));
                    let energy = weighted_energy(&grid, &h, &weights[ia]);
                    let chain = with_chain.then(|| {
                        let big_a = p * grid.cell_area() * lam[ia].iter().zip(&dual).map(|(x, y)| x * y).sum::<f64>();
                        (big_a, 2.0 * energy)
                    });
                    rows.push(ScanRow {
                        member,
                        j,
                        p,
                        a,
                        middle: energy.powf(1.0 / p),
                        scale: (2.0 * a * j as f64 / p).exp2() * lp,
                        gradient,
                        chain,
                    });
                }
            }
        }
        Ok(rows)
    })?;
    Ok(rows.into_iter().flatten().collect())
}

fn block_range(cfg: &SuiteConfig, fam: &DyadicFamily) -> Result<Vec<i32>> {
    let lo = cfg.j_min.max(fam.j_min());
    let hi = cfg.j_max.min(fam.j_max() - 1);
    if lo > hi {
        return Err(Error::Parameter(format!(
            "no interior blocks in {}..{} on a {}-point grid (family {}..{})",
            cfg.j_min,
            cfg.j_max,
            cfg.n,
            fam.j_min(),
            fam.j_max()
        )));
    }
    Ok((lo..=hi).collect())
}

fn validate_bernstein(cfg: &SuiteConfig, chain: bool) -> Result<()> {
    for &p in &cfg.p {
        if !(p >= 2.0 && p.is_finite()) {
            return Err(Error::Parameter(format!("p = {p} must be finite and >= 2")));
        }
    }
    for &a in &cfg.alpha {
        let ok = if chain { a > 0.0 && a <= 1.0 } else { (0.0..=1.0).contains(&a) };
        if !ok {
            return Err(Error::Parameter(format!("a = {a} outside the admissible range")));
        }
    }
    Ok(())
}

fn bernstein(cfg: &SuiteConfig, with_chain: bool) -> Result<RatioReport> {
    validate_bernstein(cfg, with_chain)?;
    let fam = make_family(cfg.grid()?)?;
    let js = block_range(cfg, &fam)?;
    let rows = scan(cfg, &fam, &js, with_chain)?;
    let samples: Vec<Sample> = rows
        .iter()
        .map(|r| {
            let s = Sample::new(&[("member", r.member as f64), ("j", r.j as f64), ("p", r.p), ("a", r.a)], r.middle, r.scale, r.middle / r.scale);
            match r.gradient {
                Some(g) => s.with("gradient_middle", g),
                None => s,
            }
        })
        .collect();
    let mut report = RatioReport::new("bernstein", cfg.params(Suite::Bernstein), samples);
    report.group_by(&["p", "a"]);
    bernstein_checks(&mut report, &js);
    if !with_chain {
        return Ok(report);
    }

    // chain rows reuse the Bernstein lower constants measured on this ensemble
    let c_emp: BTreeMap<(u64, u64), f64> = report.groups.iter().map(|g| ((g.params["p"].to_bits(), g.params["a"].to_bits()), g.c_emp)).collect();
    let samples: Vec<Sample> = rows
        .iter()
        .map(|r| {
            let (big_a, b) = r.chain.expect("chain requested");
            let c = c_emp[&(r.p.to_bits(), r.a.to_bits())];
            let c_term = chain_constant(c, r.p) * r.scale.powf(r.p);
            Sample::new(&[("member", r.member as f64), ("j", r.j as f64), ("p", r.p), ("a", r.a)], b, big_a, b / big_a)
                .with("C", c_term)
                .with("c_emp", c)
        })
        .collect();
    let mut chain = RatioReport::new("dissipation", cfg.params(Suite::Dissipation), samples);
    chain.group_by(&["p", "a"]);
    let (w, who) = worst(chain.samples.iter(), |s| (s.lhs - s.rhs) / s.lhs.abs().max(s.rhs.abs()));
    chain.check("A >= B (relative 1e-8)", w <= 1e-8, format!("worst (B-A)/scale {w:e}: {}", describe(who)));
    let (w, who) = worst(chain.samples.iter(), |s| (s.aux["C"] - s.lhs) / s.lhs);
    chain.check("B >= C", w <= 1e-10, format!("worst (C-B)/B {w:e}: {}", describe(who)));
    if chain.samples.iter().any(|s| p_of(s) == 2.0) {
        let (w, who) = worst(chain.samples.iter().filter(|s| p_of(s) == 2.0), |s| (s.lhs - s.rhs).abs() / s.rhs.abs());
        chain.check("p = 2: A = B", w <= 1e-10, format!("worst |A-B|/A {w:e}: {}", describe(who)));
    }
    chain.checks.extend(report.checks.iter().filter(|c| c.name.starts_with("ratios")).cloned());
    Ok(chain)
}

fn bernstein_checks(report: &mut RatioReport, js: &[i32]) {
    let bad = report.samples.iter().find(|s| !(s.ratio > 0.0 && s.ratio.is_finite()));
    report.check("ratios positive and finite", bad.is_none(), describe(bad));

    // per-(p, a) constants measured block by block
    let mut worst_var = (1.0_f64, String::new());
    for g in &report.groups {
        let (p, a) = (g.params["p"], g.params["a"]);
        let per_j: Vec<(f64, f64)> = js
            .iter()
            .filter_map(|&j| {
                let r: Vec<f64> = report
                    .samples
                    .iter()
                    .filter(|s| p_of(s) == p && a_of(s) == a && s.params["j"] == j as f64)
                    .map(|s| s.ratio)
                    .collect();
                (!r.is_empty()).then(|| super::report::min_max(r.into_iter()))
            })
            .collect();
        let spread = |v: Vec<f64>| v.iter().cloned().fold(0.0, f64::max) / v.iter().cloned().fold(f64::INFINITY, f64::min);
        let lo = spread(per_j.iter().map(|x| x.0).collect());
        let hi = spread(per_j.iter().map(|x| x.1).collect());
        let v = lo.max(hi);
        if v > worst_var.0 {
            worst_var = (v, format!("p {p} a {a}: lower spread {lo:.4}, upper spread {hi:.4}"));
        }
    }
    report.check("constants vary across j by at most 4x", worst_var.0 <= 4.0, format!("max spread {:.4} {}", worst_var.0, worst_var.1));

    if report.samples.iter().any(|s| p_of(s) == 2.0) {
        let out = report.samples.iter().filter(|s| p_of(s) == 2.0).find(|s| {
            let a = a_of(s);
            !(s.ratio >= 0.75f64.powf(a) - 1e-8 && s.ratio <= (8.0f64 / 3.0).powf(a) + 1e-8)
        });
        report.check("p = 2 ratios inside [(3/4)^a, (8/3)^a]", out.is_none(), describe(out));
    }
    if report.samples.iter().any(|s| a_of(s) == 0.0) {
        let (w, who) = worst(report.samples.iter().filter(|s| a_of(s) == 0.0), |s| (s.ratio - 1.0).abs());
        report.check("a = 0 ratios equal 1", w <= 1e-10, format!("max |ratio - 1| {w:e}: {}", describe(who)));
    }
    if report.samples.iter().any(|s| s.aux.contains_key("gradient_middle")) {
        let (w, who) = worst(report.samples.iter().filter(|s| s.aux.contains_key("gradient_middle")), |s| {
            (s.aux["gradient_middle"] - s.lhs).abs() / s.lhs
        });
        report.check("a = 1 agrees with the gradient form", w <= 1e-10, format!("max relative difference {w:e}: {}", describe(who)));
    }
}

fn positivity(cfg: &SuiteConfig) -> Result<RatioReport> {
    for &s in &cfg.s {
        if !(0.0..=2.0).contains(&s) {
            return Err(Error::Parameter(format!("s = {s} must lie in [0, 2]")));
        }
    }
    for &p in &cfg.p {
        if !(p >= 2.0 && p.is_finite()) {
            return Err(Error::Parameter(format!("p = {p} must be finite and >= 2")));
        }
    }
    let grid = cfg.grid()?;
    let ens = Ensemble::new(cfg.seed, cfg.count, 1.0, (cfg.n / 6) as f64, SpectrumShape::Mixed)?;
    let rows = ens.map(grid, |member, f| {
        let x = crate::spectral::inverse_coeffs(&grid, f.coeffs());
        let lam: Vec<Vec<f64>> = cfg.s.iter().map(|&s| weighted_inverse(&grid, f.coeffs(), s)).collect();
        let mut out = Vec::new();
        for &p in &cfg.p {
            let w = dual_power(&x, p);
            let h = crate::spectral::forward_samples(&grid, &super::power_map(&x, p));
            for (is, &s) in cfg.s.iter().enumerate() {
                let lhs = grid.cell_area() * lam[is].iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
                let rhs = 2.0 / p * lambda_energy(&grid, &h, 0.5 * s);
                let scale = lhs.abs().max(rhs.abs());
                let ratio = if scale == 0.0 { 0.0 } else { rhs / lhs };
                out.push(Sample::new(&[("member", member as f64), ("s", s), ("p", p)], lhs, rhs, ratio).with("gap", lhs - rhs).with("scale", scale));
            }
        }
        Ok(out)
    })?;
    let mut report = RatioReport::new("positivity", cfg.params(Suite::Positivity), rows.into_iter().flatten().collect());
    report.group_by(&["p", "s"]);
    let (w, who) = worst(report.samples.iter(), |s| -s.aux["gap"] / s.aux["scale"].max(f64::MIN_POSITIVE));
    report.check("gap >= -1e-8 * scale", w <= 1e-8, format!("worst -gap/scale {w:e}: {}", describe(who)));
    if report.samples.iter().any(|s| p_of(s) == 2.0) {
        let (w, who) = worst(report.samples.iter().filter(|s| p_of(s) == 2.0), |s| s.aux["gap"].abs() / s.aux["scale"].max(f64::MIN_POSITIVE));
        report.check("p = 2 gap vanishes", w <= 1e-10, format!("max |gap|/scale {w:e}: {}", describe(who)));
    }
    Ok(report)
}

fn composition(cfg: &SuiteConfig) -> Result<RatioReport> {
    let grid = cfg.grid()?;
    let fam = make_family(grid)?;
    let ens = Ensemble::new(cfg.seed, cfg.count, 1.0, (cfg.n / 6) as f64, SpectrumShape::Mixed)?;
    // r = m = 2p gives 1/ell = 1/r + (p-1)/m = 1/2
    let tuples: Vec<(f64, f64)> = cfg.p.iter().flat_map(|&p| cfg.s.iter().filter(move |&&s| s < p.min(2.0)).map(move |&s| (p, s))).collect();
    if tuples.is_empty() {
        return Err(Error::Parameter("no admissible (p, s) pair with s < min(p, 2)".into()));
    }
    let rows = ens.map(grid, |member, z| {
        tuples
            .iter()
            .map(|&(p, s)| {
                let (ell, r) = (2.0, 2.0 * p);
                let ratio = composition_ratio(&z, p, s, ell, r, r, &fam)?;
                Ok(Sample::new(&[("member", member as f64), ("p", p), ("s", s), ("ell", ell), ("r", r), ("m", r)], ratio, 1.0, ratio))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut report = RatioReport::new("composition", cfg.params(Suite::Composition), rows.into_iter().flatten().collect());
    report.group_by(&["p", "s"]);
    let bad = report.samples.iter().find(|s| !s.ratio.is_finite());
    report.check("ratios finite", bad.is_none(), describe(bad));
    let z = ens.member(grid, 0)?;
    let mut hom = 0.0_f64;
    for &(p, s) in &tuples {
        let a = composition_ratio(&z, p, s, 2.0, 2.0 * p, 2.0 * p, &fam)?;
        let b = composition_ratio(&z.scaled(2.0), p, s, 2.0, 2.0 * p, 2.0 * p, &fam)?;
        hom = hom.max((a - b).abs() / a);
    }
    report.check("ratio invariant under z -> 2z", hom <= 1e-8, format!("max relative change {hom:e}"));
    Ok(report)
}

type RowFn = fn(&SuiteConfig, GridSpec, &DyadicFamily, &Ensemble) -> Result<Vec<Sample>>;

/// Runs `rows` at `n` and `2n` on the same lattice-defined fields.
fn doubled(suite: Suite, cfg: &SuiteConfig, rows: RowFn) -> Result<RatioReport> {
    let mut samples = Vec::new();
    let ens = Ensemble::new(cfg.seed, cfg.count, 1.0, (cfg.n / 6) as f64, SpectrumShape::Mixed)?;
    for n in [cfg.n, 2 * cfg.n] {
        let grid = GridSpec::periodic(n)?;
        let fam = make_family(grid)?;
        samples.extend(rows(cfg, grid, &fam, &ens)?);
    }
    let mut report = RatioReport::new(suite.name(), cfg.params(suite), samples);
    report.group_by(&["n"]);
    let bad = report.samples.iter().find(|s| !s.ratio.is_finite());
    report.check("ratios finite", bad.is_none(), describe(bad));
    let change = stability_ratio(&report).unwrap_or(f64::NAN);
    report.check("max ratio stable within 20% under resolution doubling", (change - 1.0).abs() <= 0.2, format!("max ratio at 2n / max ratio at n = {change:.6}"));
    if suite == Suite::Commutator {
        let grid = cfg.grid()?;
        let fam = make_family(grid)?;
        let v = ens.member(grid, 0)?;
        let mut u1 = SpectralField::zeros(grid);
        let mut u2 = SpectralField::zeros(grid);
        u1.coeffs_mut()[0] = num_complex::Complex64::new(0.8, 0.0);
        u2.coeffs_mut()[0] = num_complex::Complex64::new(-0.3, 0.0);
        let mut worst = 0.0_f64;
        for j in fam.j_range() {
            let c = commutator((&u1, &u2), &v, j, &fam, DealiasRule::TwoThirds)?;
            worst = worst.max(c.max_abs());
        }
        let scale = v.to_real().max_abs() * (cfg.n as f64 / 6.0);
        report.check("commutator vanishes for constant u", worst <= 1e-13 * scale, format!("max |[u, Δ_j]·∇v| = {worst:e}"));
    }
    Ok(report)
}

/// Max ratio at the doubled resolution over the max ratio at the base one.
pub fn stability_ratio(report: &RatioReport) -> Option<f64> {
    if report.groups.len() != 2 {
        return None;
    }
    Some(report.groups[1].c_emp_upper / report.groups[0].c_emp_upper)
}

fn product_rows(cfg: &SuiteConfig, grid: GridSpec, fam: &DyadicFamily, ens: &Ensemble) -> Result<Vec<Sample>> {
    let pairs = ens.count / 2;
    let rows: Vec<Vec<Sample>> = (0..pairs.max(1))
        .into_par_iter()
        .map(|i| {
            let u = ens.member(grid, 2 * i)?;
            let v = ens.member(grid, (2 * i + 1) % ens.count)?;
            let mut out = Vec::new();
            for &p in &cfg.p {
                for &s in &cfg.s {
                    let r = product_ratio_a1(&u, &v, s, p, cfg.q, fam, DealiasRule::TwoThirds)?;
                    out.push(Sample::new(&[("member", i as f64), ("p", p), ("s", s), ("q", cfg.q), ("n", grid.n() as f64)], r, 1.0, r));
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}

fn commutator_rows(cfg: &SuiteConfig, grid: GridSpec, fam: &DyadicFamily, ens: &Ensemble) -> Result<Vec<Sample>> {
    let rows = ens.map(grid, |i, theta| {
        let mut out = Vec::new();
        for &p in &cfg.p {
            for &alpha in &cfg.alpha {
                let (lhs, rhs) = commutator_sides(&theta, alpha, p, cfg.q, fam, DealiasRule::TwoThirds)?;
                let r = if rhs == 0.0 { 0.0 } else { lhs / rhs };
                out.push(Sample::new(&[("member", i as f64), ("p", p), ("alpha", alpha), ("q", cfg.q), ("n", grid.n() as f64)], lhs, rhs, r));
            }
        }
        Ok(out)
    })?;
    Ok(rows.into_iter().flatten().collect())
}

fn lp_identities(cfg: &SuiteConfig) -> Result<RatioReport> {
    let grid = cfg.grid()?;
    let fam = make_family(grid)?;
    let rule = DealiasRule::TwoThirds;
    let ens = Ensemble::new(cfg.seed, cfg.count, 1.0, rule.cutoff(cfg.n) as f64, SpectrumShape::Mixed)?;
    let pairs: Vec<(i32, i32)> = fam.j_range().flat_map(|j| fam.j_range().map(move |k| (j, k))).filter(|(j, k)| (j - k).abs() >= 2).collect();
    let rows = ens.map(grid, |i, f| {
        let scale = f.max_coeff();
        let set = fam.blocks(&f)?;
        let hom = (&set.homogeneous_sum() - &f.without_mean()).max_coeff() / scale;
        let inh = (&set.inhomogeneous_sum() - &f).max_coeff() / scale;
        let mut orth = 0.0_f64;
        for &(j, k) in &pairs {
            let (a, b) = (fam.symbol(j)?, fam.symbol(k)?);
            let m = f.coeffs().iter().zip(a).zip(b).map(|((c, x), y)| (c * x * y).norm()).fold(0.0, f64::max);
            orth = orth.max(m);
        }
        let g = ens.member(grid, (i + 1) % ens.count)?;
        let parts = bony_decompose(&f.to_real(), &g.to_real(), &fam, rule)?;
        let exact = fine_grid_product(&f, &g, rule)?.to_real();
        let sum = parts.sum();
        let err = sum.samples().iter().zip(exact.samples()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / exact.max_abs();
        let e = hom.max(inh);
        Ok(Sample::new(&[("member", i as f64)], e, 1e-10, e / 1e-10)
            .with("homogeneous_error", hom)
            .with("inhomogeneous_error", inh)
            .with("quasi_orthogonality", orth)
            .with("bony_error", err))
    })?;
    let mut report = RatioReport::new("lp-identities", cfg.params(Suite::LpIdentities), rows);
    let hp = fam.homogeneous_partition_defect();
    let ip = fam.inhomogeneous_partition_defect();
    report.check("partition of unity", hp.max(ip) <= 1e-10, format!("homogeneous defect {hp:e}, inhomogeneous defect {ip:e}"));
    let max = |k: &str| report.samples.iter().map(|s| s.aux[k]).fold(0.0, f64::max);
    let (h, i, o, b) = (max("homogeneous_error"), max("inhomogeneous_error"), max("quasi_orthogonality"), max("bony_error"));
    report.check("reconstruction", h.max(i) <= 1e-10, format!("homogeneous {h:e}, inhomogeneous {i:e}"));
    report.check("quasi-orthogonality", o == 0.0, format!("max |Δ_jΔ_k f| for |j-k| >= 2: {o:e}"));
    report.check("Bony identity", b <= 1e-9, format!("max relative error {b:e}"));
    Ok(report)
}
