use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

use super::*;
use crate::test_util::{random_band_limited, rel_diff};

fn grid(n: usize) -> GridSpec {
    GridSpec::periodic(n).unwrap()
}

#[test]
fn single_cosine_has_two_coefficients() {
    let g = grid(32);
    let f = RealField::from_fn(g, |x, _| (3.0 * x).cos()).unwrap();
    let fh = forward_transform(&f);
    for idx in 0..g.len() {
        let (kx, ky) = g.lattice(idx);
        let c = fh.coeffs()[idx];
        if ky == 0 && kx.abs() == 3 {
            assert!((c - Complex64::new(0.5, 0.0)).norm() < 1e-14);
        } else {
            assert!(c.norm() < 1e-14, "({kx},{ky}) = {c}");
        }
    }
}

#[test]
fn constant_only_has_zero_mode() {
    let g = grid(16);
    let fh = forward_transform(&RealField::constant(g, 1.0));
    assert!((fh.coeffs()[0].re - 1.0).abs() < 1e-15);
    assert!(fh.coeffs()[1..].iter().all(|c| c.norm() < 1e-15));
}

#[test]
fn non_finite_samples_are_rejected() {
    let g = grid(8);
    let mut s = vec![0.0; 64];
    s[5] = f64::NAN;
    assert!(matches!(RealField::new(g, s), Err(crate::Error::NonFinite { index: 5, .. })));
}

#[test]
fn plancherel_matches_physical_quadrature() {
    let g = grid(64);
    for seed in 0..5 {
        let f = random_band_limited(g, 31, seed).to_real();
        let physical = f.lp_norm(2.0).unwrap();
        let spectral = forward_transform(&f).l2_norm();
        assert!(rel_diff(physical, spectral) < 1e-12);
    }
}

#[test]
fn round_trip_recovers_samples() {
    let g = grid(32);
    let f = random_band_limited(g, 15, 3).to_real();
    let back = inverse_transform(&forward_transform(&f));
    let err = f.samples().iter().zip(back.samples()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(err <= 1e-12 * f.max_abs());
}

#[test]
fn lambda_on_single_mode() {
    let g = grid(32);
    let f = RealField::from_fn(g, |x, _| (3.0 * x).cos()).unwrap();
    let out = apply_lambda(&f.forward(), 0.5).unwrap().to_real();
    let expected = RealField::from_fn(g, |x, _| 3f64.sqrt() * (3.0 * x).cos()).unwrap();
    for (a, b) in out.samples().iter().zip(expected.samples()) {
        assert!((a - b).abs() < 1e-13);
    }
    let same = apply_lambda(&f.forward(), 0.0).unwrap();
    assert_eq!(same, f.forward());
    assert!(apply_lambda(&f.forward(), -0.5).is_err());
}

#[test]
fn lambda_two_is_minus_laplacian() {
    let g = grid(32);
    let f = random_band_limited(g, 10, 11);
    let d1 = Multiplier::derivative(g, 1).unwrap();
    let d2 = Multiplier::derivative(g, 2).unwrap();
    let lap = &d1.apply(&d1.apply(&f).unwrap()).unwrap() + &d2.apply(&d2.apply(&f).unwrap()).unwrap();
    let lam2 = apply_lambda(&f, 2.0).unwrap();
    let diff = (&lam2 + &lap).max_coeff();
    assert!(diff <= 1e-12 * lam2.max_coeff());
}

#[test]
fn riesz_velocity_of_cosine() {
    let g = grid(32);
    let theta = RealField::from_fn(g, |x, _| x.cos()).unwrap();
    let (u1, u2) = riesz_velocity(&theta.forward());
    let (u1, u2) = (u1.to_real(), u2.to_real());
    for i in 0..g.len() {
        let (x, _) = g.point(i);
        assert!(u1.samples()[i].abs() < 1e-14);
        assert!((u2.samples()[i] - x.sin()).abs() < 1e-14);
    }
}

#[test]
fn riesz_velocity_of_constant_vanishes() {
    let g = grid(16);
    let (u1, u2) = riesz_velocity(&RealField::constant(g, 4.0).forward());
    assert_eq!(u1.max_coeff(), 0.0);
    assert_eq!(u2.max_coeff(), 0.0);
}

#[test]
fn lp_norm_examples() {
    let g = grid(64);
    let two = RealField::constant(g, 2.0);
    let expected = 2.0 * (4.0 * PI * PI).powf(0.25);
    assert!(rel_diff(two.lp_norm(4.0).unwrap(), expected) < 1e-13);
    let c = RealField::from_fn(g, |x, _| x.cos()).unwrap();
    assert!(rel_diff(c.lp_norm(2.0).unwrap(), (2.0 * PI * PI).sqrt()) < 1e-13);
    let f = random_band_limited(g, 9, 1).to_real();
    assert_eq!(f.lp_norm(f64::INFINITY).unwrap(), f.max_abs());
    assert!(f.lp_norm(0.5).is_err());
}

#[test]
fn dealiased_product_examples() {
    let g = grid(32);
    let c = RealField::from_fn(g, |x, _| x.cos()).unwrap();
    let prod = dealiased_product(&c, &c, DealiasRule::TwoThirds).unwrap();
    for i in 0..g.len() {
        let (x, _) = g.point(i);
        assert!((prod.samples()[i] - 0.5 * (1.0 + (2.0 * x).cos())).abs() < 1e-14);
    }
    let f = random_band_limited(g, DealiasRule::TwoThirds.cutoff(32), 5).to_real();
    let same = dealiased_product(&f, &RealField::constant(g, 1.0), DealiasRule::TwoThirds).unwrap();
    for (a, b) in same.samples().iter().zip(f.samples()) {
        assert!((a - b).abs() < 1e-13);
    }
    let other = RealField::zeros(grid(16));
    assert!(dealiased_product(&f, &other, DealiasRule::TwoThirds).is_err());
}

/// Exact product on a grid twice as fine, truncated back to the 2/3 band.
fn fine_grid_product(f: &SpectralField, g: &SpectralField, rule: DealiasRule) -> SpectralField {
    let coarse = *f.grid();
    let fine = coarse.refined();
    let ff = resample(f, fine).unwrap().to_real();
    let gf = resample(g, fine).unwrap().to_real();
    let prod: Vec<f64> = ff.samples().iter().zip(gf.samples()).map(|(a, b)| a * b).collect();
    let prod = RealField::new(fine, prod).unwrap().forward();
    rule.apply(&resample(&prod, coarse).unwrap())
}

#[test]
fn dealiased_product_matches_fine_grid_oracle() {
    let g = grid(48_usize.next_power_of_two());
    let rule = DealiasRule::TwoThirds;
    let k = rule.cutoff(g.n());
    for seed in 0..4 {
        let f = random_band_limited(g, k, 100 + seed);
        let h = random_band_limited(g, k, 200 + seed);
        let got = dealiased_product(&f.to_real(), &h.to_real(), rule).unwrap().forward();
        let want = fine_grid_product(&f, &h, rule);
        let err = (&got - &want).max_coeff();
        assert!(err <= 1e-12 * want.max_coeff(), "err {err}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lambda_exponents_add(seed in 0u64..1000, a in 0.0f64..2.0, b in 0.0f64..2.0) {
        let g = grid(32);
        let f = random_band_limited(g, 12, seed);
        let ab = apply_lambda(&apply_lambda(&f, a).unwrap(), b).unwrap();
        let direct = apply_lambda(&f, a + b).unwrap();
        prop_assert!((&ab - &direct).max_coeff() <= 1e-12 * direct.max_coeff().max(1e-300));
    }

    #[test]
    fn riesz_velocity_is_solenoidal_and_contractive(seed in 0u64..1000) {
        let g = grid(32);
        let theta = random_band_limited(g, 15, seed);
        let (u1, u2) = riesz_velocity(&theta);
        let (res, _) = divergence_residual(&u1, &u2).unwrap();
        prop_assert!(res <= 1e-12 * theta.max_coeff());
        prop_assert!(u1.l2_norm() <= theta.l2_norm() * (1.0 + 1e-14));
        prop_assert!(u2.l2_norm() <= theta.l2_norm() * (1.0 + 1e-14));
        prop_assert!(u1.hermitian_defect() <= 1e-15 * theta.max_coeff());
    }
}

#[test]
fn sup_norm_finds_off_grid_peaks() {
    let g = GridSpec::periodic(32).unwrap();
    // peak at x = 0.3, y = 1.1: between samples
    let f = RealField::from_fn(g, |x, y| 2.0 * (x - 0.3).cos() * (y - 1.1).cos() + 0.5 * (3.0 * x).sin()).unwrap();
    let s = f.forward();
    let sampled = f.max_abs();
    let fine = RealField::from_fn(GridSpec::periodic(2048).unwrap(), |x, y| 2.0 * (x - 0.3).cos() * (y - 1.1).cos() + 0.5 * (3.0 * x).sin())
        .unwrap()
        .max_abs();
    let sup = sup_norm(&s);
    assert!(sup >= fine - 1e-12 && sup > sampled);
    assert!(sup - fine < 1e-5, "{sup} vs {fine}");
    assert_eq!(sup_norm(&SpectralField::zeros(g)), 0.0);
    let c = RealField::from_fn(g, |x, _| -3.0 * x.cos()).unwrap().forward();
    assert!((sup_norm(&c) - 3.0).abs() < 1e-13);
}
