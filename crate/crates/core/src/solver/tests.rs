use super::*;
use crate::spectral::gradient;
use crate::test_util::{random_band_limited, rel_diff};

fn grid(n: usize) -> GridSpec {
    GridSpec::periodic(n).unwrap()
}

/// Random mean-zero field with modes `|k|_∞ <= 4`, scaled to `max |θ| = amp`.
fn smooth(n: usize, seed: u64, amp: f64) -> RealField {
    let f = random_band_limited(grid(n), 4, seed).to_real();
    f.scaled(amp / f.max_abs())
}

fn cfg(n: usize, alpha: f64, kappa: f64, dt: f64, t_end: f64) -> SolverConfig {
    SolverConfig::new(alpha, kappa, grid(n), dt, t_end).unwrap()
}

#[test]
fn single_mode_has_no_self_advection() {
    let g = grid(32);
    let th = RealField::from_fn(g, |x, _| x.cos()).unwrap().forward();
    let (u1, u2) = riesz_velocity(&th);
    assert!(u1.to_real().max_abs() < 1e-15);
    let u2r = u2.to_real();
    let want = RealField::from_fn(g, |x, _| x.sin()).unwrap();
    assert!(u2r.samples().iter().zip(want.samples()).all(|(a, b)| (a - b).abs() < 1e-14));
    assert!(nonlinear_term(&th, DealiasRule::TwoThirds).max_coeff() < 1e-15);
    let c = RealField::constant(g, 2.5).forward();
    assert_eq!(nonlinear_term(&c, DealiasRule::TwoThirds).max_coeff(), 0.0);
}

#[test]
fn advective_and_divergence_forms_agree_and_are_skew() {
    for seed in 0..4 {
        let th = random_band_limited(grid(64), 12, seed);
        let a = nonlinear_term(&th, DealiasRule::TwoThirds);
        let b = nonlinear_term_divergence(&th, DealiasRule::TwoThirds);
        assert!((&a - &b).l2_norm() <= 1e-10 * a.l2_norm());
        let (g1, g2) = gradient(&th);
        let grad = (g1.l2_norm().powi(2) + g2.l2_norm().powi(2)).sqrt();
        let skew = th.to_real().inner(&a.to_real()).unwrap();
        assert!(skew.abs() <= 1e-10 * th.l2_norm().powi(2) * grad, "{skew}");
        assert!(a.hermitian_defect() <= 1e-12 * a.max_coeff());
    }
}

#[test]
fn linear_flow_is_exact() {
    let g = grid(32);
    let th0 = RealField::from_fn(g, |x, _| (3.0 * x).cos()).unwrap();
    let mut c = cfg(32, 0.5, 1.0, 0.05, 1.0);
    c.nonlinear = false;
    let out = run(&th0, &c, &mut []).unwrap();
    let amp = out.final_state.theta.coeff(3, 0).re * 2.0;
    assert!(rel_diff(amp, (-3.0f64).exp()) < 1e-13, "{amp}");
    assert!((out.final_state.t - 1.0).abs() < 1e-14);
    assert_eq!(out.trajectory.rows.len(), 21);

    // every mode, one step, both integrators
    let th = random_band_limited(g, 10, 3);
    for integrator in [Integrator::Ifrk4, Integrator::Ifeuler] {
        let c = SolverConfig { integrator, nonlinear: false, ..cfg(32, 0.3, 0.7, 0.1, 0.1) };
        let s = step(&State { theta: th.clone(), t: 0.0, step: 0 }, &c).unwrap();
        for idx in 0..g.len() {
            let want = th.coeffs()[idx] * (-0.7 * g.radius(idx).powf(0.6) * 0.1).exp();
            assert!((s.theta.coeffs()[idx] - want).norm() <= 1e-15 * th.max_coeff());
        }
    }
}

#[test]
fn zero_data_stays_zero_and_mean_is_required() {
    let c = cfg(32, 0.5, 1.0, 0.1, 1.0);
    let out = run(&RealField::zeros(grid(32)), &c, &mut []).unwrap();
    assert!(out.completed());
    assert!(out.trajectory.rows.iter().all(|r| r.l2 == 0.0 && r.linf == 0.0));
    let shifted = RealField::constant(grid(32), 0.1);
    assert!(matches!(run(&shifted, &c, &mut []), Err(Error::NonZeroMean { .. })));
    assert!(SolverConfig::new(0.0, 1.0, grid(32), 0.1, 1.0).is_err());
    assert!(SolverConfig::new(0.5, -1.0, grid(32), 0.1, 1.0).is_err());
    assert!(SolverConfig::new(0.5, 1.0, grid(32), 0.0, 1.0).is_err());
}

#[test]
fn norms_do_not_grow_and_mean_stays_zero() {
    let th0 = smooth(64, 1, 1.0);
    let c = cfg(64, 0.5, 0.1, 0.02, 1.0);
    let out = run(&th0, &c, &mut []).unwrap();
    assert!(out.completed());
    let t = &out.trajectory;
    assert!(t.growth_rate(|r| r.l2) <= 1e-6, "{}", t.growth_rate(|r| r.l2));
    assert!(t.growth_rate(|r| r.linf) <= 1e-6, "{}", t.growth_rate(|r| r.linf));
    assert!(out.final_state.theta.coeffs()[0].norm() < 1e-12);
    assert!(out.final_state.theta.hermitian_defect() <= 1e-14);
}

#[test]
fn inviscid_energy_is_conserved() {
    let th0 = smooth(64, 2, 1.0);
    let c = cfg(64, 0.5, 0.0, 0.01, 1.0);
    let out = run(&th0, &c, &mut []).unwrap();
    let (a, b) = (out.trajectory.rows[0].l2, out.trajectory.last().unwrap().l2);
    assert!(rel_diff(a, b) < 1e-8, "{}", rel_diff(a, b));
}

#[test]
fn ifrk4_converges_at_fourth_order() {
    let th0 = smooth(32, 3, 1.0);
    let finals: Vec<SpectralField> = [0.1, 0.05, 0.025]
        .iter()
        .map(|&dt| run(&th0, &cfg(32, 0.5, 0.5, dt, 1.0), &mut []).unwrap().final_state.theta)
        .collect();
    let e1 = (&finals[0] - &finals[1]).l2_norm();
    let e2 = (&finals[1] - &finals[2]).l2_norm();
    let order = (e1 / e2).log2();
    assert!((order - 4.0).abs() < 0.3, "order {order}");
}

#[test]
fn oversized_steps_abort() {
    let th0 = smooth(64, 4, 20.0);
    let c = cfg(64, 0.5, 0.001, 2.0, 40.0);
    let out = run(&th0, &c, &mut []).unwrap();
    let a = out.abort.expect("run should abort");
    assert!(out.final_state.theta.coeffs().iter().all(|c| c.re.is_finite()));
    assert_eq!(out.final_state.t, a.t);
    assert!(out.final_state.t < 40.0);
    assert_eq!(out.trajectory.last().unwrap().step, a.step);
}

#[test]
fn block_energy_law_balances() {
    let th0 = smooth(64, 5, 1.0);
    let c = cfg(64, 0.5, 0.2, 0.005, 0.5);
    let mut budget = EnergyBudget::new(&c).unwrap();
    run(&th0, &c, &mut [&mut budget]).unwrap();
    assert!(budget.max_residual() < 1e-5, "{:?}", budget.residuals());
    // the residual shrinks at the trapezoid rate
    let c2 = SolverConfig { dt: 0.01, ..c };
    let mut coarse = EnergyBudget::new(&c2).unwrap();
    run(&th0, &c2, &mut [&mut coarse]).unwrap();
    assert!(coarse.max_residual() > 2.0 * budget.max_residual());
}

#[test]
fn observers_see_every_state() {
    let c = SolverConfig { record_stride: 3, ..cfg(32, 0.5, 1.0, 0.1, 1.0) };
    let mut seen = Vec::new();
    let mut obs = |s: &State| {
        seen.push(s.step);
        Ok(())
    };
    let out = run(&smooth(32, 6, 0.5), &c, &mut [&mut obs]).unwrap();
    assert_eq!(seen, (0..=10).collect::<Vec<_>>());
    let steps: Vec<usize> = out.trajectory.rows.iter().map(|r| r.step).collect();
    assert_eq!(steps, vec![0, 3, 6, 9, 10]);
    let csv = out.trajectory.to_csv();
    assert!(csv.starts_with("# format_version: 1\nstep,t,l2,linf,block_-1,"));
    assert_eq!(csv.lines().count(), 7);
}

#[test]
fn step_sizes_hit_the_end_time() {
    let c = cfg(32, 0.5, 1.0, 0.3, 1.0);
    let h = c.step_sizes();
    assert_eq!(h.len(), 4);
    assert!((h.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    assert_eq!(cfg(32, 0.5, 1.0, 0.1, 1.0).step_sizes().len(), 10);
    assert!(cfg(32, 0.5, 1.0, 0.1, 0.0).step_sizes().is_empty());
    assert_eq!("IFRK4".parse::<Integrator>().unwrap(), Integrator::Ifrk4);
    assert!("rk4".parse::<Integrator>().is_err());
    let dt = c.suggested_dt(&smooth(32, 1, 1.0).forward());
    assert!(dt > 0.0 && dt < 0.5 / 16.0);
}

fn low_block(n: usize, seed: u64, amp: f64) -> RealField {
    let g = grid(n);
    let mut f = random_band_limited(g, 5, seed);
    for idx in 0..g.len() {
        if g.radius(idx) > 5.0 {
            f.coeffs_mut()[idx] = num_complex::Complex64::new(0.0, 0.0);
        }
    }
    let r = f.to_real();
    r.scaled(amp / r.max_abs())
}

#[test]
fn first_picard_iterate_is_the_linear_flow_of_truncated_data() {
    let th0 = low_block(32, 7, 0.5);
    let inner = cfg(32, 0.5, 1.0, 0.1, 1.0);
    let out = picard_run(&th0, &PicardConfig { max_iter: 1, inner, tolerance: 1e-12 }).unwrap();
    let fam = crate::littlewood_paley::make_family(grid(32)).unwrap();
    let data = fam.low_pass(&th0.forward(), 2).unwrap();
    let lin = run(&data.to_real(), &SolverConfig { nonlinear: false, ..inner }, &mut []).unwrap();
    assert!((&lin.final_state.theta - &out.iterates[0].final_theta).max_coeff() < 1e-15);
    assert!(!out.converged);
}

#[test]
fn picard_contracts_and_meets_the_direct_solution() {
    let th0 = low_block(32, 8, 0.05);
    let inner = cfg(32, 0.5, 1.0, 0.05, 2.0);
    let out = picard_run(&th0, &PicardConfig { max_iter: 12, inner, tolerance: 1e-13 }).unwrap();
    assert!(out.converged, "{:?}", out.differences());
    for r in &out.contraction_ratios()[2..] {
        assert!(*r <= 0.5, "{:?}", out.differences());
    }
    let direct = run(&th0, &inner, &mut []).unwrap().final_state.theta;
    let half = run(&th0, &SolverConfig { dt: 0.025, ..inner }, &mut []).unwrap().final_state.theta;
    let step_err = (&direct - &half).l2_norm();
    let gap = (&out.last().unwrap().final_theta - &direct).l2_norm();
    assert!(gap <= 10.0 * step_err.max(1e-14 * direct.l2_norm()), "gap {gap} step error {step_err}");
}

#[test]
fn picard_zero_data_converges_at_once() {
    let out = picard_run(&RealField::zeros(grid(32)), &PicardConfig { max_iter: 5, inner: cfg(32, 0.5, 1.0, 0.1, 1.0), tolerance: 1e-12 }).unwrap();
    assert!(out.converged);
    assert_eq!(out.iterates.len(), 1);
}
