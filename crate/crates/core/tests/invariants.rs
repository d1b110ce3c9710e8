//! Property tests through the public API.

use proptest::prelude::*;

use qglab::besov::{besov_norm, BesovIndex};
use qglab::ensemble::{Ensemble, SpectrumShape};
use qglab::io::{parse_snapshot_csv, read_snapshot, snapshot_csv, write_snapshot};
use qglab::lab::{bernstein_triple, positivity_gap};
use qglab::littlewood_paley::make_family;
use qglab::solver::{run, SolverConfig};
use qglab::spectral::GridSpec;
use qglab::wellposedness::{existence_time, ExistenceTimeConfig};

fn grid(n: usize) -> GridSpec {
    GridSpec::periodic(n).unwrap()
}

fn shape(i: u8) -> SpectrumShape {
    match i % 3 {
        0 => SpectrumShape::Flat,
        1 => SpectrumShape::Decaying,
        _ => SpectrumShape::Mixed,
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn blocks_reconstruct_the_field(seed in 0u64..10_000, s in 0u8..3, kmax in 2.0f64..20.0) {
        let g = grid(64);
        let f = Ensemble::new(seed, 1, 1.0, kmax, shape(s)).unwrap().member(g, 0).unwrap();
        let set = make_family(g).unwrap().blocks(&f).unwrap();
        prop_assert!((&set.inhomogeneous_sum() - &f).l2_norm() <= 1e-12 * f.l2_norm());
        prop_assert!((&set.homogeneous_sum() - &f).l2_norm() <= 1e-12 * f.l2_norm());
    }

    #[test]
    fn besov_norms_are_homogeneous(seed in 0u64..10_000, lambda in 0.01f64..100.0, sigma in -1.0f64..2.0, q in 1.0f64..4.0) {
        let g = grid(32);
        let fam = make_family(g).unwrap();
        let f = Ensemble::new(seed, 1, 1.0, 8.0, SpectrumShape::Flat).unwrap().member(g, 0).unwrap();
        for idx in [BesovIndex::homogeneous(sigma, 2.0, q).unwrap(), BesovIndex::inhomogeneous(sigma, 3.0, q).unwrap()] {
            let a = besov_norm(&f, idx, &fam).unwrap();
            let b = besov_norm(&f.scaled(lambda), idx, &fam).unwrap();
            prop_assert!((b - lambda * a).abs() <= 1e-10 * b.max(lambda * a));
        }
    }

    #[test]
    fn plancherel_bracket_at_p2(seed in 0u64..10_000, j in 1i32..4, a in 0.0f64..1.0) {
        let g = grid(64);
        let fam = make_family(g).unwrap();
        let f = Ensemble::new(seed, 1, 1.0, 21.0, SpectrumShape::Flat).unwrap().member(g, 0).unwrap();
        let r = bernstein_triple(&f, j, 2.0, a, &fam).unwrap().ratio();
        prop_assert!(r >= 0.75f64.powf(a) - 1e-8 && r <= (8.0f64 / 3.0).powf(a) + 1e-8, "ratio {}", r);
    }

    #[test]
    fn positivity_gap_is_nonnegative(seed in 0u64..10_000, s in 0.0f64..2.0, p in 2.0f64..8.0) {
        let f = Ensemble::new(seed, 1, 1.0, 8.0, SpectrumShape::Mixed).unwrap().member(grid(32), 0).unwrap();
        let gap = positivity_gap(&f, s, p).unwrap();
        prop_assert!(gap.gap() >= -1e-8 * gap.scale(), "{:?}", gap);
    }

    #[test]
    fn existence_time_shrinks_as_data_grow(seed in 0u64..10_000, amp in 0.1f64..10.0, factor in 1.0f64..8.0) {
        let g = grid(32);
        let fam = make_family(g).unwrap();
        let c = ExistenceTimeConfig { alpha: 0.5, p: 2.0, q: 2.0, kappa: 1.0, c_p: 0.75, c_small: 0.5 };
        let f = Ensemble::new(seed, 1, 1.0, 8.0, SpectrumShape::Decaying).unwrap().member(g, 0).unwrap().scaled(amp);
        let t = existence_time(&f, &c, &fam).unwrap().t0;
        let tb = existence_time(&f.scaled(factor), &c, &fam).unwrap().t0;
        prop_assert!(tb <= t, "{} then {}", t, tb);
    }

    #[test]
    fn snapshots_round_trip(seed in 0u64..10_000, log_n in 3u32..7, period in 0.5f64..20.0) {
        let n = 1usize << log_n;
        let g = GridSpec::new(n, period).unwrap();
        let kmax = ((n / 2 - 1) as f64).max(1.0);
        let f = Ensemble::new(seed, 1, 1.0, kmax, SpectrumShape::Flat).unwrap().member(g, 0).unwrap().to_real();
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &f).unwrap();
        prop_assert_eq!(&read_snapshot(&buf[..]).unwrap(), &f);
        prop_assert_eq!(&parse_snapshot_csv(&snapshot_csv(&f)).unwrap(), &f);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, ..ProptestConfig::default() })]

    #[test]
    fn dissipative_runs_do_not_gain_energy(seed in 0u64..10_000, alpha in 0.2f64..1.0, kappa in 0.05f64..1.0) {
        let g = grid(32);
        let f = Ensemble::new(seed, 1, 1.0, 6.0, SpectrumShape::Decaying).unwrap().member(g, 0).unwrap().to_real();
        let f = f.scaled(0.5 / f.max_abs());
        let cfg = SolverConfig::new(alpha, kappa, g, 0.02, 0.5).unwrap();
        let out = run(&f, &cfg, &mut []).unwrap();
        prop_assert!(out.completed());
        prop_assert!(out.trajectory.rows.windows(2).all(|w| w[1].l2 <= w[0].l2 * (1.0 + 1e-12)));
    }
}
