use faer::Mat;
use lrmctdh::config::{Config, InteractionKind, PerturbationKind, StatisticsKind};
use lrmctdh::fockspace::{space_size, Statistics};
use lrmctdh::io::{Checkpoint, CheckpointHeader};
use lrmctdh::linalg::C64;
use lrmctdh::oracle::{coupled_oscillators_reference, fock_operator_defect};
use lrmctdh::spectrum::hungarian;
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![-1e6..1e6f64, any::<f64>().prop_filter("finite", |x| x.is_finite())]
}

prop_compose! {
    fn config()(
        dist in any::<bool>(),
        fermion in any::<bool>(),
        particles in 1usize..6,
        orbitals in prop::collection::vec(1usize..6, 1..4),
        mass in 0.1..10.0f64,
        points in 8usize..200,
        x_min in -50.0..-0.1f64,
        x_max in 0.1..50.0f64,
        trap in finite(),
        kind in 0usize..4,
        strength in finite(),
        width in 0.01..5.0f64,
        tol_orb in 1e-14..1e-2f64,
        tol_c in 1e-14..1e-2f64,
        max_iter in 1usize..100_000,
        tol_zero in prop::option::of(1e-14..1e-2f64),
        pert in 0usize..3,
        drive in prop::collection::vec(finite(), 0..4),
    ) -> Config {
        let statistics = if dist { StatisticsKind::Dist } else if fermion { StatisticsKind::Fermion } else { StatisticsKind::Boson };
        let orbitals = if dist { orbitals } else { orbitals[..1].to_vec() };
        let interaction = match (dist, kind) {
            (true, k) if k % 2 == 0 => InteractionKind::None,
            (true, _) => InteractionKind::Bilinear,
            (false, 0) => InteractionKind::None,
            (false, 1) => InteractionKind::Contact,
            _ => InteractionKind::Gaussian,
        };
        let perturbation = [PerturbationKind::None, PerturbationKind::Position, PerturbationKind::PositionSquared][pert];
        Config {
            statistics,
            particles,
            perturbation_dof: if dist { orbitals.len() - 1 } else { 0 },
            orbitals,
            mass,
            points,
            x_min,
            x_max,
            trap_frequency: trap,
            interaction,
            strength,
            width,
            tol_orb,
            tol_c,
            max_iter,
            tol_zero,
            perturbation,
            drive,
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn config_render_parse_round_trip(cfg in config()) {
        prop_assume!(cfg.validate().is_ok());
        let text = cfg.render();
        let back = Config::parse(&text).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.hash(), cfg.hash());
    }

    #[test]
    fn checkpoint_round_trip(rows in 1usize..6, cols in 1usize..4, values in prop::collection::vec(finite(), 48), energy in finite()) {
        let header = CheckpointHeader {
            kind: "ground".into(),
            statistics: "boson".into(),
            particles: 2,
            orbitals: vec![cols],
            points: rows,
            energy,
            residual_orb: 0.0,
            residual_c: 0.0,
            mu_hermiticity: 0.0,
            iterations: 0,
            converged: true,
            config: String::new(),
            config_hash: String::new(),
            arrays: vec![],
        };
        let mut ck = Checkpoint::new(header);
        ck.push("a", Mat::from_fn(rows, cols, |i, j| C64::new(values[2 * (i * cols + j)], values[2 * (i * cols + j) + 1])));
        let mut buf = Vec::new();
        ck.write_to(&mut buf).unwrap();
        let back = Checkpoint::read_from(&buf[..]).unwrap();
        prop_assert_eq!(back.header.energy.to_bits(), energy.to_bits());
        prop_assert_eq!(&back.arrays[0], &ck.arrays[0]);
    }

    #[test]
    fn hungarian_is_optimal(n in 1usize..7, values in prop::collection::vec(0.0..10.0f64, 36)) {
        let cost: Vec<Vec<f64>> = (0..n).map(|i| values[i * n..i * n + n].to_vec()).collect();
        let assign = hungarian(&cost);
        let mut seen = vec![false; n];
        for &c in &assign {
            prop_assert!(!seen[c]);
            seen[c] = true;
        }
        let total: f64 = assign.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
        let mut best = f64::INFINITY;
        let mut perm: Vec<usize> = (0..n).collect();
        permutations(&mut perm, 0, &mut |p| {
            best = best.min(p.iter().enumerate().map(|(i, &j)| cost[i][j]).sum());
        });
        prop_assert!((total - best).abs() < 1e-9, "{} vs {}", total, best);
    }

    #[test]
    fn oscillator_frequencies_sum_rule(lambda in -0.99..0.99f64) {
        let [lo, hi] = coupled_oscillators_reference(lambda).unwrap();
        prop_assert!((lo * lo + hi * hi - 2.0).abs() < 1e-12);
        prop_assert!(lo <= hi);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn fock_tables_match_first_quantisation(n in 1usize..5, m in 1usize..6, fermion in any::<bool>()) {
        let st = if fermion { Statistics::Fermion } else { Statistics::Boson };
        prop_assume!(!(fermion && n > m));
        prop_assume!(space_size(n, m, st) <= 60.0);
        prop_assert!(fock_operator_defect(n, m, st).unwrap() < 1e-13);
    }
}

fn permutations(p: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == p.len() {
        f(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permutations(p, k + 1, f);
        p.swap(k, i);
    }
}
