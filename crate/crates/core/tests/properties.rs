use equilib_core::dense::{self, c, CMatrix};
use equilib_core::equilibrium::{leading_order_distance, ExactAverager};
use equilib_core::gram::build_gram;
use equilib_core::montecarlo::{
    dephase, haar_unitary, mc_average_distance_grid, DensityMatrix, McConfig, ProductState, RandomHamiltonian,
};
use equilib_core::permgroup::{enumerate_group, Permutation};
use equilib_core::spectrum::{Level, Spectrum, SpectrumFile};
use equilib_core::twirl::{dense_overlap_vector, FactorOperator, OperatorSum, TraceContext, TwirlKernel};
use nalgebra::DVector;
use proptest::prelude::*;

fn spectrum_strategy() -> impl Strategy<Value = Spectrum> {
    // 2×2 or 2×3 spaces, with a random degeneracy pattern.
    prop_oneof![Just((2usize, 2usize)), Just((2, 3))].prop_flat_map(|(ds, db)| {
        let d = ds * db;
        (proptest::collection::vec(0.0f64..3.0, d), proptest::collection::vec(0usize..3, d)).prop_map(
            move |(mut e, cut)| {
                e.sort_by(f64::total_cmp);
                // Merge state k into the previous level when cut[k] == 0.
                let mut levels: Vec<Level> = Vec::new();
                for (k, &x) in e.iter().enumerate() {
                    match levels.last_mut() {
                        Some(l) if k > 0 && cut[k] == 0 => l.degeneracy += 1,
                        _ => levels.push(Level::new(x + k as f64 * 1e-3, 1)),
                    }
                }
                Spectrum::new(ds, db, levels).unwrap()
            },
        )
    })
}

fn permutation_strategy(n: usize) -> impl Strategy<Value = Permutation> {
    Just((0..n).collect::<Vec<_>>())
        .prop_shuffle()
        .prop_map(|v| Permutation::new(v).unwrap())
}

fn random_matrix(d: usize, seed: u64) -> CMatrix {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    CMatrix::from_fn(d, d, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn permutation_group_laws(p in permutation_strategy(5), q in permutation_strategy(5), r in permutation_strategy(5)) {
        prop_assert_eq!(p.compose(&q).compose(&r), p.compose(&q.compose(&r)));
        prop_assert!(p.compose(&p.inverse()).is_identity());
        prop_assert_eq!(p.compose(&q).inverse(), q.inverse().compose(&p.inverse()));
        let n_cyc: usize = p.cycle_type().iter().sum();
        prop_assert_eq!(n_cyc, 5);
    }

    #[test]
    fn permutation_operators_represent_the_group(p in permutation_strategy(3), q in permutation_strategy(3)) {
        let vp = dense::permutation_operator(&p, 2);
        let vq = dense::permutation_operator(&q, 2);
        let vpq = dense::permutation_operator(&p.compose(&q), 2);
        prop_assert!(dense::max_abs(&(vp * vq - vpq)) < 1e-15);
    }

    #[test]
    fn exact_average_is_even_in_time(s in spectrum_strategy(), t in 0.0f64..4.0) {
        let avg = ExactAverager::new(s.system_dim(), s.bath_dim()).unwrap();
        let a = avg.distance(&s, t).unwrap();
        let b = avg.distance(&s, -t).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-12));
        prop_assert!(a >= -1e-12);
    }

    #[test]
    fn exact_average_ignores_energy_shift(s in spectrum_strategy(), t in 0.0f64..4.0, shift in -5.0f64..5.0) {
        let avg = ExactAverager::new(s.system_dim(), s.bath_dim()).unwrap();
        let a = avg.distance(&s, t).unwrap();
        let b = avg.distance(&s.shifted(shift), t).unwrap();
        prop_assert!((a - b).abs() < 1e-10);
        prop_assert!((leading_order_distance(&s, t) - leading_order_distance(&s.shifted(shift), t)).abs() < 1e-10);
    }

    #[test]
    fn exact_average_is_independent_of_the_product_state(s in spectrum_strategy(), t in 0.0f64..4.0, seed in 0u64..1000) {
        let (ds, db) = (s.system_dim(), s.bath_dim());
        let v = |n: usize, k: u64| {
            let m = random_matrix(n, seed.wrapping_mul(31).wrapping_add(k));
            DVector::from_fn(n, |i, _| m[(i, 0)])
        };
        let other = ProductState::new(v(ds, 1), v(db, 2)).unwrap();
        let a = ExactAverager::new(ds, db).unwrap().distance(&s, t).unwrap();
        let b = ExactAverager::with_initial_state(&other).unwrap().distance(&s, t).unwrap();
        prop_assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn per_sample_distance_ignores_energy_shift(s in spectrum_strategy(), t in 0.0f64..4.0, seed in 0u64..1000) {
        let u = haar_unitary(s.dim(), seed);
        let a = equilib_core::montecarlo::evolve_and_measure(&s, &u, t).unwrap();
        let b = equilib_core::montecarlo::evolve_and_measure(&s.shifted(2.5), &u, t).unwrap();
        let dense = equilib_core::montecarlo::evolve_and_measure_dense(&s, &u, t).unwrap();
        prop_assert!((a - b).abs() < 1e-10);
        prop_assert!((a - dense).abs() < 1e-12);
    }

    #[test]
    fn dephasing_is_idempotent_and_trace_preserving(s in spectrum_strategy(), seed in 0u64..1000) {
        let h = RandomHamiltonian::sample(s.clone(), seed, 0);
        let a = random_matrix(s.dim(), seed);
        let rho = &a * a.adjoint();
        let tr = rho.trace();
        let rho = DensityMatrix::new(rho / tr).unwrap();
        let once = dephase(&rho, &h.projectors()).unwrap();
        let twice = dephase(&once, &h.projectors()).unwrap();
        prop_assert!((once.trace() - c(1.0, 0.0)).norm() < 1e-12);
        prop_assert!(dense::max_abs(&(twice.entries() - once.entries())) < 1e-12);
        let rs = rho.partial_trace_bath(s.system_dim(), s.bath_dim()).unwrap();
        prop_assert!((rs.trace() - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn overlaps_are_invariant_under_collective_conjugation(seed in 0u64..1000) {
        // tr(U^{⊗3} X U^{†⊗3} V_π) = tr(X V_π) since V_π commutes with U^{⊗3}.
        let d = 2;
        let group = enumerate_group(3).unwrap();
        let x: Vec<CMatrix> = (0..3).map(|k| random_matrix(d, seed * 3 + k)).collect();
        let u = haar_unitary(d, seed);
        let ux: Vec<CMatrix> = x.iter().map(|m| &u * m * u.adjoint()).collect();
        let a = dense_overlap_vector(&dense::kron_all(&x), &group, d).unwrap();
        let b = dense_overlap_vector(&dense::kron_all(&ux), &group, d).unwrap();
        for (p, q) in a.components.iter().zip(&b.components) {
            prop_assert!((p - q).norm() < 1e-12);
        }
    }

    #[test]
    fn cycle_overlaps_match_dense_traces(seed in 0u64..1000) {
        let d = 2;
        let kernel = TwirlKernel::new(3, d as u64).unwrap();
        let x: Vec<CMatrix> = (0..3).map(|k| random_matrix(d, seed * 7 + k)).collect();
        let op = OperatorSum::product(x.iter().cloned().map(FactorOperator::Dense).collect());
        let fast = kernel.overlap(&op, &TraceContext::dense(d)).unwrap();
        let slow = dense_overlap_vector(&dense::kron_all(&x), kernel.group(), d).unwrap();
        for (p, q) in fast.components.iter().zip(&slow.components) {
            prop_assert!((p - q).norm() < 1e-13);
        }
    }

    #[test]
    fn spectrum_files_round_trip(s in spectrum_strategy()) {
        let parsed = SpectrumFile::parse(&s.to_json()).unwrap();
        prop_assert_eq!(parsed.energies(), s.energies());
        prop_assert_eq!(parsed.degeneracies(), s.degeneracies());
    }
}

#[test]
fn pseudoinverse_support_law_for_all_small_cases() {
    for n in [3, 4] {
        for d in 1..=5u64 {
            let g = build_gram(n, d).unwrap();
            assert_eq!(g.entries() * &g.pseudoinverse(), g.support_projector(), "n={n} d={d}");
        }
    }
}

#[test]
fn monte_carlo_is_seed_deterministic_and_state_independent() {
    let s = Spectrum::nondegenerate(2, 2, &[0.0, 0.413, 1.129, 1.874]).unwrap();
    let times = [0.5, 1.5];
    let cfg = McConfig::new(3000, 11);
    let a = mc_average_distance_grid(&s, &times, &cfg).unwrap();
    let b = mc_average_distance_grid(&s, &times, &cfg).unwrap();
    assert_eq!(a.hs_sq, b.hs_sq);
    let plus = DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 1.0)]);
    let other = McConfig {
        initial: Some(ProductState::new(plus.clone(), plus).unwrap()),
        ..McConfig::new(3000, 12)
    };
    let o = mc_average_distance_grid(&s, &times, &other).unwrap();
    for (x, y) in a.hs_sq.iter().zip(&o.hs_sq) {
        let se = (x.stderr.powi(2) + y.stderr.powi(2)).sqrt();
        assert!((x.mean - y.mean).abs() <= 4.0 * se, "{x:?} vs {y:?}");
    }
}
