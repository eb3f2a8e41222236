use std::f64::consts::TAU;

use num_bigint::BigUint;
use num_complex::Complex64;
use proptest::prelude::*;
use stabex::binary_symplectic::{symplectic_from_index, symplectic_order};
use stabex::clifford_dictionaries::{pair_count, DiagonalCliffordCode};
use stabex::extent_pipeline::{
    compute_extent, synthesis_lower_bound, DictionaryChoice, ExtentOptions, GateFamily, WeakReduction,
};
use stabex::gate_library::{
    hypergraph_unitary, multi_controlled_phase, qft_block, t_extent, Angle, DiagonalUnitary, Hypergraph,
};
use stabex::operator::DenseOperator;
use stabex::symmetry_reduction::{symmetric_group, twirl_code};

fn code_strategy(max_n: usize) -> impl Strategy<Value = DiagonalCliffordCode> {
    (1..=max_n).prop_flat_map(|n| {
        (prop::collection::vec(0u8..4, n), 0u32..(1u32 << pair_count(n)))
            .prop_map(move |(a, b)| DiagonalCliffordCode::new(n, &a, b).unwrap())
    })
}

fn perm_strategy(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

/// Random diagonal unitary with exact eighth-turn or float phases.
fn diagonal_strategy(n: usize) -> impl Strategy<Value = DiagonalUnitary> {
    let phase = prop_oneof![(0i64..8).prop_map(|k| Angle::turns(k, 8)), (0.0..1.0f64).prop_map(|t| Angle::from_radians(t * TAU))];
    prop::collection::vec(phase, 1 << n).prop_map(move |p| DiagonalUnitary::from_phases(n, p).unwrap())
}

fn no_weak() -> ExtentOptions {
    ExtentOptions { weak_reduce: WeakReduction::Off, ..ExtentOptions::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn symplectic_matrices_preserve_the_form(n in 1usize..=3, seed in any::<u64>()) {
        let order = symplectic_order(n).unwrap();
        let idx = BigUint::from(seed) % &order;
        prop_assert!(symplectic_from_index(n, &idx).unwrap().is_symplectic());
    }

    #[test]
    fn code_relabeling_matches_operator_conjugation(
        (code, perm) in code_strategy(4).prop_flat_map(|c| { let n = c.n(); (Just(c), perm_strategy(n)) })
    ) {
        let lhs = code.permuted(&perm).to_operator();
        let rhs = code.to_operator().conjugate_by_permutation(&perm);
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-15);
        prop_assert_eq!(code.permuted(&perm).cz_count(), code.cz_count());
    }

    #[test]
    fn twirls_are_constant_on_orbits(
        (code, perm) in code_strategy(4).prop_flat_map(|c| { let n = c.n(); (Just(c), perm_strategy(n)) })
    ) {
        let n = code.n();
        let gens = symmetric_group(n).unwrap();
        let a = twirl_code(&code, &gens).unwrap();
        let b = twirl_code(&code.permuted(&perm), &gens).unwrap();
        prop_assert_eq!(&a, &b);
        // the twirl is itself permutation invariant
        let op = DenseOperator::from_diagonal(&a.values()).unwrap();
        prop_assert!(op.conjugate_by_permutation(&perm).max_abs_diff(&op) < 1e-15);
    }

    #[test]
    fn diagonal_unitaries_have_unit_entries(u in (1usize..=4).prop_flat_map(diagonal_strategy)) {
        prop_assert!(u.entries().iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn controlled_phase_is_periodic_in_turns(n in 1usize..=4, num in -40i64..40, den in 1i64..33) {
        let a = Angle::turns(num, den);
        let b = Angle::turns(num + den, den);
        prop_assert_eq!(multi_controlled_phase(n, a).unwrap(), multi_controlled_phase(n, b).unwrap());
    }

    #[test]
    fn hypergraph_states_follow_relabeling(
        (h, perm) in (2usize..=4)
            .prop_flat_map(|n| (Just(n), prop::collection::vec(prop::collection::btree_set(0..n, 1..=n), 0..6), perm_strategy(n)))
            .prop_map(|(n, edges, perm)| {
                let edges: Vec<Vec<usize>> = edges.into_iter().map(|e| e.into_iter().collect()).collect();
                (Hypergraph::new(n, edges).unwrap(), perm)
            })
    ) {
        let u = hypergraph_unitary(&h).to_dense();
        let moved = hypergraph_unitary(&h.relabeled(&perm)).to_dense();
        prop_assert!(moved.max_abs_diff(&u.conjugate_by_permutation(&perm)) == 0.0);
    }
}

#[test]
fn qft_blocks_act_trivially_when_the_control_is_clear() {
    for k in 1..=5 {
        let u = qft_block(k).unwrap();
        let half = 1 << k;
        assert!(u.entries()[..half].iter().all(|z| *z == Complex64::new(1.0, 0.0)), "k={k}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn synthesis_bound_handles_boundaries(k in 1u32..=20, sign in prop::bool::ANY) {
        let xi = t_extent().powi(k as i32) + if sign { 1e-9 } else { -1e-9 };
        prop_assert_eq!(synthesis_lower_bound(xi).unwrap(), k);
    }

    #[test]
    fn clifford_targets_have_unit_extent(code in code_strategy(3)) {
        let r = compute_extent(&code.to_operator(), "c", &no_weak()).unwrap();
        prop_assert!((r.extent - 1.0).abs() < 1e-7, "{}", r.extent);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sweep_is_symmetric_under_reflection(n in 1usize..=3, theta in 0.0..TAU) {
        let o = ExtentOptions { decompose: false, ..ExtentOptions::default() };
        let a = compute_extent(&GateFamily::MultiControlledPhase.unitary(n, theta).unwrap(), "a", &o).unwrap();
        let b = compute_extent(&GateFamily::MultiControlledPhase.unitary(n, TAU - theta).unwrap(), "b", &o).unwrap();
        prop_assert!((a.extent - b.extent).abs() < 1e-5, "{} vs {}", a.extent, b.extent);
    }

    #[test]
    fn decompositions_resynthesize_the_target(u in (1usize..=3).prop_flat_map(diagonal_strategy)) {
        let target = u.to_dense();
        let r = compute_extent(&target, "u", &ExtentOptions::default()).unwrap();
        let back = r.reconstruct().unwrap();
        prop_assert!(back.max_abs_diff(&target) <= 10.0 * 1e-8 * 2.0, "{}", back.max_abs_diff(&target));
    }

    #[test]
    fn extent_is_homogeneous(u in (1usize..=3).prop_flat_map(diagonal_strategy), re in -2.0..2.0f64, im in -2.0..2.0f64) {
        prop_assume!(re.hypot(im) > 0.1);
        let x = Complex64::new(re, im);
        let o = no_weak();
        let a = compute_extent(&u.to_dense(), "u", &o).unwrap();
        let b = compute_extent(&u.to_dense().scale(x), "xu", &o).unwrap();
        prop_assert!((b.extent - x.norm_sqr() * a.extent).abs() < 1e-5 * (1.0 + b.extent));
    }

    #[test]
    fn diagonal_clifford_invariance(u in diagonal_strategy(3), c in code_strategy(3), d in code_strategy(3)) {
        prop_assume!(c.n() == 3 && d.n() == 3);
        let o = no_weak();
        let t = u.to_dense();
        let moved = c.to_operator().matmul(&t).unwrap().matmul(&d.to_operator()).unwrap();
        let a = compute_extent(&t, "u", &o).unwrap();
        let b = compute_extent(&moved, "cud", &o).unwrap();
        prop_assert!((a.extent - b.extent).abs() < 1e-5);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn routing_matches_the_full_dictionary(u in diagonal_strategy(2)) {
        let t = u.to_dense();
        let auto = compute_extent(&t, "auto", &no_weak()).unwrap();
        prop_assert!(auto.dictionary.is_diagonal());
        let full = ExtentOptions { dictionary: DictionaryChoice::Full, decompose: false, ..no_weak() };
        let f = compute_extent(&t, "full", &full).unwrap();
        prop_assert!((auto.extent - f.extent).abs() < 1e-6, "{} vs {}", auto.extent, f.extent);
    }

    #[test]
    fn repeated_solves_agree(u in diagonal_strategy(3)) {
        let a = compute_extent(&u.to_dense(), "u", &ExtentOptions::default()).unwrap();
        let b = compute_extent(&u.to_dense(), "u", &ExtentOptions::default()).unwrap();
        prop_assert!((a.extent - b.extent).abs() < 1e-9);
        prop_assert_eq!(a.decomposition, b.decomposition);
    }
}
