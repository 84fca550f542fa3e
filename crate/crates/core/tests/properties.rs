use proptest::prelude::*;

use ellipsephic::congruence::{ClassNorms, WeightAssignment};
use ellipsephic::export::{self, parse_csv, write_csv};
use ellipsephic::meanvalue::{brute_force_count, diagonal_count, mitm_count, CountOptions, PolySystem};
use ellipsephic::{waring, Budget, DigitSet};

fn digit_set() -> impl Strategy<Value = DigitSet> {
    prop_oneof![
        Just(DigitSet::new(3, [0, 1]).unwrap()),
        Just(DigitSet::new(3, [1, 2]).unwrap()),
        Just(DigitSet::new(5, [0, 1, 4]).unwrap()),
        Just(DigitSet::new(7, [0, 2, 3, 6]).unwrap()),
    ]
}

fn system(k: u32) -> PolySystem {
    PolySystem::powers(&(1..=k).collect::<Vec<_>>()).unwrap()
}

fn exact(system: &PolySystem, s: usize, members: &[u64]) -> num_bigint::BigUint {
    mitm_count(system, s, members, &CountOptions::default())
        .unwrap()
        .exact()
        .unwrap()
        .clone()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn enumeration_matches_membership(set in digit_set(), x in 0u64..3000) {
        let e = set.enumerate(x).unwrap();
        prop_assert_eq!(e.len() as u64, set.count_members(x).unwrap());
        prop_assert!(e.members.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(e.members.iter().all(|&n| n >= 1 && n <= x && set.is_member(n)));
        prop_assert!(e.len() as u128 <= e.size_bound());
    }

    #[test]
    fn mitm_agrees_with_brute_force(set in digit_set(), x in 1u64..60, s in 1usize..=3, k in 1u32..=2) {
        let members = set.enumerate(x).unwrap().members;
        let sys = system(k);
        let opts = CountOptions::default();
        let b = brute_force_count(&sys, s, &members, &opts).unwrap();
        let m = mitm_count(&sys, s, &members, &opts).unwrap();
        prop_assert_eq!(b.exact(), m.exact());
    }

    #[test]
    fn count_is_independent_of_member_order(
        members in proptest::collection::btree_set(1u64..500, 1..12)
            .prop_map(|m| m.into_iter().collect::<Vec<_>>())
            .prop_shuffle(),
        s in 1usize..=3,
    ) {
        let mut sorted = members.clone();
        sorted.sort_unstable();
        let sys = system(2);
        prop_assert_eq!(exact(&sys, s, &members), exact(&sys, s, &sorted));
    }

    #[test]
    fn vinogradov_counts_are_translation_invariant(
        members in proptest::collection::btree_set(1u64..200, 1..10),
        shift in 1u64..1000,
        s in 1usize..=3,
        k in 1u32..=3,
    ) {
        let members: Vec<u64> = members.into_iter().collect();
        let shifted: Vec<u64> = members.iter().map(|x| x + shift).collect();
        let sys = system(k);
        prop_assert_eq!(exact(&sys, s, &members), exact(&sys, s, &shifted));
    }

    #[test]
    fn diagonal_bounds(set in digit_set(), x in 1u64..200, s in 1usize..=3, k in 1u32..=3) {
        let members = set.enumerate(x).unwrap().members;
        let count = exact(&system(k), s, &members);
        let diag = diagonal_count(s, members.len() as u64);
        prop_assert!(count >= diag);
        if k as usize >= s {
            prop_assert_eq!(count, diag);
        }
    }

    #[test]
    fn modular_count_dominates_exact(set in digit_set(), x in 1u64..120, s in 1usize..=2, m in 2u64..50) {
        let members = set.enumerate(x).unwrap().members;
        let sys = system(2);
        let exact_count = exact(&sys, s, &members);
        let modular = mitm_count(&sys, s, &members, &CountOptions::modular(m)).unwrap();
        prop_assert!(modular.exact().unwrap() >= &exact_count);
    }

    #[test]
    fn class_norms_partition_float_weights(
        set in digit_set(),
        raw in proptest::collection::vec(0.01f64..=1.0, 1..40),
        a in 0u32..4,
        extra in 0u32..3,
    ) {
        let members = set.enumerate(10_000).unwrap().members;
        let pairs: Vec<(u64, f64)> = members.iter().copied().zip(raw).collect();
        let w = WeightAssignment::new(pairs).unwrap();
        let coarse = ClassNorms::new(&w, set.base(), a).unwrap();
        let fine = ClassNorms::new(&w, set.base(), a + extra).unwrap();
        prop_assert!(coarse.partition_holds(&w));
        prop_assert!(coarse.refinement_holds(&fine));
    }

    #[test]
    fn waring_tables_reconcile(set in digit_set(), s in 1usize..=3, k in 1u32..=3, x in 1u64..2000) {
        let t = waring::representation_table(&set, s, k, x, &Budget::default()).unwrap();
        prop_assert!(t.reconciles());
        prop_assert!(waring::cauchy_bound_check(&t).holds);
        prop_assert!(t.rows().all(|(n, _)| n <= x));
    }

    #[test]
    fn csv_round_trips(rows in proptest::collection::vec((any::<u64>(), any::<u32>()), 0..20), config in "[a-z0-9=;, ]{0,30}") {
        let rows: Vec<Vec<String>> = rows.iter().map(|(n, r)| vec![n.to_string(), r.to_string()]).collect();
        let mut buf = Vec::new();
        write_csv(&mut buf, &config, &export::WARING, rows.clone()).unwrap();
        let parsed = parse_csv(std::str::from_utf8(&buf).unwrap()).unwrap();
        prop_assert_eq!(parsed.config, config);
        prop_assert_eq!(parsed.rows, rows);
    }
}
