mod common;

use proptest::prelude::*;
use wpir_core::converse::indicator_reduce;
use wpir_core::metrics::{maxl_leakage, maxl_sum, mi_leakage, mine_leakage};
use wpir_core::prob::{self, ratio};

const TOL: f64 = 1e-12;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn leakage_within_range(mech in common::mechanism()) {
        let top = (mech.num_files() as f64).log2() + TOL;
        for v in [mi_leakage(&mech).unwrap(), maxl_leakage(&mech).unwrap()] {
            prop_assert!((-TOL..=top).contains(&v), "{v} outside [0, {top}]");
        }
    }

    #[test]
    fn mine_equals_maxl(mech in common::mechanism()) {
        let a = mine_leakage(&mech).unwrap();
        let b = maxl_leakage(&mech).unwrap();
        prop_assert!((a - b).abs() <= TOL, "mine {a} maxl {b}");
    }

    #[test]
    fn merging_queries_never_leaks_more(
        mech in common::mechanism(),
        labels in prop::collection::vec(0usize..5, 20),
    ) {
        let groups: Vec<usize> = (0..mech.num_queries()).map(|q| labels[q]).collect();
        let merged = mech.coarsen(&groups, 5).unwrap();
        prop_assert!(mi_leakage(&merged).unwrap() <= mi_leakage(&mech).unwrap() + TOL);
        prop_assert!(maxl_leakage(&merged).unwrap() <= maxl_leakage(&mech).unwrap() + TOL);

        let reduced = indicator_reduce(&mech).unwrap();
        prop_assert!(mi_leakage(&reduced).unwrap() <= mi_leakage(&mech).unwrap() + TOL);
        prop_assert!(maxl_leakage(&reduced).unwrap() <= maxl_leakage(&mech).unwrap() + TOL);
    }

    #[test]
    fn leakage_is_convex_in_the_mechanism((a, b) in common::mechanism_pair()) {
        for (n, d) in [(1, 4), (1, 2), (3, 4)] {
            let lambda = ratio(n, d);
            let l = n as f64 / d as f64;
            let mix = common::blend(&a, &b, &lambda);
            let mi_mix = mi_leakage(&mix).unwrap();
            let mi_line = (1.0 - l) * mi_leakage(&a).unwrap() + l * mi_leakage(&b).unwrap();
            prop_assert!(mi_mix <= mi_line + TOL, "MI {mi_mix} > {mi_line}");
            // exact for the MaxL sum
            let keep = ratio(d - n, d);
            let line = &keep * maxl_sum(&a).unwrap() + &lambda * maxl_sum(&b).unwrap();
            prop_assert!(maxl_sum(&mix).unwrap() <= line);
        }
    }
}

#[test]
fn deterministic_rows_leak_everything() {
    let s = wpir_core::schemes::weight_scheme(5, 1).unwrap();
    assert!((mi_leakage(s.mechanism()).unwrap() - 5f64.log2()).abs() < TOL);
    assert_eq!(maxl_sum(s.mechanism()).unwrap(), prob::int(5));
}
