use wpir_core::capacity::{maxl_budget_exact, rho_lb_maxl, rho_lb_mi, segment_for_cost};
use wpir_core::converse::lp::closed_form_relative_cost;
use wpir_core::converse::rd::expected_segment;
use wpir_core::converse::{
    best_rd_bound, feasibility_check, grid_oracle, lp_verify_optimality, rd_bound_eval, LpVar, RdBoundParams,
};
use wpir_core::metrics::{download_cost, maxl_leakage, mi_leakage};
use wpir_core::prob::{self, ratio, Ratio};
use wpir_core::schemes::{full_download_pir, partition_scheme, scheme_for_leakage, weight_scheme};
use wpir_core::Metric;

/// 50 costs in `[1, M]`: every integer plus evenly spread fractions.
fn costs(m: i64) -> Vec<Ratio> {
    let mut out: Vec<Ratio> = (1..=m).map(prob::int).collect();
    let mut k = 0;
    while out.len() < 50 {
        k += 1;
        out.push(prob::int(1) + ratio((m - 1) * k, 51 - m));
        out.retain(|d| d <= &prob::int(m));
        if k > 100 {
            break;
        }
    }
    out.sort();
    out.dedup();
    out
}

#[test]
fn rd_bound_matches_closed_form() {
    for m in 2..=10u64 {
        for d in costs(m as i64) {
            let d = prob::to_f64(&d);
            let (best, w) = best_rd_bound(m, d).unwrap();
            assert!((best - rho_lb_mi(m, d).unwrap()).abs() <= 1e-12, "M={m} D={d}");
            assert_eq!(w, expected_segment(m, d), "M={m} D={d}");
        }
        // midpoints
        for w in 2..=m {
            let d = w as f64 - 0.5;
            assert_eq!(best_rd_bound(m, d).unwrap().1, w);
        }
    }
}

#[test]
fn rd_multipliers_feasible() {
    for m in 2..=20 {
        for w in 2..=m {
            feasibility_check(m, &RdBoundParams::for_segment(w)).unwrap();
        }
    }
}

#[test]
fn rd_bound_below_every_scheme() {
    for m in 2..=6usize {
        let mut schemes: Vec<_> = (1..=m).map(|w| weight_scheme(m, w).unwrap()).collect();
        for eta in (1..=m).filter(|e| m % e == 0) {
            schemes.push(partition_scheme(m, eta, &full_download_pir(m / eta).unwrap()).unwrap());
        }
        schemes.push(scheme_for_leakage(m, Metric::MaxL, 0.6).unwrap());
        for s in &schemes {
            let d = prob::to_f64(&download_cost(s).unwrap());
            let leak = mi_leakage(s.mechanism()).unwrap();
            for w in 2..=m as u64 {
                assert!(rd_bound_eval(m as u64, d, w).unwrap() <= leak + 1e-12);
            }
        }
    }
}

#[test]
fn lp_certificates() {
    for m in 2..=20i64 {
        for d in costs(m) {
            let v = lp_verify_optimality(m as u64, &d).unwrap();
            assert!(v.ok, "M={m} D={}", prob::format_ratio(&d));
            assert_eq!(v.objective, maxl_budget_exact(m as u64, &d).unwrap());
            let bound = rho_lb_maxl(m as u64, prob::to_f64(&d)).unwrap();
            assert!((prob::log2(&v.objective) - bound).abs() < 1e-9);
            let w = match v.basis {
                [LpVar::Y(2), LpVar::Z1] => 2,
                [LpVar::Y(_), LpVar::Y(w)] => w,
                other => panic!("unexpected basis {other:?}"),
            };
            for (var, r) in &v.relative_costs {
                assert_eq!(*r, closed_form_relative_cost(w, *var), "M={m} D={} {var}", prob::format_ratio(&d));
            }
        }
    }
}

#[test]
fn segments_agree_between_modules() {
    for m in 2..=10u64 {
        for d in costs(m as i64) {
            let f = prob::to_f64(&d);
            assert_eq!(segment_for_cost(m, f), wpir_core::capacity::ceil_segment(m, &d).max(2));
        }
    }
}

#[test]
fn oracle_small_cases() {
    let r = grid_oracle(2, Metric::Mi, &ratio(3, 2), 64).unwrap();
    assert!(r.min_bits >= rho_lb_mi(2, 1.5).unwrap() - 1e-12);
    assert!(r.min_bits <= 0.5 + 0.02);
    assert!(r.download_cost <= ratio(3, 2));

    let r = grid_oracle(2, Metric::MaxL, &prob::int(2), 8).unwrap();
    assert_eq!(r.min_bits, 0.0);

    let r = grid_oracle(3, Metric::MaxL, &ratio(5, 3), 12).unwrap();
    assert!((r.min_bits - 1.0).abs() <= 0.05);
    // the argmin is a real mechanism with the reported leakage
    let mech = r.mechanism();
    assert!((maxl_leakage(&mech).unwrap() - r.min_bits).abs() < 1e-12);
}
