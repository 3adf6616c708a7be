use proptest::prelude::*;
use wpir_core::capacity::{
    capacity_maxl, capacity_mi, capacity_upper_bound, curve, min_download_maxl, min_download_mi, rho_lb_maxl,
    rho_lb_mi, CurveKind, CurveSpec, PiecewiseBound,
};
use wpir_core::Metric;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn lower_bounds_invert_capacity(m in 2u64..=10, rho_bar in 0.0f64..=1.0) {
        let bits = rho_bar * (m as f64).log2();
        let d = 1.0 / capacity_mi(m, rho_bar).unwrap();
        prop_assert!((rho_lb_mi(m, d).unwrap() - bits).abs() <= 1e-9);
        let d = 1.0 / capacity_maxl(m, rho_bar).unwrap();
        prop_assert!((rho_lb_maxl(m, d).unwrap() - bits).abs() <= 1e-9);
    }

    #[test]
    fn mi_dominates_maxl_and_both_stay_below_the_bound(m in 2u64..=1000, rho_bar in 0.0f64..=1.0) {
        let mi = capacity_mi(m, rho_bar).unwrap();
        let maxl = capacity_maxl(m, rho_bar).unwrap();
        let ub = capacity_upper_bound(m, rho_bar).unwrap();
        prop_assert!(mi >= maxl - 1e-12);
        prop_assert!(mi <= ub + 1e-12 && maxl <= ub + 1e-12);
    }

    #[test]
    fn download_mi_is_convex_in_bits(m in 2u64..=10, a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let mid = min_download_mi(m, (a + b) / 2.0).unwrap();
        let chord = (min_download_mi(m, a).unwrap() + min_download_mi(m, b).unwrap()) / 2.0;
        prop_assert!(mid <= chord + 1e-9);
    }

    #[test]
    fn download_maxl_is_convex_in_two_to_the_rho(m in 2u64..=10, a in 1.0f64..=10.0, b in 1.0f64..=10.0) {
        let mf = m as f64;
        let (a, b) = (a.min(mf), b.min(mf));
        // v = 2^rho, rho_bar = log2 v / log2 M
        let at = |v: f64| min_download_maxl(m, v.log2() / mf.log2()).unwrap();
        prop_assert!(at((a + b) / 2.0) <= (at(a) + at(b)) / 2.0 + 1e-9);
    }

    #[test]
    fn capacity_is_monotone(m in 2u64..=50, a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        for kind in [CurveKind::Mi, CurveKind::MaxL, CurveKind::UpperBound] {
            prop_assert!(kind.eval(m, lo).unwrap() <= kind.eval(m, hi).unwrap() + 1e-12);
        }
    }
}

#[test]
fn mi_slopes_strictly_increase() {
    for m in 3..=20 {
        let b = PiecewiseBound::new(Metric::Mi, m);
        assert!(b.slopes.windows(2).all(|s| s[0] < s[1]), "M={m}");
        let b = PiecewiseBound::new(Metric::MaxL, m);
        assert!(b.slopes.windows(2).all(|s| s[0] < s[1]), "M={m}");
    }
}

#[test]
fn breakpoints_are_exact() {
    for m in 2..=12u64 {
        for w in 1..=m {
            let rho_bar = 1.0 - (w as f64).log2() / (m as f64).log2();
            let want = 1.0 / w as f64;
            assert!((capacity_mi(m, rho_bar).unwrap() - want).abs() < 1e-12);
            assert!((capacity_maxl(m, rho_bar).unwrap() - want).abs() < 1e-12);
        }
    }
}

#[test]
fn upper_bound_at_a_million_files() {
    assert_eq!(capacity_upper_bound(1_000_000, 0.5).unwrap(), 1e-3);
}

#[test]
fn one_file_is_free() {
    for rho_bar in [0.0, 0.3, 1.0] {
        assert_eq!(capacity_mi(1, rho_bar).unwrap(), 1.0);
        assert_eq!(capacity_maxl(1, rho_bar).unwrap(), 1.0);
    }
}

#[test]
fn curve_shapes() {
    let spec = CurveSpec { num_files: 2, kind: CurveKind::Mi, normalized: true, samples: 3, breakpoints: true };
    let pts = curve(&spec).unwrap();
    assert_eq!(pts.len(), 3);
    assert!((pts[0].capacity - 0.5).abs() < 1e-12 && (pts[2].capacity - 1.0).abs() < 1e-12);

    let spec = CurveSpec { num_files: 3, kind: CurveKind::MaxL, normalized: true, samples: 101, breakpoints: true };
    let pts = curve(&spec).unwrap();
    assert_eq!(pts.len(), 102);
    assert_eq!(pts.iter().filter(|p| p.is_breakpoint).count(), 2);
    let knee = 1.0 - 1.0 / 3f64.log2();
    assert!(pts.iter().any(|p| p.is_breakpoint && (p.rho_bar - knee).abs() < 1e-12 && (p.capacity - 0.5).abs() < 1e-12));
    assert!(pts.windows(2).all(|w| w[0].rho_bar < w[1].rho_bar));
}
