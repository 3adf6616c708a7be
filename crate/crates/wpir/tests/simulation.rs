use wpir::sim::{audit_leakage, run_trials, Requests};
use wpir::generate_database;
use wpir_core::prob::ratio;
use wpir_core::schemes::{full_download_pir, mix_schemes, partition_scheme, scheme_for_leakage, weight_scheme};
use wpir_core::{Metric, MixSpec};

#[test]
fn every_scheme_every_database() {
    for m in 1..=6usize {
        let mut schemes: Vec<_> = (1..=m).map(|w| weight_scheme(m, w).unwrap()).collect();
        for eta in (1..=m).filter(|e| m % e == 0) {
            schemes.push(partition_scheme(m, eta, &full_download_pir(m / eta).unwrap()).unwrap());
        }
        if m > 1 {
            schemes.push(scheme_for_leakage(m, Metric::Mi, 0.5).unwrap());
        }
        for s in &schemes {
            for beta in [1, 2, 4] {
                for x in [2, 256] {
                    let db = generate_database(m, beta, x, 77).unwrap();
                    let r = run_trials(s, &db, &Requests::Uniform, 2_000, 3, true).unwrap();
                    assert!(r.all_retrieved());
                    assert!(r.cost_within(4.0));
                }
            }
        }
    }
}

#[test]
fn full_download_answers_everything() {
    let s = full_download_pir(4).unwrap();
    let db = generate_database(4, 5, 256, 0).unwrap();
    let r = run_trials(&s, &db, &Requests::Uniform, 100, 0, false).unwrap();
    assert_eq!(r.empirical_cost, 4.0);
    assert_eq!(s.answer(0, &db).len(), 4 * 5);
}

#[test]
fn mixture_cost_converges() {
    let s = mix_schemes(&MixSpec {
        lambda: ratio(1, 2),
        left: weight_scheme(3, 2).unwrap(),
        right: weight_scheme(3, 1).unwrap(),
    })
    .unwrap();
    let db = generate_database(3, 1, 2, 5).unwrap();
    for trials in [1_000, 10_000, 100_000] {
        let r = run_trials(&s, &db, &Requests::Uniform, trials, 2024, true).unwrap();
        assert!(r.cost_within(4.0), "{trials}: {} +- {}", r.empirical_cost, r.cost_std_err);
        // binomial standard error 0.5 / sqrt(n)
        let se = 0.5 / (trials as f64).sqrt();
        assert!((r.cost_std_err - se).abs() < 0.05 * se);
    }
    let r = run_trials(&s, &db, &Requests::Uniform, 100_000, 1, true).unwrap();
    assert!(audit_leakage(&r, &s).unwrap().consistent);
}

#[test]
fn reproducible_by_seed() {
    let s = weight_scheme(5, 3).unwrap();
    let db = generate_database(5, 2, 8, 1).unwrap();
    let a = run_trials(&s, &db, &Requests::Uniform, 5_000, 42, true).unwrap();
    let b = run_trials(&s, &db, &Requests::Uniform, 5_000, 42, false).unwrap();
    let c = run_trials(&s, &db, &Requests::Uniform, 5_000, 43, true).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.counts, c.counts);
}

#[test]
fn single_query_is_trivially_consistent() {
    let s = full_download_pir(3).unwrap();
    let db = generate_database(3, 1, 2, 0).unwrap();
    let r = run_trials(&s, &db, &Requests::Uniform, 50, 0, false).unwrap();
    let v = audit_leakage(&r, &s).unwrap();
    assert!(v.consistent);
    assert_eq!(v.dof, 0);
}

#[test]
fn mismatched_database() {
    let s = weight_scheme(3, 2).unwrap();
    let db = generate_database(4, 1, 2, 0).unwrap();
    assert!(run_trials(&s, &db, &Requests::Uniform, 10, 0, false).is_err());
}
