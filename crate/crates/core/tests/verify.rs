use proptest::prelude::*;
use rug::Rational;

use etacert::bounds::{ExceptionKind, Method, Outcome};
use etacert::exact::exact_sequence;
use etacert::verify::{
    alpha0_interval, base_decomposition, closure, plan_cft, verify_hn_at, FiniteMethod, Verifier, VerifyConfig,
};

fn ints(v: &[u64]) -> Vec<Rational> {
    v.iter().map(|&x| Rational::from(x)).collect()
}

#[test]
fn closure_of_base_covers_everything_from_three() {
    let c = closure(&ints(&[3, 4, 5]), &Rational::from(1000)).unwrap();
    assert_eq!(c.covered(), ints(&(3..=1000).collect::<Vec<_>>()));
}

#[test]
fn large_exponents_resolve_by_closure() {
    let mut v = Verifier::new(VerifyConfig {
        base_n_max: 200,
        ..VerifyConfig::default()
    });
    for k in 6..=30u64 {
        let plan = plan_cft(k, v.config()).unwrap();
        assert!(matches!(plan.finite_method, FiniteMethod::Closure { .. }), "k={k}");
        let parts = base_decomposition(k).unwrap();
        assert_eq!(parts.iter().map(|(b, j)| b * j).sum::<u64>(), k);
        let cert = v.verify_cft(k).unwrap();
        assert_eq!(cert.method, Method::Closure);
        assert!(cert.outcome.is_verified());
        assert!(!cert.premises.is_empty());
    }
}

/// `(n, ℓ)` with `n > ℓ ≥ 0`, `n ≤ n_max`, and a negative defect.
fn violating_pairs(alpha: &Rational, n_max: u64) -> Vec<(u64, u64)> {
    let p = exact_sequence(alpha, n_max + 1).unwrap();
    let mut out = Vec::new();
    for n in 1..=n_max {
        for ell in 0..n {
            let lhs = Rational::from(p.get(n - 1) * p.get(ell + 1));
            let rhs = Rational::from(p.get(n) * p.get(ell));
            if lhs < rhs {
                out.push((n, ell));
            }
        }
    }
    out
}

fn small_set() -> impl Strategy<Value = Vec<u64>> {
    prop::collection::btree_set(2u64..15, 1..4).prop_map(|s| s.into_iter().collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn closure_matches_brute_force(base in small_set(), h in 2u64..60) {
        let c = closure(&ints(&base), &Rational::from(h)).unwrap();
        let mut reach = vec![false; h as usize + 1];
        reach[0] = true;
        for v in 1..=h as usize {
            reach[v] = base.iter().any(|&b| b as usize <= v && reach[v - b as usize]);
        }
        let want: Vec<u64> = (1..=h).filter(|&v| reach[v as usize]).collect();
        prop_assert_eq!(c.covered(), ints(&want));
        for b in &base {
            if *b <= h {
                prop_assert!(c.contains(&Rational::from(*b)));
            }
        }
    }

    #[test]
    fn closure_idempotent_and_monotone(base in small_set(), extra in 2u64..15, h in 2u64..60, dh in 0u64..20) {
        let c = closure(&ints(&base), &Rational::from(h)).unwrap();
        let again = closure(&c.covered(), &Rational::from(h));
        if let Ok(again) = again {
            prop_assert_eq!(again.covered(), c.covered());
        }
        let mut bigger = base.clone();
        bigger.push(extra);
        let wider = closure(&ints(&bigger), &Rational::from(h + dh)).unwrap();
        for v in c.covered() {
            prop_assert!(wider.contains(&v));
        }
    }

    #[test]
    fn pair_certificates_record_every_violation(offset in 1u64..1_000_000, n_cap in 8u64..40) {
        let root = alpha0_interval().unwrap();
        // α in [2, α₀) close to α₀, and α slightly above
        let below = &root.lo - Rational::from((offset, 100_000_000_000u64)) ;
        let above = &root.hi + Rational::from((offset, 100_000_000_000u64)) ;
        for alpha in [below, above] {
            let cert = verify_hn_at(&alpha, n_cap).unwrap();
            let found = violating_pairs(&alpha, n_cap);
            let recorded: Vec<(u64, u64)> = cert.exceptions.iter().map(|e| (e.n, e.ell.unwrap())).collect();
            prop_assert_eq!(&recorded, &found);
            let genuine = cert.exceptions.iter().any(|e| e.kind == ExceptionKind::Violation);
            prop_assert_eq!(cert.outcome.is_verified(), !genuine);
            for e in &cert.exceptions {
                if e.kind == ExceptionKind::Exempt {
                    prop_assert_eq!((e.n, e.ell), (6, Some(4)));
                }
            }
        }
    }
}

#[test]
fn exceptional_pair_switches_at_alpha0() {
    let root = alpha0_interval().unwrap();
    let below = violating_pairs(&(&root.lo - Rational::from((1, 1000))), 12);
    let above = violating_pairs(&(&root.hi + Rational::from((1, 1000))), 12);
    assert!(below.contains(&(6, 4)));
    assert!(!above.contains(&(6, 4)));
}

#[test]
fn k2_pair_scan_labels_exceptions() {
    let cert = verify_hn_at(&Rational::from(2), 60).unwrap();
    assert!(matches!(cert.outcome, Outcome::Verified));
    let kinds: Vec<_> = cert.exceptions.iter().map(|e| (e.kind, e.n, e.ell)).collect();
    assert_eq!(
        kinds,
        [(ExceptionKind::OutsideQuantifier, 2, Some(0)), (ExceptionKind::Exempt, 6, Some(4))]
    );
}
