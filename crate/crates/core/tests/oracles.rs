//! Library results against independent brute-force oracles.

use std::collections::BTreeSet;

use pqcat::catalan::{catalan_exact, catalan_valuation_u64};
use pqcat::exceptions::{self, ExceptionKind};
use pqcat::modular::Granville;
use pqcat::residues::residue_set_p2;
use pqcat::sieve::primes_up_to;
use pqcat::squarefree::SquarefreeTester;
use pqcat::{Integer, Limits, PrimePower};

fn pp(p: u64, q: u32) -> PrimePower {
    PrimePower::new(p, q).unwrap()
}

fn strip(mut v: Integer, p: u64) -> (u64, Integer) {
    let mut e = 0;
    while v != 0 && v.is_divisible_u(p as u32) {
        v /= p as u32;
        e += 1;
    }
    (e, v)
}

#[test]
fn granville_matches_exact_binomials() {
    let limits = Limits::default();
    for (p, q) in [(2, 2), (2, 3), (3, 2), (5, 2)] {
        let pp = pp(p, q);
        let modulus = pp.modulus_u64().unwrap();
        let engine = Granville::new(&pp, &limits).unwrap();
        for m in 0..=150u32 {
            for n in 0..=m {
                let (e0, unit) = strip(Integer::from(Integer::binomial_u(m, n)), p);
                let got = engine.binom(&Integer::from(m), &Integer::from(n)).unwrap();
                assert_eq!(got.e0, e0, "{pp} C({m},{n})");
                assert_eq!(got.unit_residue, unit % modulus, "{pp} C({m},{n})");
            }
        }
    }
}

#[test]
fn exception_residues_match_exact() {
    let limits = Limits::default();
    for p in [2u64, 3, 5, 7] {
        let pp = pp(p, 2);
        let s = p * p;
        for form in exceptions::enumerate_q2(p, &Integer::from(300)).unwrap() {
            let n = form.value.to_u64().unwrap();
            let exact = catalan_exact(s, n, &limits).unwrap() % s;
            let closed = exceptions::residue_of_exception(&form).unwrap();
            assert_eq!(exact, closed, "p={p} n={n}");
            assert_eq!(
                pqcat::catalan::catalan_residue_mod_pq(&pp, &form.value).unwrap(),
                closed
            );
        }
    }
}

/// Set equality with the valuation brute force at bound 10^4.
#[test]
fn enumerators_match_brute_force() {
    let limits = Limits::default();
    let bound = 10_000u64;
    for (p, q) in [
        (2, 1),
        (3, 1),
        (5, 1),
        (2, 2),
        (3, 2),
        (5, 2),
        (3, 3),
        (7, 2),
        (3, 4),
        (5, 3),
    ] {
        let pp = pp(p, q);
        let got: Vec<u64> = exceptions::enumerate(&pp, &Integer::from(bound), &limits)
            .unwrap()
            .iter()
            .map(|f| f.value.to_u64().unwrap())
            .collect();
        let brute: Vec<u64> = (1..=bound)
            .filter(|&n| catalan_valuation_u64(&pp, n) < u64::from(q))
            .collect();
        assert_eq!(got, brute, "{pp}");
    }
}

/// Rows of base-2 exceptions for (2, 2): row `k` starts at `(10)^{k-1}1` and
/// continues by inserting a `1` right after each existing `1`, rightmost first.
#[test]
fn base_two_rows() {
    let mut expected = Vec::new();
    for k in 1..=7usize {
        let start: String = "10".repeat(k - 1) + "1";
        expected.push(start.clone());
        let ones: Vec<usize> = start.match_indices('1').map(|(i, _)| i).collect();
        for &i in ones.iter().rev() {
            let mut s = start.clone();
            s.insert(i + 1, '1');
            expected.push(s);
        }
    }
    let top = u64::from_str_radix(expected.last().unwrap(), 2).unwrap();
    let got: Vec<String> = exceptions::enumerate_q2(2, &Integer::from(top))
        .unwrap()
        .iter()
        .map(|f| f.value.to_string_radix(2))
        .collect();
    assert_eq!(got, expected);
    assert!(got.iter().all(|s| s.len() <= 14));
}

#[test]
fn general_sums_are_tagged_for_q3() {
    let forms = exceptions::enumerate_qgeq3(&pp(3, 3), &Integer::from(100_000)).unwrap();
    assert!(forms
        .iter()
        .any(|f| matches!(f.kind(), ExceptionKind::GeneralSum { m: 2, .. })));
    assert!(forms
        .iter()
        .any(|f| matches!(f.kind(), ExceptionKind::GeneralSum { m: 1, .. })));
}

/// `F(p^2, n) mod p^2` by multiplying out `C(p^2 n + 1, n) / (p^2 n + 1)` factor
/// by factor, tracking the power of `p` separately from the unit part.
fn residue_by_product(p: u64, n: u64) -> u64 {
    let m2 = p * p;
    let big = m2 * n + 1;
    let inv = |a: u64| (1..m2).find(|x| a * x % m2 == 1).unwrap();
    let split = |mut x: u64| {
        let mut e = 0;
        while x.is_multiple_of(p) {
            x /= p;
            e += 1;
        }
        (e, x % m2)
    };
    let mut v: i64 = 0;
    let mut num = 1u64;
    let mut den = 1u64;
    for k in 1..=n {
        let (e, u) = split(big - n + k);
        v += e as i64;
        num = num * u % m2;
        let (e, u) = split(k);
        v -= e as i64;
        den = den * u % m2;
    }
    let (e, u) = split(big);
    v -= e as i64;
    den = den * u % m2;
    if v >= 2 {
        return 0;
    }
    num * inv(den) % m2 * p.pow(v as u32) % m2
}

#[test]
fn residue_sets_are_attained() {
    for (p, bound) in [(2u64, 20_000u64), (3, 20_000), (5, 20_000)] {
        let mut seen = BTreeSet::from([0]);
        let pp = pp(p, 2);
        for n in 0..=bound {
            if catalan_valuation_u64(&pp, n) >= 2 {
                continue;
            }
            seen.insert(residue_by_product(p, n));
        }
        assert_eq!(seen, residue_set_p2(p).unwrap(), "p={p}");
    }
}

#[test]
fn product_oracle_matches_exact() {
    let limits = Limits::default();
    for p in [2u64, 3, 5] {
        for n in 0..=200 {
            let exact = catalan_exact(p * p, n, &limits).unwrap() % (p * p);
            assert_eq!(exact, residue_by_product(p, n), "p={p} n={n}");
        }
    }
}

/// Squarefreeness of exact `C(m, n)` by trial division with every prime square up to `m`.
#[test]
fn squarefree_matches_trial_division() {
    let limits = Limits::default();
    let max_m = 600u32;
    let tester = SquarefreeTester::new(&Integer::from(max_m), &limits).unwrap();
    let primes = primes_up_to(u64::from(max_m), 1 << 10);
    for m in 0..=max_m {
        let mut c = Integer::from(1);
        for n in 0..=m {
            if n > 0 {
                c *= m - n + 1;
                c /= n;
            }
            let exact = !primes
                .iter()
                .take_while(|&&r| r <= u64::from(m))
                .any(|&r| c.is_divisible_u((r * r) as u32));
            assert_eq!(
                tester.is_squarefree(u64::from(m), u64::from(n)).unwrap(),
                exact,
                "C({m},{n})"
            );
        }
    }
}
