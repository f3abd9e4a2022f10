//! The exceptional `n`, those with `p^q ∤ F(p^q, n)`.
//!
//! `v_p(F(p^q, n)) < q` exactly when `S = (p^q - 1) n + 1` has base-`p` digit
//! sum at most `(p - 1)(q - 1) + 1`. Digit sum 1 gives the pure powers
//! `n = (p^{tq} - 1) / (p^q - 1)`. Otherwise the digit sum is `l = m(p - 1) + 1`
//! with `1 <= m <= q - 1`, and `S = Σ p^{α_i}` for a multiset of `l` exponents
//! (each repeated fewer than `p` times) whose residues `j_i = α_i mod q` satisfy
//! `Σ p^{j_i} ≡ 1 (mod p^q - 1)`.
//!
//! The enumerator first lists the admissible residue-class multisets, a finite
//! and cheap search, and then places exponents into each class below the bound.
//! For `q = 2` the only admissible class multiset is `p` odd exponents, which
//! gives the odd-power-sum family with composition `(c_1, ..., c_s)`.

use std::collections::BTreeMap;

use rug::ops::Pow;
use rug::Integer;
use serde::{Deserialize, Serialize};

use crate::catalan::catalan_valuation_u64;
use crate::config::Limits;
use crate::digits::{check_nonnegative, check_prime, DigitVector, PrimePower};
use crate::error::{Error, Result};

/// One odd-exponent part `c · p^{2i + 1}` of a `q = 2` exception.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OddPart {
    pub c: u64,
    pub i: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExceptionKind {
    /// `n = (p^{tq} - 1) / (p^q - 1)`.
    PurePower { t: u64 },
    /// `n = (Σ c_k p^{2 i_k + 1} - 1) / (p^2 - 1)` with `i_1 < ... < i_s`,
    /// `1 <= c_k < p` and `Σ c_k = p`.
    OddPowerSum { parts: Vec<OddPart> },
    /// `n = (Σ p^{α_i} - 1) / (p^q - 1)` with `l = m(p - 1) + 1` exponents,
    /// listed in ascending order with repetition.
    GeneralSum { exponents: Vec<u64>, m: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExceptionForm {
    pub pp: PrimePower,
    pub value: Integer,
    /// Every family tag that produces `value`; never empty.
    pub kinds: Vec<ExceptionKind>,
}

impl ExceptionForm {
    pub fn kind(&self) -> &ExceptionKind {
        &self.kinds[0]
    }
}

/// Digit-sum description of one exception: exponents and their multiplicities.
type Digits = Vec<(u64, u64)>;

fn collect(pp: &PrimePower, found: Vec<(Integer, ExceptionKind)>) -> Vec<ExceptionForm> {
    let mut by_value: BTreeMap<Integer, Vec<ExceptionKind>> = BTreeMap::new();
    for (value, kind) in found {
        let kinds = by_value.entry(value).or_default();
        if !kinds.contains(&kind) {
            kinds.push(kind);
        }
    }
    by_value
        .into_iter()
        .map(|(value, kinds)| ExceptionForm {
            pp: pp.clone(),
            value,
            kinds,
        })
        .collect()
}

fn pure_powers(pp: &PrimePower, bound: &Integer) -> Vec<(Integer, ExceptionKind)> {
    let denom = Integer::from(pp.modulus() - 1u32);
    let mut out = Vec::new();
    let mut power = pp.modulus().clone();
    for t in 1u64.. {
        let n = Integer::from(&power - 1u32) / &denom;
        if n > *bound {
            break;
        }
        out.push((n, ExceptionKind::PurePower { t }));
        power *= pp.modulus();
    }
    out
}

/// Largest exponent `α` with `p^α <= (p^q - 1) · bound + 1`.
fn max_exponent(pp: &PrimePower, bound: &Integer) -> (u64, Integer) {
    let s_max = Integer::from(pp.modulus() - 1u32) * bound + 1u32;
    let mut alpha = 0u64;
    let mut power = Integer::from(pp.p());
    while power <= s_max {
        power *= pp.p();
        alpha += 1;
    }
    (alpha, s_max)
}

/// All class-count vectors `(k_0, ..., k_{q-1})` with `Σ k_j = l` and
/// `Σ k_j p^j ≡ 1 (mod p^q - 1)`.
fn admissible_classes(pp: &PrimePower, l: u64) -> Vec<Vec<u64>> {
    let q = pp.q() as usize;
    let modulus = Integer::from(pp.modulus() - 1u32);
    let weights: Vec<Integer> = (0..q)
        .map(|j| Integer::from(pp.p()).pow(j as u32))
        .collect();
    let mut out = Vec::new();
    let mut counts = vec![0u64; q];
    fn walk(
        j: usize,
        left: u64,
        counts: &mut Vec<u64>,
        weights: &[Integer],
        modulus: &Integer,
        out: &mut Vec<Vec<u64>>,
    ) {
        if j + 1 == counts.len() {
            counts[j] = left;
            let mut total = Integer::new();
            for (k, w) in counts.iter().zip(weights) {
                total += Integer::from(w * *k);
            }
            if (total - 1u32).is_divisible(modulus) {
                out.push(counts.clone());
            }
            return;
        }
        for k in 0..=left {
            counts[j] = k;
            walk(j + 1, left - k, counts, weights, modulus, out);
        }
    }
    walk(0, l, &mut counts, &weights, &modulus, &mut out);
    out
}

/// Places exponents for a fixed class-count vector, largest exponent first,
/// pruning any partial sum that cannot stay below `s_max`.
struct Placement<'a> {
    p: u64,
    q: u64,
    s_max: &'a Integer,
    powers: Vec<Integer>,
    out: Vec<Digits>,
}

impl Placement<'_> {
    fn floor_of(&self, need: &[u64]) -> Integer {
        // Cheapest completion puts every remaining digit at its class's lowest exponent.
        let mut total = Integer::new();
        for (j, &k) in need.iter().enumerate() {
            if k > 0 {
                total += Integer::from(&self.powers[j] * k);
            }
        }
        total
    }

    fn walk(&mut self, alpha: i64, need: &mut [u64], sum: &Integer, chosen: &mut Digits) {
        if need.iter().all(|&k| k == 0) {
            if *sum <= *self.s_max {
                self.out.push(chosen.clone());
            }
            return;
        }
        if alpha < 0 {
            return;
        }
        let a = alpha as u64;
        let j = (a % self.q) as usize;
        // Positions of class j at or below alpha: a / q + 1 of them.
        let slots = a / self.q + 1;
        if need[j] > slots * (self.p - 1) {
            return;
        }
        let top = need[j].min(self.p - 1);
        for c in (0..=top).rev() {
            let mut next = sum.clone();
            if c > 0 {
                next += Integer::from(&self.powers[a as usize] * c);
            }
            need[j] -= c;
            let feasible = Integer::from(&next + &self.floor_of(need)) <= *self.s_max;
            if feasible {
                if c > 0 {
                    chosen.push((a, c));
                }
                self.walk(alpha - 1, need, &next, chosen);
                if c > 0 {
                    chosen.pop();
                }
            }
            need[j] += c;
        }
    }
}

/// Every multi-digit exception `n <= bound` as its exponent/multiplicity list,
/// together with `m` (digit sum `m(p - 1) + 1`).
fn digit_sum_family(pp: &PrimePower, bound: &Integer) -> Vec<(Integer, u64, Digits)> {
    let (alpha_max, s_max) = max_exponent(pp, bound);
    let p = pp.p();
    let top = alpha_max.max(u64::from(pp.q()));
    let powers: Vec<Integer> = (0..=top).map(|a| Integer::from(p).pow(a as u32)).collect();
    let denom = Integer::from(pp.modulus() - 1u32);
    let mut out = Vec::new();
    for m in 1..u64::from(pp.q()) {
        let l = m * (p - 1) + 1;
        for mut need in admissible_classes(pp, l) {
            let mut placement = Placement {
                p,
                q: u64::from(pp.q()),
                s_max: &s_max,
                powers: powers.clone(),
                out: Vec::new(),
            };
            placement.walk(
                alpha_max as i64,
                &mut need,
                &Integer::new(),
                &mut Vec::new(),
            );
            for digits in placement.out {
                let mut s = Integer::new();
                for &(a, c) in &digits {
                    s += Integer::from(&powers[a as usize] * c);
                }
                let (n, rem) = (s - 1u32).div_rem(denom.clone());
                debug_assert_eq!(rem, 0);
                if n >= 1 && n <= *bound {
                    out.push((n, m, digits));
                }
            }
        }
    }
    out
}

fn check_bound(bound: &Integer) -> Result<()> {
    check_nonnegative(bound)
}

/// Exceptions for `q = 1`: the repunits `(p^k - 1) / (p - 1)`, `k >= 1`.
pub fn enumerate_q1(p: u64, bound: &Integer) -> Result<Vec<ExceptionForm>> {
    check_bound(bound)?;
    let pp = PrimePower::new(p, 1)?;
    let found = pure_powers(&pp, bound);
    Ok(collect(&pp, found))
}

/// Exceptions for `q = 2`: pure powers and odd-power sums.
pub fn enumerate_q2(p: u64, bound: &Integer) -> Result<Vec<ExceptionForm>> {
    check_bound(bound)?;
    let pp = PrimePower::new(p, 2)?;
    let mut found = pure_powers(&pp, bound);
    for (n, _, digits) in digit_sum_family(&pp, bound) {
        let mut parts: Vec<OddPart> = digits
            .iter()
            .map(|&(a, c)| {
                debug_assert_eq!(a % 2, 1);
                OddPart { c, i: (a - 1) / 2 }
            })
            .collect();
        parts.sort_by_key(|part| part.i);
        found.push((n, ExceptionKind::OddPowerSum { parts }));
    }
    Ok(collect(&pp, found))
}

/// Exceptions for odd `p` and `q >= 3`.
pub fn enumerate_qgeq3(pp: &PrimePower, bound: &Integer) -> Result<Vec<ExceptionForm>> {
    check_bound(bound)?;
    if pp.p() == 2 || pp.q() < 3 {
        return Err(Error::Hypothesis(format!(
            "the q >= 3 characterization needs an odd prime and q >= 3, got {pp}"
        )));
    }
    let mut found = pure_powers(pp, bound);
    for (n, m, digits) in digit_sum_family(pp, bound) {
        found.push((n, general_kind(m, &digits)));
    }
    Ok(collect(pp, found))
}

fn general_kind(m: u64, digits: &Digits) -> ExceptionKind {
    let mut exponents: Vec<u64> = digits
        .iter()
        .flat_map(|&(a, c)| std::iter::repeat_n(a, c as usize))
        .collect();
    exponents.sort_unstable();
    ExceptionKind::GeneralSum { exponents, m }
}

/// `{n in 1..=bound : v_p(F(p^q, n)) < q}` by direct digit sums.
pub fn brute_force_exceptions(pp: &PrimePower, bound: u64) -> Vec<u64> {
    let q = u64::from(pp.q());
    (1..=bound)
        .filter(|&n| catalan_valuation_u64(pp, n) < q)
        .collect()
}

/// Exceptions for any prime power. `p = 2, q >= 3` lies outside the structural
/// characterization and is found by a guarded brute-force sweep instead.
pub fn enumerate(pp: &PrimePower, bound: &Integer, limits: &Limits) -> Result<Vec<ExceptionForm>> {
    match (pp.p(), pp.q()) {
        (p, 1) => enumerate_q1(p, bound),
        (p, 2) => enumerate_q2(p, bound),
        (2, _) => {
            check_bound(bound)?;
            let small = bound
                .to_u64()
                .filter(|&b| b <= limits.brute_force_max)
                .ok_or_else(|| {
                    Error::guard("bound (brute force)", bound, limits.brute_force_max)
                })?;
            let pp = pp.clone();
            let modulus = Integer::from(pp.modulus() - 1u32);
            let found = brute_force_exceptions(&pp, small)
                .into_iter()
                .map(|n| {
                    let s = Integer::from(&modulus * n) + 1u32;
                    let bits = DigitVector::from_integer(&s, 2);
                    let kind = if bits.digit_sum() == 1 {
                        ExceptionKind::PurePower {
                            t: (bits.len() as u64 - 1) / u64::from(pp.q()),
                        }
                    } else {
                        let digits: Digits = bits
                            .digits()
                            .iter()
                            .enumerate()
                            .filter(|(_, &d)| d == 1)
                            .map(|(a, _)| (a as u64, 1))
                            .collect();
                        general_kind(bits.digit_sum() - 1, &digits)
                    };
                    (Integer::from(n), kind)
                })
                .collect();
            Ok(collect(&pp, found))
        }
        _ => enumerate_qgeq3(pp, bound),
    }
}

/// `p! / Π c_k!` exactly.
pub fn multinomial(total: u64, parts: &[u64]) -> Integer {
    debug_assert_eq!(parts.iter().sum::<u64>(), total);
    let mut acc = Integer::from(Integer::factorial(total as u32));
    for &c in parts {
        acc /= Integer::from(Integer::factorial(c as u32));
    }
    acc
}

/// `F(p^q, n) mod p^q` read off the family tag: 1 for pure powers (`q <= 2`)
/// and the multinomial `C(p; c_1, ..., c_s)` for odd-power sums.
pub fn residue_of_exception(form: &ExceptionForm) -> Result<u64> {
    let pp = &form.pp;
    let modulus = pp.small_modulus()?;
    match form.kind() {
        ExceptionKind::PurePower { .. } if pp.q() <= 2 => Ok(1 % modulus),
        ExceptionKind::OddPowerSum { parts } => {
            let cs: Vec<u64> = parts.iter().map(|part| part.c).collect();
            Ok((multinomial(pp.p(), &cs) % modulus)
                .to_u64()
                .expect("reduced below modulus"))
        }
        _ => Err(Error::Hypothesis(format!(
            "no closed-form residue for this exception family modulo {pp}; use the Granville residue"
        ))),
    }
}

/// Counts of the `q = 2` exception families with every odd-exponent index `i`
/// below `exponent_bound`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExceptionCount {
    /// `C(E, p)`: ways to pick `p` distinct indices. This is the coarse count
    /// quoted for the squarefree question (pairs for `p = 2`, triples for `p = 3`).
    pub distinct_index_sets: Integer,
    /// Exact number of odd-power sums, `Σ_{s=2}^{p} C(E, s) · C(p - 1, s - 1)`.
    pub odd_power_sums: Integer,
    /// Pure powers `(p^{2t} - 1)/(p^2 - 1)` with `1 <= t <= E`.
    pub pure_powers: Integer,
}

impl ExceptionCount {
    pub fn total(&self) -> Integer {
        Integer::from(&self.odd_power_sums + &self.pure_powers)
    }
}

pub fn count_exceptions_q2(p: u64, exponent_bound: u64) -> Result<ExceptionCount> {
    check_prime(p)?;
    if exponent_bound == 0 {
        return Err(Error::Hypothesis(
            "exponent bound must be at least 1".into(),
        ));
    }
    let e = Integer::from(exponent_bound);
    let binom = |n: &Integer, k: u64| Integer::from(n.binomial_ref(k as u32));
    let mut odd = Integer::new();
    for s in 2..=p.min(exponent_bound) {
        odd += binom(&e, s) * binom(&Integer::from(p - 1), s - 1);
    }
    Ok(ExceptionCount {
        distinct_index_sets: binom(&e, p),
        odd_power_sums: odd,
        pure_powers: e,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int(v: u64) -> Integer {
        Integer::from(v)
    }

    fn values(forms: &[ExceptionForm]) -> Vec<u64> {
        forms.iter().map(|f| f.value.to_u64().unwrap()).collect()
    }

    #[test]
    fn q1_examples() {
        assert_eq!(
            values(&enumerate_q1(2, &int(100)).unwrap()),
            [1, 3, 7, 15, 31, 63]
        );
        assert_eq!(values(&enumerate_q1(3, &int(50)).unwrap()), [1, 4, 13, 40]);
        assert!(enumerate_q1(5, &int(0)).unwrap().is_empty());
        assert!(enumerate_q1(4, &int(10)).is_err());
    }

    #[test]
    fn q2_examples() {
        let forms = enumerate_q2(2, &int(60)).unwrap();
        assert_eq!(values(&forms), [1, 3, 5, 11, 13, 21, 43, 45, 53]);
        assert_eq!(values(&enumerate_q2(2, &int(1)).unwrap()), [1]);
        assert!(enumerate_q2(2, &int(0)).unwrap().is_empty());
        assert!(enumerate_qgeq3(&PrimePower::new(3, 4).unwrap(), &int(0))
            .unwrap()
            .is_empty());
        let forms = enumerate_q2(3, &int(10)).unwrap();
        assert_eq!(values(&forms), [1, 4, 7, 10]);
        // 4 = (3^3 + 3 + 3 - 1) / 8, 7 = (2 * 3^3 + 3 - 1) / 8, 10 = (3^4 - 1) / 8
        assert_eq!(
            forms[1].kinds,
            [ExceptionKind::OddPowerSum {
                parts: vec![OddPart { c: 2, i: 0 }, OddPart { c: 1, i: 1 }]
            }]
        );
        assert_eq!(forms[3].kinds, [ExceptionKind::PurePower { t: 2 }]);
    }

    #[test]
    fn q2_tags_reconstruct_values() {
        for p in [2u64, 3, 5, 7, 11] {
            for form in enumerate_q2(p, &int(1_000_000)).unwrap() {
                let pp = &form.pp;
                let s = match form.kind() {
                    ExceptionKind::PurePower { t } => Integer::from(p).pow(2 * *t as u32),
                    ExceptionKind::OddPowerSum { parts } => {
                        assert!(parts.len() >= 2);
                        assert!(parts.windows(2).all(|w| w[0].i < w[1].i));
                        assert_eq!(parts.iter().map(|x| x.c).sum::<u64>(), p);
                        parts
                            .iter()
                            .map(|x| Integer::from(p).pow(2 * x.i as u32 + 1) * x.c)
                            .sum()
                    }
                    other => panic!("unexpected {other:?}"),
                };
                let n = (s - 1u32) / Integer::from(pp.modulus() - 1u32);
                assert_eq!(n, form.value);
            }
        }
    }

    #[test]
    fn qgeq3_contains_pure_powers_and_rejects_bad_hypotheses() {
        let pp = PrimePower::new(3, 3).unwrap();
        let forms = enumerate_qgeq3(&pp, &int(1_000_000)).unwrap();
        let vals = values(&forms);
        for n in [1u64, 28, 757, 20440] {
            assert!(vals.contains(&n), "missing {n}");
        }
        assert!(enumerate_qgeq3(&PrimePower::new(2, 3).unwrap(), &int(100)).is_err());
        assert!(enumerate_qgeq3(&PrimePower::new(3, 2).unwrap(), &int(100)).is_err());
    }

    #[test]
    fn general_sum_congruence_holds() {
        let pp = PrimePower::new(5, 3).unwrap();
        let modulus = Integer::from(pp.modulus() - 1u32);
        for form in enumerate_qgeq3(&pp, &int(10_000_000)).unwrap() {
            if let ExceptionKind::GeneralSum { exponents, m } = form.kind() {
                assert_eq!(exponents.len() as u64, m * 4 + 1);
                let classes: Integer = exponents
                    .iter()
                    .map(|a| Integer::from(5u32).pow((*a % 3) as u32))
                    .sum();
                assert!((classes - 1u32).is_divisible(&modulus));
            }
        }
    }

    #[test]
    fn small_sets_match_brute_force() {
        for (p, q) in [
            (2, 1),
            (3, 1),
            (2, 2),
            (3, 2),
            (5, 2),
            (3, 3),
            (5, 3),
            (3, 4),
            (7, 3),
            (2, 3),
            (2, 4),
        ] {
            let pp = PrimePower::new(p, q).unwrap();
            let got = values(&enumerate(&pp, &int(3000), &Limits::default()).unwrap());
            assert_eq!(got, brute_force_exceptions(&pp, 3000), "{pp}");
        }
    }

    #[test]
    fn residue_examples() {
        let pp = PrimePower::new(5, 2).unwrap();
        let form = |kind| ExceptionForm {
            pp: pp.clone(),
            value: Integer::new(),
            kinds: vec![kind],
        };
        assert_eq!(
            residue_of_exception(&form(ExceptionKind::PurePower { t: 3 })).unwrap(),
            1
        );
        let parts = vec![
            OddPart { c: 2, i: 0 },
            OddPart { c: 2, i: 1 },
            OddPart { c: 1, i: 2 },
        ];
        assert_eq!(
            residue_of_exception(&form(ExceptionKind::OddPowerSum { parts })).unwrap(),
            5
        );
        let two = ExceptionForm {
            pp: PrimePower::new(2, 2).unwrap(),
            value: int(3),
            kinds: vec![ExceptionKind::OddPowerSum {
                parts: vec![OddPart { c: 1, i: 0 }, OddPart { c: 1, i: 1 }],
            }],
        };
        assert_eq!(residue_of_exception(&two).unwrap(), 2);
        let general = form(ExceptionKind::GeneralSum {
            exponents: vec![0, 1],
            m: 1,
        });
        assert!(residue_of_exception(&general).is_err());
    }

    #[test]
    fn counts() {
        let c = count_exceptions_q2(2, 761).unwrap();
        assert_eq!(c.distinct_index_sets, 289_180);
        assert_eq!(c.odd_power_sums, 289_180);
        assert_eq!(
            count_exceptions_q2(3, 478).unwrap().distinct_index_sets,
            18_088_476
        );
        assert_eq!(count_exceptions_q2(2, 2).unwrap().distinct_index_sets, 1);
        assert!(count_exceptions_q2(2, 0).is_err());
        assert!(count_exceptions_q2(9, 10).is_err());
    }

    #[test]
    fn exact_counts_match_enumeration() {
        // Indices i < E means odd exponents up to 2E - 1, so every such
        // exception lies below p^{2E} / (p^2 - 1).
        for (p, e) in [(2u64, 6u64), (3, 5), (5, 4), (7, 3)] {
            let pp = PrimePower::new(p, 2).unwrap();
            let ceiling =
                Integer::from(p).pow(2 * e as u32) * p / Integer::from(pp.modulus() - 1u32);
            let forms = enumerate_q2(p, &ceiling).unwrap();
            let odd = forms
                .iter()
                .filter(|f| match f.kind() {
                    ExceptionKind::OddPowerSum { parts } => parts.iter().all(|x| x.i < e),
                    _ => false,
                })
                .count();
            let pure = forms
                .iter()
                .filter(|f| matches!(f.kind(), ExceptionKind::PurePower { t } if *t <= e))
                .count();
            let counted = count_exceptions_q2(p, e).unwrap();
            assert_eq!(counted.odd_power_sums, odd as u64, "p={p}");
            assert_eq!(counted.pure_powers, pure as u64, "p={p}");
        }
    }
}
