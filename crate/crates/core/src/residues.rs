//! Least residues of `F(p^2, n)` modulo `p^2`.
//!
//! A non-divisible `F(p^2, n)` is either `1` (pure powers) or a multinomial
//! `p! / (c_1! ... c_s!)` with `(c_k)` a composition of `p` into at least two
//! parts. Only the multiset of parts matters, so the residue set is read off
//! the partitions of `p`.

use std::collections::BTreeSet;

use rug::Integer;
use serde::{Deserialize, Serialize};

use crate::digits::check_prime;
use crate::error::{Error, Result};
use crate::exceptions::multinomial;

/// Largest prime accepted by [`residue_set_p2`]; `π(61) = 1121505` partitions.
pub const MAX_RESIDUE_PRIME: u64 = 61;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Partition {
    parts: Vec<u64>,
}

impl Partition {
    pub fn new(mut parts: Vec<u64>) -> Result<Self> {
        if parts.is_empty() || parts.contains(&0) {
            return Err(Error::Hypothesis("partition parts must be positive".into()));
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Ok(Partition { parts })
    }

    pub fn parts(&self) -> &[u64] {
        &self.parts
    }

    pub fn total(&self) -> u64 {
        self.parts.iter().sum()
    }

    pub fn multinomial(&self) -> Integer {
        multinomial(self.total(), &self.parts)
    }
}

/// Partitions of `n` in reverse lexicographic order, starting from `{n}`.
pub fn partitions_of(n: u64) -> Result<Vec<Partition>> {
    if n == 0 {
        return Err(Error::Hypothesis("partitions_of needs n >= 1".into()));
    }
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn walk(left: u64, max: u64, current: &mut Vec<u64>, out: &mut Vec<Partition>) {
        if left == 0 {
            out.push(Partition {
                parts: current.clone(),
            });
            return;
        }
        for part in (1..=left.min(max)).rev() {
            current.push(part);
            walk(left - part, part, current, out);
            current.pop();
        }
    }
    walk(n, n, &mut current, &mut out);
    Ok(out)
}

/// Number of partitions of `n`, from Euler's pentagonal recurrence.
pub fn partition_count(n: u64) -> Integer {
    let n = n as usize;
    let mut table = vec![Integer::from(1)];
    for m in 1..=n {
        let mut total = Integer::new();
        for k in 1.. {
            let signed = if k % 2 == 1 { 1 } else { -1 };
            let mut any = false;
            for pent in [k * (3 * k - 1) / 2, k * (3 * k + 1) / 2] {
                if pent <= m {
                    any = true;
                    if signed > 0 {
                        total += &table[m - pent];
                    } else {
                        total -= &table[m - pent];
                    }
                }
            }
            if !any {
                break;
            }
        }
        table.push(total);
    }
    table.swap_remove(n)
}

/// `{0, 1} ∪ {multinomial(p; λ) mod p^2 : λ ⊢ p}`.
pub fn residue_set_p2(p: u64) -> Result<BTreeSet<u64>> {
    check_prime(p)?;
    if p > MAX_RESIDUE_PRIME {
        return Err(Error::guard(
            "p (partition enumeration)",
            p,
            MAX_RESIDUE_PRIME,
        ));
    }
    let modulus = p * p;
    let mut set = BTreeSet::from([0, 1 % modulus]);
    for partition in partitions_of(p)? {
        let r = partition.multinomial() % modulus;
        set.insert(r.to_u64().expect("reduced below p^2"));
    }
    Ok(set)
}

/// `|residue_set_p2(s)|` for prime `s` in `1..=s_max`, `None` otherwise.
pub fn residue_count_sequence(s_max: u64) -> Result<Vec<(u64, Option<usize>)>> {
    if s_max == 0 {
        return Err(Error::Hypothesis("s_max must be at least 1".into()));
    }
    (1..=s_max)
        .map(|s| {
            if check_prime(s).is_ok() {
                Ok((s, Some(residue_set_p2(s)?.len())))
            } else {
                Ok((s, None))
            }
        })
        .collect()
}
