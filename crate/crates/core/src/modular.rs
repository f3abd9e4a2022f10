//! Binomial coefficients modulo `p` (Lucas) and modulo `p^q` (Granville).
//!
//! Granville's congruence writes the unit part of `C(m, n)` modulo `p^q` as a
//! product over base-`p` windows of width `q`:
//!
//! ```text
//! C(m, n) / p^e0  ≡  ±1^(e_{q-1}) · Π_j  M_j!_p / (N_j!_p · R_j!_p)   (mod p^q)
//! ```
//!
//! where `r = m - n`, `N_j = floor(n / p^j) mod p^q` (likewise `M_j`, `R_j`),
//! `e_j` counts the carries at positions `>= j` when adding `n + r`, and `k!_p`
//! is the product of the integers `<= k` prime to `p`. The sign is `-1` except
//! for `p = 2, q >= 3`, where it is `+1`.

use rug::Integer;
use serde::{Deserialize, Serialize};

use crate::config::Limits;
use crate::digits::{
    carry_flags, check_nonnegative, check_prime, mul_mod_u64, DigitVector, PrimePower,
};
use crate::error::{Error, Result};

/// Valuation and unit part of a binomial coefficient modulo `p^q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GranvilleResult {
    /// `v_p(C(m, n))`.
    pub e0: u64,
    /// `C(m, n) / p^e0 mod p^q`, always a unit.
    pub unit_residue: u64,
}

/// Table of `k!_p mod p^q` for `0 <= k <= p^q`.
#[derive(Clone, Debug)]
pub struct UnitFactorials {
    pp: PrimePower,
    modulus: u64,
    table: Vec<u64>,
}

impl UnitFactorials {
    pub fn new(pp: &PrimePower, limits: &Limits) -> Result<Self> {
        let modulus = pp.small_modulus()?;
        if modulus > limits.factorial_table_max {
            return Err(Error::guard(
                "p^q (factorial table)",
                modulus,
                limits.factorial_table_max,
            ));
        }
        let p = pp.p();
        let mut table = Vec::with_capacity(modulus as usize + 1);
        let mut acc = 1 % modulus;
        table.push(acc);
        for k in 1..=modulus {
            if k % p != 0 {
                acc = mul_mod_u64(acc, k, modulus);
            }
            table.push(acc);
        }
        Ok(UnitFactorials {
            pp: pp.clone(),
            modulus,
            table,
        })
    }

    pub fn prime_power(&self) -> &PrimePower {
        &self.pp
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// `k!_p mod p^q` for `k <= p^q`.
    pub fn small(&self, k: u64) -> u64 {
        self.table[k as usize]
    }

    /// `n!_p mod p^q` for arbitrary `n`: a full block of length `p^q` contributes
    /// the product of all units, so `n!_p = block^floor(n/p^q) · (n mod p^q)!_p`.
    pub fn factorial(&self, n: &Integer) -> u64 {
        let modulus = Integer::from(self.modulus);
        let (blocks, rest) = n.clone().div_rem_floor(modulus.clone());
        let block = Integer::from(self.table[self.modulus as usize]);
        let scaled = block
            .pow_mod(&blocks, &modulus)
            .expect("nonnegative exponent")
            .to_u64()
            .expect("reduced below modulus");
        let rest = rest.to_u64().expect("reduced below modulus");
        mul_mod_u64(scaled, self.table[rest as usize], self.modulus)
    }
}

/// `n!_p mod p^q`, the product of the integers `<= n` not divisible by `p`.
pub fn factorial_p_mod(n: &Integer, pp: &PrimePower) -> Result<u64> {
    check_nonnegative(n)?;
    Ok(UnitFactorials::new(pp, &Limits::default())?.factorial(n))
}

/// Inverse of `a` modulo `m` for `gcd(a, m) = 1`.
pub(crate) fn inverse_mod_u64(a: u64, m: u64) -> Option<u64> {
    let (mut old_r, mut r) = (a as i128 % m as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let quot = old_r / r;
        (old_r, r) = (r, old_r - quot * r);
        (old_s, s) = (s, old_s - quot * s);
    }
    if old_r != 1 {
        return if m == 1 { Some(0) } else { None };
    }
    Some(old_s.rem_euclid(m as i128) as u64)
}

/// Inverse of `a` modulo `p^q`; `a` may be negative or larger than `p^q`.
pub fn inverse_mod_pq(a: &Integer, pp: &PrimePower) -> Result<Integer> {
    a.clone()
        .invert(pp.modulus())
        .map_err(|_| Error::NotInvertible {
            value: a.to_string(),
            modulus: pp.modulus().to_string(),
        })
}

/// `C(a, b) mod p` for `a, b < p`.
fn small_binom_mod_p(a: u64, b: u64, p: u64) -> u64 {
    if b > a {
        return 0;
    }
    let b = b.min(a - b);
    let (mut num, mut den) = (1 % p, 1 % p);
    for k in 0..b {
        num = mul_mod_u64(num, a - k, p);
        den = mul_mod_u64(den, k + 1, p);
    }
    mul_mod_u64(num, inverse_mod_u64(den, p).expect("den < p is a unit"), p)
}

/// `C(m, n) mod p` as the product of `C(m_i, n_i)` over base-`p` digits.
/// `n > m` gives 0.
pub fn lucas_binom_mod_p(m: &Integer, n: &Integer, p: u64) -> Result<u64> {
    check_prime(p)?;
    check_nonnegative(m)?;
    check_nonnegative(n)?;
    if n > m {
        return Ok(0);
    }
    let dm = DigitVector::from_integer(m, p);
    let dn = DigitVector::from_integer(n, p);
    let mut acc = 1 % p;
    for i in 0..dm.len() {
        acc = mul_mod_u64(acc, small_binom_mod_p(dm.digit(i), dn.digit(i), p), p);
        if acc == 0 {
            break;
        }
    }
    Ok(acc)
}

/// Reusable evaluator for Granville's congruence modulo a fixed `p^q`.
#[derive(Clone, Debug)]
pub struct Granville {
    facts: UnitFactorials,
}

impl Granville {
    pub fn new(pp: &PrimePower, limits: &Limits) -> Result<Self> {
        Ok(Granville {
            facts: UnitFactorials::new(pp, limits)?,
        })
    }

    pub fn prime_power(&self) -> &PrimePower {
        self.facts.prime_power()
    }

    pub fn modulus(&self) -> u64 {
        self.facts.modulus()
    }

    pub fn unit_factorials(&self) -> &UnitFactorials {
        &self.facts
    }

    pub fn binom(&self, m: &Integer, n: &Integer) -> Result<GranvilleResult> {
        check_nonnegative(n)?;
        if n > m {
            return Err(Error::LowerExceedsUpper {
                upper: m.to_string(),
                lower: n.to_string(),
            });
        }
        let pp = self.prime_power();
        let p = pp.p();
        let q = pp.q() as usize;
        let modulus = self.modulus();
        let r = Integer::from(m - n);
        let dm = DigitVector::from_integer(m, p);
        let dn = DigitVector::from_integer(n, p);
        let dr = DigitVector::from_integer(&r, p);

        // Window count follows m, the longest of the three expansions.
        let len = dm.len();
        let carries = carry_flags(&dn, &dr);
        let e0 = carries.iter().filter(|&&c| c).count() as u64;
        let e_top = carries.iter().skip(q - 1).filter(|&&c| c).count() as u64;

        let window = |d: &DigitVector, j: usize| -> u64 {
            let mut acc = 0u64;
            for k in (0..q).rev() {
                acc = acc * p + d.digit(j + k);
            }
            acc
        };
        let mut num = 1 % modulus;
        let mut den = 1 % modulus;
        for j in 0..len {
            num = mul_mod_u64(num, self.facts.small(window(&dm, j)), modulus);
            den = mul_mod_u64(den, self.facts.small(window(&dn, j)), modulus);
            den = mul_mod_u64(den, self.facts.small(window(&dr, j)), modulus);
        }
        let mut unit = mul_mod_u64(
            num,
            inverse_mod_u64(den, modulus).expect("products of unit factorials are units"),
            modulus,
        );
        let sign_is_minus = !(p == 2 && pp.q() >= 3);
        if sign_is_minus && e_top % 2 == 1 && unit != 0 {
            unit = modulus - unit;
        }
        Ok(GranvilleResult {
            e0,
            unit_residue: unit,
        })
    }
}

/// Valuation and unit residue of `C(m, n)` modulo `p^q`.
pub fn granville_binom_mod_pq(
    m: &Integer,
    n: &Integer,
    pp: &PrimePower,
) -> Result<GranvilleResult> {
    Granville::new(pp, &Limits::default())?.binom(m, n)
}
