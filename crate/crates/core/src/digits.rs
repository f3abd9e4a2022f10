//! Base-`p` digits, digit sums, and the Legendre/Kummer valuation formulas.

use std::fmt;

use rug::ops::Pow;
use rug::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Deterministic primality test for 64-bit integers.
///
/// Trial division by the small primes, then Miller-Rabin with the first twelve
/// prime bases, which has no false positives below 2^64.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &b in &BASES {
        if n.is_multiple_of(b) {
            return n == b;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &BASES {
        let mut x = pow_mod_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod_u64(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

pub(crate) fn mul_mod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn pow_mod_u64(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod_u64(acc, base, m);
        }
        base = mul_mod_u64(base, base, m);
        exp >>= 1;
    }
    acc
}

pub(crate) fn check_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::NotPrime(p))
    }
}

pub(crate) fn check_nonnegative(n: &Integer) -> Result<()> {
    if *n < 0 {
        Err(Error::Negative(n.to_string()))
    } else {
        Ok(())
    }
}

/// A validated prime power `p^q` with `q >= 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PrimePower {
    p: u64,
    q: u32,
    modulus: Integer,
}

impl PrimePower {
    pub fn new(p: u64, q: u32) -> Result<Self> {
        check_prime(p)?;
        if q == 0 {
            return Err(Error::ZeroExponent);
        }
        let modulus = Integer::from(p).pow(q);
        Ok(PrimePower { p, q, modulus })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// `p^q` exactly.
    pub fn modulus(&self) -> &Integer {
        &self.modulus
    }

    /// `p^q` as a machine integer, when it fits.
    pub fn modulus_u64(&self) -> Option<u64> {
        self.modulus.to_u64()
    }

    /// `p^q`, or a guard error when it does not fit in 64 bits.
    pub(crate) fn small_modulus(&self) -> Result<u64> {
        self.modulus_u64()
            .ok_or_else(|| Error::guard("p^q", &self.modulus, u64::MAX))
    }
}

impl fmt::Display for PrimePower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}^{}", self.p, self.q)
    }
}

/// Little-endian base-`p` digits: `digits[i]` is the coefficient of `p^i`.
///
/// Canonical: the last digit is nonzero, and zero has no digits at all.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DigitVector {
    digits: Vec<u64>,
    base: u64,
}

impl DigitVector {
    /// Digits of `n` in an arbitrary base `>= 2`; primality is the caller's concern.
    pub(crate) fn from_integer(n: &Integer, base: u64) -> Self {
        debug_assert!(base >= 2 && *n >= 0);
        if let Some(small) = n.to_u128() {
            return DigitVector {
                digits: small_digits(small, base),
                base,
            };
        }
        // Peel off chunks of the largest power of the base that fits a word.
        let mut chunk = base;
        let mut per_chunk = 1;
        while let Some(next) = chunk.checked_mul(base) {
            chunk = next;
            per_chunk += 1;
        }
        let chunk_big = Integer::from(chunk);
        let mut rest = n.clone();
        let mut digits = Vec::with_capacity(n.significant_bits() as usize);
        while rest > 0 {
            let (quot, rem) = rest.div_rem(chunk_big.clone());
            rest = quot;
            let mut r = rem.to_u64().expect("remainder below chunk");
            for _ in 0..per_chunk {
                digits.push(r % base);
                r /= base;
            }
        }
        while digits.last() == Some(&0) {
            digits.pop();
        }
        DigitVector { digits, base }
    }

    pub fn digits(&self) -> &[u64] {
        &self.digits
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    /// Digit at position `i`, zero beyond the top.
    pub fn digit(&self, i: usize) -> u64 {
        self.digits.get(i).copied().unwrap_or(0)
    }

    pub fn digit_sum(&self) -> u64 {
        self.digits.iter().sum()
    }

    /// Reassembles `Σ digits[i] p^i`.
    pub fn value(&self) -> Integer {
        let mut acc = Integer::new();
        for &d in self.digits.iter().rev() {
            acc *= self.base;
            acc += d;
        }
        acc
    }

    /// Most significant digit first, e.g. `101101` for 45 in base 2.
    pub fn to_display_string(&self) -> String {
        if self.digits.is_empty() {
            return "0".to_string();
        }
        let sep = if self.base > 10 { "." } else { "" };
        self.digits
            .iter()
            .rev()
            .map(u64::to_string)
            .collect::<Vec<_>>()
            .join(sep)
    }
}

fn small_digits(mut n: u128, base: u64) -> Vec<u64> {
    let b = base as u128;
    let mut out = Vec::new();
    while n > 0 {
        out.push((n % b) as u64);
        n /= b;
    }
    out
}

pub(crate) fn digit_sum_u128(mut n: u128, base: u64) -> u64 {
    let b = base as u128;
    let mut s = 0u64;
    while n > 0 {
        s += (n % b) as u64;
        n /= b;
    }
    s
}

pub fn to_base_p(n: &Integer, p: u64) -> Result<DigitVector> {
    check_prime(p)?;
    check_nonnegative(n)?;
    Ok(DigitVector::from_integer(n, p))
}

/// Sum of the base-`p` digits of `n`.
pub fn sigma_p(n: &Integer, p: u64) -> Result<u64> {
    check_prime(p)?;
    check_nonnegative(n)?;
    Ok(match n.to_u128() {
        Some(small) => digit_sum_u128(small, p),
        None => DigitVector::from_integer(n, p).digit_sum(),
    })
}

/// Exponent of `p` in `n!`, as `Σ_{i>=1} floor(n / p^i)`.
pub fn legendre_valuation_factorial(n: u64, p: u64) -> Result<u64> {
    check_prime(p)?;
    let mut total = 0;
    let mut rest = n;
    while rest > 0 {
        rest /= p;
        total += rest;
    }
    Ok(total)
}

/// Number of carries at digit positions `>= from_digit` when `n + r` is
/// added in base `p`. With `from_digit = 0` this is `v_p(C(n + r, n))`.
pub fn kummer_carries(n: &Integer, r: &Integer, p: u64, from_digit: usize) -> Result<u64> {
    check_prime(p)?;
    check_nonnegative(n)?;
    check_nonnegative(r)?;
    if let (Some(a), Some(b)) = (n.to_u64(), r.to_u64()) {
        return Ok(carries_u64(a, b, p, from_digit, u64::MAX));
    }
    let dn = DigitVector::from_integer(n, p);
    let dr = DigitVector::from_integer(r, p);
    Ok(carry_flags(&dn, &dr)
        .into_iter()
        .skip(from_digit)
        .filter(|&c| c)
        .count() as u64)
}

/// Carry out of every digit position when adding the two digit vectors.
pub(crate) fn carry_flags(a: &DigitVector, b: &DigitVector) -> Vec<bool> {
    let p = a.base();
    let len = a.len().max(b.len());
    let mut carry = 0;
    let mut out = Vec::with_capacity(len);
    for i in 0..len {
        let s = a.digit(i) + b.digit(i) + carry;
        carry = u64::from(s >= p);
        out.push(carry == 1);
    }
    out
}

/// Carry count on 64-bit inputs, stopping early once `stop_at` is reached.
pub(crate) fn carries_u64(mut a: u64, mut b: u64, p: u64, from_digit: usize, stop_at: u64) -> u64 {
    let mut carry = 0u64;
    let mut count = 0u64;
    let mut pos = 0usize;
    while a > 0 || b > 0 || carry > 0 {
        let s = a % p + b % p + carry;
        carry = u64::from(s >= p);
        if pos >= from_digit {
            count += carry;
            if count >= stop_at {
                return count;
            }
        }
        a /= p;
        b /= p;
        pos += 1;
    }
    count
}

/// `v_p(C(m, n))` from digit sums: `(σ(n) + σ(m - n) - σ(m)) / (p - 1)`.
pub fn binom_valuation(m: &Integer, n: &Integer, p: u64) -> Result<u64> {
    check_prime(p)?;
    check_nonnegative(n)?;
    if n > m {
        return Err(Error::LowerExceedsUpper {
            upper: m.to_string(),
            lower: n.to_string(),
        });
    }
    let r = Integer::from(m - n);
    let total = sigma_p(n, p)? + sigma_p(&r, p)?;
    let top = sigma_p(m, p)?;
    Ok((total - top) / (p - 1))
}
