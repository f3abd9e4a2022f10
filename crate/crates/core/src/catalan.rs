//! Generalized Catalan numbers `F(s, n) = C(sn, n) / ((s - 1)n + 1)`.
//!
//! For `s = p^q` the modular paths use the equivalent form
//! `F(p^q, n) = C(p^q n + 1, n) / (p^q n + 1)`: the divisor is `≡ 1 (mod p)`, so
//! dividing by it is a unit multiplication. The valuation comes straight from
//! digit sums, `v_p(F(p^q, n)) = (σ_p((p^q - 1)n + 1) - 1) / (p - 1)`, and works
//! for `n` of any size. `F(s, 0) = 1`.

use rug::Integer;

use crate::config::Limits;
use crate::digits::{
    check_nonnegative, digit_sum_u128, mul_mod_u64, pow_mod_u64, sigma_p, PrimePower,
};
use crate::error::{Error, Result};
use crate::modular::{inverse_mod_u64, Granville};

/// Exact `F(s, n)`, guarded by `limits.exact_max_sn`.
pub fn catalan_exact(s: u64, n: u64, limits: &Limits) -> Result<Integer> {
    if s < 2 {
        return Err(Error::Hypothesis(format!("s must be at least 2, got {s}")));
    }
    let sn = s
        .checked_mul(n)
        .filter(|&sn| sn <= limits.exact_max_sn && sn <= u64::from(u32::MAX))
        .ok_or_else(|| Error::guard("s*n", u128::from(s) * u128::from(n), limits.exact_max_sn))?;
    let binom = Integer::from(Integer::binomial_u(sn as u32, n as u32));
    let divisor = Integer::from((s - 1) * n + 1);
    debug_assert!(binom.is_divisible(&divisor));
    Ok(binom.div_exact(&divisor))
}

/// `(p^q - 1) n + 1`, whose digit sum carries the valuation of `F(p^q, n)`.
fn shifted(pp: &PrimePower, n: &Integer) -> Integer {
    Integer::from(pp.modulus() - 1u32) * n + 1u32
}

/// `v_p(F(p^q, n))` from the digit sum of `(p^q - 1) n + 1`.
pub fn catalan_valuation(pp: &PrimePower, n: &Integer) -> Result<u64> {
    check_nonnegative(n)?;
    let sigma = sigma_p(&shifted(pp, n), pp.p())?;
    Ok((sigma - 1) / (pp.p() - 1))
}

/// Machine-word fast path of [`catalan_valuation`] for brute-force sweeps.
pub fn catalan_valuation_u64(pp: &PrimePower, n: u64) -> u64 {
    match pp.modulus_u64() {
        Some(m)
            if u128::from(m - 1)
                .checked_mul(u128::from(n))
                .is_some_and(|v| v < u128::MAX) =>
        {
            let value = u128::from(m - 1) * u128::from(n) + 1;
            (digit_sum_u128(value, pp.p()) - 1) / (pp.p() - 1)
        }
        _ => catalan_valuation(pp, &Integer::from(n)).expect("n is nonnegative"),
    }
}

/// Whether `p^q` divides `F(p^q, n)`.
pub fn divides(pp: &PrimePower, n: &Integer) -> Result<bool> {
    Ok(catalan_valuation(pp, n)? >= u64::from(pp.q()))
}

/// `F(p^q, n) mod p^q` through Granville on `C(p^q n + 1, n)`.
pub fn catalan_residue_mod_pq(pp: &PrimePower, n: &Integer) -> Result<u64> {
    let engine = Granville::new(pp, &Limits::default())?;
    catalan_residue_with(&engine, n)
}

/// [`catalan_residue_mod_pq`] with a prebuilt engine, for sweeps over many `n`.
pub fn catalan_residue_with(engine: &Granville, n: &Integer) -> Result<u64> {
    check_nonnegative(n)?;
    let pp = engine.prime_power();
    let modulus = engine.modulus();
    let top = Integer::from(pp.modulus() * n) + 1u32;
    let g = engine.binom(&top, n)?;
    if g.e0 >= u64::from(pp.q()) {
        return Ok(0);
    }
    let p_part = pow_mod_u64(pp.p(), g.e0, modulus);
    let divisor = Integer::from(&top % modulus)
        .to_u64()
        .expect("reduced below modulus");
    let inv = inverse_mod_u64(divisor, modulus).expect("p^q n + 1 is prime to p");
    Ok(mul_mod_u64(
        mul_mod_u64(g.unit_residue, p_part, modulus),
        inv,
        modulus,
    ))
}
