//! Resource limits and runtime configuration.
//!
//! Precedence is flags > `PQCAT_*` environment variables > defaults; the CLI
//! applies flags on top of [`Limits::from_env`].

use std::env;

pub const ENV_PRECISION: &str = "PQCAT_PRECISION";
pub const ENV_SIEVE_SEGMENT: &str = "PQCAT_SIEVE_SEGMENT";

pub const DEFAULT_PRECISION: u32 = 256;
pub const MAX_PRECISION: u32 = 4096;
pub const DEFAULT_SIEVE_SEGMENT: usize = 1 << 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Limits {
    /// Largest `s * n` for which `F(s, n)` is computed exactly.
    pub exact_max_sn: u64,
    /// Largest prime the squarefree tester will sieve for.
    pub sieve_limit: u64,
    /// Odd-only flags per sieve segment.
    pub sieve_segment: usize,
    /// Largest modulus `p^q` for which a table of `k!_p mod p^q` is built.
    pub factorial_table_max: u64,
    /// Largest bound for the brute-force exception scan (p = 2, q >= 3).
    pub brute_force_max: u64,
    /// Working precision in bits for the analytic module.
    pub precision: u32,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            exact_max_sn: 1_000_000,
            sieve_limit: 100_000_000,
            sieve_segment: DEFAULT_SIEVE_SEGMENT,
            factorial_table_max: 1 << 24,
            brute_force_max: 10_000_000,
            precision: DEFAULT_PRECISION,
        }
    }
}

impl Limits {
    /// Defaults overridden by any well-formed `PQCAT_*` variables.
    pub fn from_env() -> Self {
        let mut limits = Limits::default();
        if let Some(bits) = env::var(ENV_PRECISION)
            .ok()
            .and_then(|v| v.trim().parse().ok())
        {
            limits.precision = bits;
        }
        if let Some(seg) = env::var(ENV_SIEVE_SEGMENT)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&s| s > 0)
        {
            limits.sieve_segment = seg;
        }
        limits
    }
}
