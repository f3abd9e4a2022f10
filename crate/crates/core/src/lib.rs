//! Exact arithmetic for generalized Catalan numbers
//! `F(s, n) = C(sn, n) / ((s - 1)n + 1)` specialised to prime-power `s = p^q`.
//!
//! The crate answers three kinds of questions:
//!
//! - when `p^q` divides `F(p^q, n)` and, when it does not, which residue
//!   `F(p^q, n) mod p^q` takes ([`catalan`], [`exceptions`], [`residues`]);
//! - whether `C(p^q n + 1, n)` is squarefree ([`squarefree`]);
//! - where the explicit analytic inequality that rules out squarefree values
//!   for large `n` starts to hold ([`analytic`]).
//!
//! Everything rests on base-`p` digit arithmetic ([`digits`]) and on the
//! Lucas/Granville congruences for binomial coefficients ([`modular`]).
//! Values of `n` are arbitrary-precision [`rug::Integer`]s; valuations and
//! residues are machine integers.

pub mod analytic;
pub mod catalan;
pub mod cli;
pub mod config;
pub mod digits;
pub mod error;
pub mod exceptions;
pub mod modular;
pub mod residues;
pub mod sieve;
pub mod squarefree;

pub use config::Limits;
pub use digits::{DigitVector, PrimePower};
pub use error::{Error, Result};
pub use rug::Integer;
