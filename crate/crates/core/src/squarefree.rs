//! Squarefreeness of `C(m, n)` by per-prime Kummer carries, and scans of
//! `C(p^q n + 1, n)`.
//!
//! `r^2 | C(m, n)` iff adding `n` and `m - n` in base `r` carries at least
//! twice. A prime with `r^2 > m` leaves `m` at most two base-`r` digits and so
//! carries at most once; only primes up to `√m` are sieved.
//!
//! For `q >= 2` a non-exceptional `n` has `p^q | C(p^q n + 1, n)`, so only the
//! exceptions can give squarefree coefficients. `scan_candidates` tests those,
//! or every `n` in exhaustive mode.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rug::Integer;
use serde::{Deserialize, Serialize};

use crate::catalan::catalan_valuation_u64;
use crate::config::Limits;
use crate::digits::{binom_valuation, carries_u64, check_nonnegative, PrimePower};
use crate::error::{Error, Result};
use crate::exceptions;
use crate::sieve::primes_up_to;

/// Candidates processed between checkpoint writes.
const CHUNK: usize = 4096;

/// Primes up to `√m_max`, shared read-only by every test.
#[derive(Clone, Debug)]
pub struct SquarefreeTester {
    primes: Vec<u64>,
    max_m: u64,
}

impl SquarefreeTester {
    pub fn new(max_m: &Integer, limits: &Limits) -> Result<Self> {
        check_nonnegative(max_m)?;
        let root = Integer::from(max_m.sqrt_ref());
        if root > limits.sieve_limit {
            return Err(Error::guard("sqrt(m) (sieve)", &root, limits.sieve_limit));
        }
        let root = root.to_u64().expect("bounded by the sieve limit");
        let max_m = max_m.to_u64().expect("sqrt fits the sieve limit");
        Ok(SquarefreeTester {
            primes: primes_up_to(root, limits.sieve_segment),
            max_m,
        })
    }

    pub fn max_m(&self) -> u64 {
        self.max_m
    }

    /// Whether `C(m, n)` is squarefree; `m` must not exceed the tester's bound.
    pub fn is_squarefree(&self, m: u64, n: u64) -> Result<bool> {
        if n > m {
            return Err(Error::LowerExceedsUpper {
                upper: m.to_string(),
                lower: n.to_string(),
            });
        }
        if m > self.max_m {
            return Err(Error::guard("m (squarefree tester)", m, self.max_m));
        }
        let r = m - n;
        for &prime in &self.primes {
            if prime * prime > m {
                break;
            }
            if carries_u64(n, r, prime, 0, 2) >= 2 {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Whether `C(m, n)` is squarefree.
pub fn is_squarefree_binom(m: &Integer, n: &Integer, limits: &Limits) -> Result<bool> {
    check_nonnegative(n)?;
    if n > m {
        return Err(Error::LowerExceedsUpper {
            upper: m.to_string(),
            lower: n.to_string(),
        });
    }
    let tester = SquarefreeTester::new(m, limits)?;
    tester.is_squarefree(
        m.to_u64().expect("checked by tester"),
        n.to_u64().expect("n <= m"),
    )
}

#[derive(Clone, Debug, Default)]
pub struct ScanOptions {
    /// Test every `n <= bound` instead of the exceptions only.
    pub exhaustive: bool,
    /// Worker threads; 0 and 1 both mean single-threaded.
    pub jobs: usize,
    /// Resume from and write progress to this file.
    pub checkpoint: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub p: u64,
    pub q: u32,
    pub bound: String,
    pub last_n: String,
    pub hits: Vec<String>,
}

impl Checkpoint {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Ok(serde_json::from_str(text.trim())?)
    }

    pub fn store(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, serde_json::to_string(self)? + "\n")?;
        fs::rename(&tmp, path)?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanReport {
    pub pp: PrimePower,
    pub bound: Integer,
    pub exhaustive: bool,
    pub candidates_tested: u64,
    pub squarefree_hits: Vec<Integer>,
    pub elapsed_secs: f64,
    /// Last `n` processed, if any.
    pub last_n: Option<Integer>,
    pub resumed_from: Option<Integer>,
    pub checkpoint_path: Option<PathBuf>,
}

fn parse_int(text: &str) -> Result<Integer> {
    Integer::from_str_radix(text, 10)
        .map_err(|e| Error::Checkpoint(format!("bad integer {text:?}: {e}")))
}

fn test_range(tester: &SquarefreeTester, pq: u64, ns: &[u64], jobs: usize) -> Result<Vec<u64>> {
    let test = |chunk: &[u64]| -> Result<Vec<u64>> {
        let mut hits = Vec::new();
        for &n in chunk {
            if tester.is_squarefree(pq * n + 1, n)? {
                hits.push(n);
            }
        }
        Ok(hits)
    };
    if jobs <= 1 || ns.len() < 2 * jobs {
        return test(ns);
    }
    let per = ns.len().div_ceil(jobs);
    let parts: Vec<Result<Vec<u64>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = ns
            .chunks(per)
            .map(|c| scope.spawn(move || test(c)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("scan worker panicked"))
            .collect()
    });
    let mut hits = Vec::new();
    for part in parts {
        hits.extend(part?);
    }
    hits.sort_unstable();
    Ok(hits)
}

/// Squarefree `C(p^q n + 1, n)` for `1 <= n <= bound`.
pub fn scan_candidates(
    pp: &PrimePower,
    bound: &Integer,
    options: &ScanOptions,
    limits: &Limits,
) -> Result<ScanReport> {
    let start = Instant::now();
    check_nonnegative(bound)?;
    if !options.exhaustive && pp.q() < 2 {
        return Err(Error::Hypothesis(format!(
            "candidate filtering needs q >= 2 (got {pp}); use exhaustive mode"
        )));
    }
    let pq = pp.small_modulus()?;
    let top = Integer::from(pp.modulus() * bound) + 1u32;
    let tester = SquarefreeTester::new(&top, limits)?;
    let bound_u64 = bound.to_u64().expect("bounded by the sieve guard");

    let mut hits: Vec<u64> = Vec::new();
    let mut resumed_from = None;
    let mut after = 0u64;
    if let Some(path) = options.checkpoint.as_deref().filter(|p| p.exists()) {
        let saved = Checkpoint::load(path)?;
        if saved.p != pp.p() || saved.q != pp.q() || parse_int(&saved.bound)? != *bound {
            return Err(Error::Checkpoint(format!(
                "{} holds a scan of {}^{} up to {}, not {pp} up to {bound}",
                path.display(),
                saved.p,
                saved.q,
                saved.bound
            )));
        }
        let last = parse_int(&saved.last_n)?;
        after = last
            .to_u64()
            .ok_or_else(|| Error::Checkpoint("last_n out of range".into()))?;
        for h in &saved.hits {
            hits.push(
                parse_int(h)?
                    .to_u64()
                    .ok_or_else(|| Error::Checkpoint("hit out of range".into()))?,
            );
        }
        resumed_from = Some(last);
    }

    let candidates: Vec<u64> = if options.exhaustive {
        (after + 1..=bound_u64).collect()
    } else {
        exceptions::enumerate(pp, bound, limits)?
            .into_iter()
            .map(|f| f.value.to_u64().expect("at most bound"))
            .filter(|&n| n > after)
            .collect()
    };

    let mut last_n = resumed_from.as_ref().and_then(|v: &Integer| v.to_u64());
    for chunk in candidates.chunks(CHUNK) {
        hits.extend(test_range(&tester, pq, chunk, options.jobs)?);
        last_n = chunk.last().copied();
        if let Some(path) = &options.checkpoint {
            Checkpoint {
                p: pp.p(),
                q: pp.q(),
                bound: bound.to_string(),
                last_n: last_n.unwrap_or(0).to_string(),
                hits: hits.iter().map(u64::to_string).collect(),
            }
            .store(path)?;
        }
    }
    hits.sort_unstable();
    hits.dedup();

    Ok(ScanReport {
        pp: pp.clone(),
        bound: bound.clone(),
        exhaustive: options.exhaustive,
        candidates_tested: candidates.len() as u64,
        squarefree_hits: hits.into_iter().map(Integer::from).collect(),
        elapsed_secs: start.elapsed().as_secs_f64(),
        last_n: last_n.map(Integer::from),
        resumed_from,
        checkpoint_path: options.checkpoint.clone(),
    })
}

/// Checks that every non-exceptional `n <= bound` has `p^q | C(p^q n + 1, n)`
/// and a non-squarefree coefficient.
pub fn verify_divisibility_filter(pp: &PrimePower, bound: u64, limits: &Limits) -> Result<bool> {
    if pp.q() < 2 {
        return Err(Error::Hypothesis(format!(
            "the filter needs q >= 2, got {pp}"
        )));
    }
    let pq = pp.small_modulus()?;
    let top = Integer::from(pp.modulus() * bound) + 1u32;
    let tester = SquarefreeTester::new(&top, limits)?;
    let listed: std::collections::BTreeSet<u64> =
        exceptions::enumerate(pp, &Integer::from(bound), limits)?
            .into_iter()
            .map(|f| f.value.to_u64().expect("at most bound"))
            .collect();
    let q = u64::from(pp.q());
    for n in 1..=bound {
        let exceptional = catalan_valuation_u64(pp, n) < q;
        if exceptional != listed.contains(&n) {
            return Ok(false);
        }
        if exceptional {
            continue;
        }
        let m = pq * n + 1;
        if binom_valuation(&Integer::from(m), &Integer::from(n), pp.p())? < q
            || tester.is_squarefree(m, n)?
        {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int(v: u64) -> Integer {
        Integer::from(v)
    }

    fn pp(p: u64, q: u32) -> PrimePower {
        PrimePower::new(p, q).unwrap()
    }

    fn hits(report: &ScanReport) -> Vec<u64> {
        report
            .squarefree_hits
            .iter()
            .map(|h| h.to_u64().unwrap())
            .collect()
    }

    #[test]
    fn examples() {
        let limits = Limits::default();
        assert!(is_squarefree_binom(&int(5), &int(1), &limits).unwrap());
        assert!(is_squarefree_binom(&int(13), &int(3), &limits).unwrap());
        assert!(is_squarefree_binom(&int(181), &int(45), &limits).unwrap());
        assert!(!is_squarefree_binom(&int(9), &int(2), &limits).unwrap());
        assert!(is_squarefree_binom(&int(0), &int(0), &limits).unwrap());
        assert!(is_squarefree_binom(&int(3), &int(4), &limits).is_err());
    }

    #[test]
    fn sieve_guard() {
        let limits = Limits {
            sieve_limit: 10,
            ..Limits::default()
        };
        assert!(is_squarefree_binom(&int(120), &int(3), &limits).is_ok());
        assert!(is_squarefree_binom(&int(121), &int(3), &limits)
            .unwrap_err()
            .is_resource());
    }

    #[test]
    fn scan_examples() {
        let limits = Limits::default();
        let opts = ScanOptions::default();
        let report = scan_candidates(&pp(2, 2), &int(100), &opts, &limits).unwrap();
        assert_eq!(hits(&report), [1, 3, 45]);
        assert_eq!(report.candidates_tested, 10);
        let report = scan_candidates(&pp(3, 2), &int(100), &opts, &limits).unwrap();
        assert_eq!(hits(&report), [1, 4, 10]);
        let report = scan_candidates(&pp(2, 2), &int(0), &opts, &limits).unwrap();
        assert!(report.squarefree_hits.is_empty());
        assert_eq!(report.candidates_tested, 0);
        assert!(scan_candidates(&pp(3, 1), &int(10), &opts, &limits).is_err());
    }

    #[test]
    fn exhaustive_and_filtered_agree_with_threads() {
        let limits = Limits::default();
        for (p, q) in [(2, 2), (3, 2)] {
            let filtered =
                scan_candidates(&pp(p, q), &int(3000), &ScanOptions::default(), &limits).unwrap();
            let exhaustive = ScanOptions {
                exhaustive: true,
                jobs: 4,
                checkpoint: None,
            };
            let full = scan_candidates(&pp(p, q), &int(3000), &exhaustive, &limits).unwrap();
            assert_eq!(filtered.squarefree_hits, full.squarefree_hits);
            assert_eq!(full.candidates_tested, 3000);
        }
    }

    #[test]
    fn checkpoint_resume() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scan.json");
        let limits = Limits::default();
        let opts = ScanOptions {
            exhaustive: true,
            jobs: 2,
            checkpoint: Some(path.clone()),
        };
        Checkpoint {
            p: 2,
            q: 2,
            bound: "100".into(),
            last_n: "40".into(),
            hits: vec!["1".into(), "3".into()],
        }
        .store(&path)
        .unwrap();
        let report = scan_candidates(&pp(2, 2), &int(100), &opts, &limits).unwrap();
        assert_eq!(hits(&report), [1, 3, 45]);
        assert_eq!(report.candidates_tested, 60);
        assert_eq!(report.resumed_from, Some(int(40)));
        let saved = Checkpoint::load(&path).unwrap();
        assert_eq!(saved.last_n, "100");
        assert_eq!(saved.hits, ["1", "3", "45"]);

        let err = scan_candidates(&pp(3, 2), &int(100), &opts, &limits).unwrap_err();
        assert!(matches!(err, Error::Checkpoint(_)));
    }

    #[test]
    fn filter_holds() {
        let limits = Limits::default();
        assert!(verify_divisibility_filter(&pp(2, 2), 500, &limits).unwrap());
        assert!(verify_divisibility_filter(&pp(3, 2), 300, &limits).unwrap());
        assert!(verify_divisibility_filter(&pp(2, 2), 1, &limits).unwrap());
        assert!(verify_divisibility_filter(&pp(5, 1), 10, &limits).is_err());
    }
}
