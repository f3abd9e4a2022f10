//! Segmented sieve of Eratosthenes over odd numbers.

/// All primes `<= limit`, ascending. `segment_len` is the number of odd
/// candidates flagged per pass.
pub fn primes_up_to(limit: u64, segment_len: usize) -> Vec<u64> {
    let mut primes = Vec::new();
    if limit < 2 {
        return primes;
    }
    primes.push(2);
    if limit < 3 {
        return primes;
    }
    let root = limit.isqrt();
    let base = simple_odd_primes(root);
    let segment_len = segment_len.max(1) as u64;
    let mut flags = vec![true; segment_len as usize];
    // Odd index k stands for 2k + 1; index 0 (the number 1) is skipped.
    let last = (limit - 1) / 2;
    let mut low = 1u64;
    while low <= last {
        let high = (low + segment_len - 1).min(last);
        let width = (high - low + 1) as usize;
        flags[..width].fill(true);
        for &r in &base {
            let square = r * r;
            if square > 2 * high + 1 {
                break;
            }
            let start_value = square.max((2 * low + 1).div_ceil(r) * r);
            let start_value = if start_value % 2 == 0 {
                start_value + r
            } else {
                start_value
            };
            let mut k = (start_value - 1) / 2;
            while k <= high {
                flags[(k - low) as usize] = false;
                k += r;
            }
        }
        primes.extend(
            flags[..width]
                .iter()
                .enumerate()
                .filter(|(_, &f)| f)
                .map(|(i, _)| 2 * (low + i as u64) + 1),
        );
        low = high + 1;
    }
    primes
}

fn simple_odd_primes(limit: u64) -> Vec<u64> {
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in (3..=n).step_by(2) {
        if !composite[i] {
            out.push(i as u64);
            for j in (i * i..=n).step_by(2 * i) {
                composite[j] = true;
            }
        }
    }
    out
}
