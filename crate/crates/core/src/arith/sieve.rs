//! Segmented sieve of Eratosthenes over odd numbers.
//!
//! Each segment is a bitset over the odd integers in a window; bit `i` stands
//! for `seg_lo + 2i`. Segments are sieved independently against the base
//! primes up to `sqrt(hi)` and concatenated in ascending order.

use rayon::prelude::*;

use crate::arith::factor::isqrt;
use crate::error::{Error, Result};

/// Default upper bound accepted by [`sieve_primes`].
pub const DEFAULT_SIEVE_MAX: u64 = 100_000_000;

/// Odd numbers per segment: 32 KiB of bits, roughly one L1 data cache.
const SEGMENT_ODDS: u64 = 32 * 1024 * 8;

/// The closed interval `[lo, hi]` whose primes are to be produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrimeRange {
    lo: u64,
    hi: u64,
}

impl PrimeRange {
    pub fn new(lo: u64, hi: u64) -> Result<Self> {
        if lo < 2 {
            return Err(Error::invalid(format!(
                "range start must be at least 2, got {lo}"
            )));
        }
        if hi <= lo {
            return Err(Error::invalid(format!(
                "range end {hi} must exceed start {lo}"
            )));
        }
        Ok(PrimeRange { lo, hi })
    }

    pub fn lo(&self) -> u64 {
        self.lo
    }

    pub fn hi(&self) -> u64 {
        self.hi
    }

    /// The primes in this range, ascending.
    pub fn primes(&self) -> Result<Vec<u64>> {
        sieve_primes(*self)
    }
}

/// Primes in `range` using the default upper limit of 10^8.
pub fn sieve_primes(range: PrimeRange) -> Result<Vec<u64>> {
    sieve_primes_with_limit(range, DEFAULT_SIEVE_MAX)
}

pub fn sieve_primes_with_limit(range: PrimeRange, max_hi: u64) -> Result<Vec<u64>> {
    if range.hi > max_hi {
        return Err(Error::ResourceLimit(format!(
            "sieve bound {} exceeds configured maximum {max_hi}",
            range.hi
        )));
    }
    let base = simple_sieve(isqrt(range.hi));
    let mut out = Vec::new();
    if range.lo <= 2 {
        out.push(2);
    }
    // First odd number >= max(lo, 3).
    let first_odd = range.lo.max(3) | 1;
    if first_odd > range.hi {
        return Ok(out);
    }
    let odd_count = (range.hi - first_odd) / 2 + 1;
    let segments: Vec<u64> = (0..odd_count.div_ceil(SEGMENT_ODDS))
        .map(|k| first_odd + 2 * k * SEGMENT_ODDS)
        .collect();
    let chunks: Vec<Vec<u64>> = segments
        .par_iter()
        .map(|&seg_lo| {
            let remaining = (range.hi - seg_lo) / 2 + 1;
            sieve_segment(seg_lo, remaining.min(SEGMENT_ODDS), &base)
        })
        .collect();
    for chunk in chunks {
        out.extend(chunk);
    }
    Ok(out)
}

/// Sieves the `len` odd numbers `seg_lo, seg_lo + 2, ...`; `seg_lo` is odd.
fn sieve_segment(seg_lo: u64, len: u64, base: &[u64]) -> Vec<u64> {
    let mut composite = vec![0u64; len.div_ceil(64) as usize];
    let seg_hi = seg_lo + 2 * (len - 1);
    for &q in base.iter().skip(1) {
        let sq = q * q;
        if sq > seg_hi {
            break;
        }
        let mut start = sq.max(seg_lo.div_ceil(q) * q);
        if start % 2 == 0 {
            start += q;
        }
        let mut idx = (start - seg_lo) / 2;
        while idx < len {
            composite[(idx / 64) as usize] |= 1 << (idx % 64);
            idx += q;
        }
    }
    let mut primes = Vec::new();
    for (w, &word) in composite.iter().enumerate() {
        let mut free = !word;
        while free != 0 {
            let bit = free.trailing_zeros() as u64;
            let idx = w as u64 * 64 + bit;
            if idx >= len {
                break;
            }
            let n = seg_lo + 2 * idx;
            if n > 1 {
                primes.push(n);
            }
            free &= free - 1;
        }
    }
    primes
}

/// All primes `<= n`, plain sieve; used for base primes.
fn simple_sieve(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut is_composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !is_composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                is_composite[j] = true;
                j += i;
            }
        }
    }
    out
}
