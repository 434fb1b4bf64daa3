use crate::arith::modular::{mul_mod, pow_mod_unchecked};
use crate::error::{Error, Result};

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn lcm(a: u64, b: u64) -> Option<u64> {
    if a == 0 || b == 0 {
        return Some(0);
    }
    (a / gcd(a, b)).checked_mul(b)
}

/// `floor(sqrt(n))`.
pub fn isqrt(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u64;
    while x.checked_mul(x).is_none_or(|sq| sq > n) {
        x -= 1;
    }
    while (x + 1).checked_mul(x + 1).is_some_and(|sq| sq <= n) {
        x += 1;
    }
    x
}

/// Deterministic Miller-Rabin for the full `u64` range.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for q in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(q) {
            return n == q;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod_unchecked(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Prime factorization `[(q, e)]` in ascending order of `q`, by trial division.
///
/// Intended for the small moduli and group orders that occur here; the cost
/// is `O(sqrt(largest prime factor but one))`.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    if n < 2 {
        return out;
    }
    let mut push = |q: u64, n: &mut u64| {
        let mut e = 0;
        while (*n).is_multiple_of(q) {
            *n /= q;
            e += 1;
        }
        if e > 0 {
            out.push((q, e));
        }
    };
    push(2, &mut n);
    let mut q: u64 = 3;
    while q.saturating_mul(q) <= n {
        push(q, &mut n);
        q += 2;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Trial division up to `bound`; the leftover cofactor is accepted only when
/// it is provably prime.
pub fn factorize_bounded(mut n: u64, bound: u64) -> Result<Vec<(u64, u32)>> {
    let mut out = Vec::new();
    let original = n;
    let mut q: u64 = 2;
    while q <= bound && q.saturating_mul(q) <= n {
        let mut e = 0;
        while n.is_multiple_of(q) {
            n /= q;
            e += 1;
        }
        if e > 0 {
            out.push((q, e));
        }
        q += if q == 2 { 1 } else { 2 };
    }
    if n > 1 {
        if !is_prime(n) {
            return Err(Error::Unfactorable(original));
        }
        out.push((n, 1));
    }
    Ok(out)
}
