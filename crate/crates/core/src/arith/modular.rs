use crate::arith::factor::{factorize, gcd};
use crate::error::{Error, Result};

/// Reduces a signed integer into `[0, modulus)`.
#[inline]
pub fn reduce(value: i64, modulus: u64) -> u64 {
    (value as i128).rem_euclid(modulus as i128) as u64
}

#[inline]
pub fn mul_mod(a: u64, b: u64, modulus: u64) -> u64 {
    ((a as u128 * b as u128) % modulus as u128) as u64
}

#[inline]
pub fn add_mod(a: u64, b: u64, modulus: u64) -> u64 {
    ((a as u128 + b as u128) % modulus as u128) as u64
}

#[inline]
pub fn sub_mod(a: u64, b: u64, modulus: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        modulus - (b - a)
    }
}

/// Square-and-multiply on already reduced operands. `modulus` must be at least 2.
pub(crate) fn pow_mod_unchecked(mut base: u64, mut exp: u64, modulus: u64) -> u64 {
    let mut acc = 1 % modulus;
    base %= modulus;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, modulus);
        }
        base = mul_mod(base, base, modulus);
        exp >>= 1;
    }
    acc
}

/// `base^exp mod modulus`, with the result in `[0, modulus)`.
pub fn pow_mod(base: i64, exp: u64, modulus: u64) -> Result<u64> {
    if modulus < 2 {
        return Err(Error::invalid(format!(
            "modulus must be at least 2, got {modulus}"
        )));
    }
    Ok(pow_mod_unchecked(reduce(base, modulus), exp, modulus))
}

/// Inverse of `a` modulo `modulus`, or `None` when they are not coprime.
pub fn inv_mod(a: u64, modulus: u64) -> Option<u64> {
    let (mut old_r, mut r) = (a as i128 % modulus as i128, modulus as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(modulus as i128) as u64)
}

/// Euler's phi of `n`, by trial-division factorization.
pub fn euler_phi(n: u64) -> u64 {
    factorize(n)
        .iter()
        .fold(n, |acc, &(q, _)| acc / q * (q - 1))
}

/// Smallest `k >= 1` with `a^k = 1 mod modulus`.
pub fn multiplicative_order(a: i64, modulus: u64) -> Result<u64> {
    if modulus < 2 {
        return Err(Error::invalid(format!(
            "modulus must be at least 2, got {modulus}"
        )));
    }
    let a = reduce(a, modulus);
    if gcd(a, modulus) != 1 {
        return Err(Error::invalid(format!(
            "{a} is not a unit modulo {modulus}"
        )));
    }
    let mut order = euler_phi(modulus);
    for (q, _) in factorize(order) {
        while order.is_multiple_of(q) && pow_mod_unchecked(a, order / q, modulus) == 1 {
            order /= q;
        }
    }
    Ok(order)
}

/// Legendre symbol `(a | ell)` for an odd prime `ell`: 0, 1 or -1.
pub fn legendre(a: u64, ell: u64) -> i32 {
    let a = a % ell;
    if a == 0 {
        return 0;
    }
    if pow_mod_unchecked(a, (ell - 1) / 2, ell) == 1 {
        1
    } else {
        -1
    }
}

/// A square root of `a` modulo the odd prime `ell` (Tonelli-Shanks).
pub fn sqrt_mod(a: u64, ell: u64) -> Option<u64> {
    let a = a % ell;
    if a == 0 {
        return Some(0);
    }
    if legendre(a, ell) != 1 {
        return None;
    }
    if ell % 4 == 3 {
        return Some(pow_mod_unchecked(a, (ell + 1) / 4, ell));
    }
    let mut q = ell - 1;
    let mut s = 0u32;
    while q.is_multiple_of(2) {
        q /= 2;
        s += 1;
    }
    let z = (2..ell).find(|&z| legendre(z, ell) == -1)?;
    let mut m = s;
    let mut c = pow_mod_unchecked(z, q, ell);
    let mut t = pow_mod_unchecked(a, q, ell);
    let mut r = pow_mod_unchecked(a, q.div_ceil(2), ell);
    while t != 1 {
        let mut i = 0u32;
        let mut t2 = t;
        while t2 != 1 {
            t2 = mul_mod(t2, t2, ell);
            i += 1;
        }
        let b = pow_mod_unchecked(c, 1u64 << (m - i - 1), ell);
        m = i;
        c = mul_mod(b, b, ell);
        t = mul_mod(t, c, ell);
        r = mul_mod(r, b, ell);
    }
    Some(r)
}
