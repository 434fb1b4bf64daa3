//! Rational elliptic curves in long Weierstrass form and their Frobenius traces.
//!
//! `a_ell = ell + 1 - #E(F_ell)` is obtained by counting points: a
//! quadratic-character sum for small `ell`, baby-step giant-step in the
//! Hasse interval above the configured threshold.

pub mod bsgs;
pub mod group;

use serde::{Deserialize, Serialize};

use crate::arith::factor::{factorize, is_prime, isqrt};
use crate::arith::modular::{mul_mod, reduce, sub_mod};
use crate::error::{Error, Result};
use group::ShortCurve;

pub const DEFAULT_NAIVE_LIMIT: u64 = 100_000;
pub const DEFAULT_BSGS_MAX_POINTS: u32 = 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointCountConfig {
    /// Primes up to and including this bound are counted by character sums.
    pub naive_limit: u64,
    pub bsgs_max_points: u32,
}

impl Default for PointCountConfig {
    fn default() -> Self {
        PointCountConfig {
            naive_limit: DEFAULT_NAIVE_LIMIT,
            bsgs_max_points: DEFAULT_BSGS_MAX_POINTS,
        }
    }
}

/// `y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6` with a claimed conductor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveModel {
    coeffs: [i64; 5],
    discriminant: i128,
    conductor: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Reduction {
    Good,
    Bad,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ModelWarning {
    /// `ell` divides the model discriminant but not the conductor.
    NonMinimalModelSuspected,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ReductionReport {
    pub ell: u64,
    pub reduction: Reduction,
    pub warning: Option<ModelWarning>,
}

fn overflow() -> Error {
    Error::Overflow("Weierstrass invariants exceed 128 bits".into())
}

impl CurveModel {
    /// Builds the model from `[a1, a2, a3, a4, a6]`. The discriminant is
    /// recomputed; every prime of the conductor must divide it.
    pub fn new(coeffs: [i64; 5], conductor: u64) -> Result<Self> {
        if conductor == 0 {
            return Err(Error::invalid("conductor must be positive"));
        }
        let discriminant = discriminant(coeffs)?;
        if discriminant == 0 {
            return Err(Error::invalid(format!(
                "singular Weierstrass model {coeffs:?}"
            )));
        }
        for (q, _) in factorize(conductor) {
            if discriminant % q as i128 != 0 {
                return Err(Error::invalid(format!(
                    "conductor {conductor} has prime {q} not dividing the discriminant {discriminant}"
                )));
            }
        }
        Ok(CurveModel {
            coeffs,
            discriminant,
            conductor,
        })
    }

    pub fn coeffs(&self) -> [i64; 5] {
        self.coeffs
    }

    pub fn discriminant(&self) -> i128 {
        self.discriminant
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    /// `(b2, 2 b4, b6) mod ell`, so that `(2y + a1 x + a3)^2 = 4x^3 + b2 x^2 + 2 b4 x + b6`.
    fn b_invariants_mod(&self, ell: u64) -> (u64, u64, u64) {
        let [a1, a2, a3, a4, a6] = self.coeffs.map(|c| reduce(c, ell));
        let b2 = (mul_mod(a1, a1, ell) + mul_mod(4, a2, ell)) % ell;
        let b4 = (mul_mod(2, a4, ell) + mul_mod(a1, a3, ell)) % ell;
        let b6 = (mul_mod(a3, a3, ell) + mul_mod(4, a6, ell)) % ell;
        (b2, mul_mod(2, b4, ell), b6)
    }

    /// An isomorphic short model over `F_ell`, `ell >= 5`:
    /// `y^2 = x^3 - 27 c4 x - 54 c6`.
    pub fn short_model(&self, ell: u64) -> ShortCurve {
        let (b2, two_b4, b6) = self.b_invariants_mod(ell);
        let b4 = mul_mod(two_b4, ell.div_ceil(2), ell);
        let b2sq = mul_mod(b2, b2, ell);
        let c4 = sub_mod(b2sq, mul_mod(24, b4, ell), ell);
        let c6 = sub_mod(
            mul_mod(36, mul_mod(b2, b4, ell), ell),
            (mul_mod(b2sq, b2, ell) + mul_mod(216, b6, ell)) % ell,
            ell,
        );
        ShortCurve {
            a: sub_mod(0, mul_mod(27, c4, ell), ell),
            b: sub_mod(0, mul_mod(54, c6, ell), ell),
            ell,
        }
    }

    fn check_good(&self, ell: u64) -> Result<()> {
        if !is_prime(ell) {
            return Err(Error::invalid(format!("{ell} is not prime")));
        }
        if self.conductor.is_multiple_of(ell) {
            return Err(Error::invalid(format!(
                "{ell} divides the conductor {}: bad reduction",
                self.conductor
            )));
        }
        if self.discriminant % ell as i128 == 0 {
            return Err(Error::invalid(format!(
                "model is singular mod {ell} although {ell} does not divide the conductor; \
                 supply a model minimal at {ell}"
            )));
        }
        Ok(())
    }
}

/// `Delta = -b2^2 b8 - 8 b4^3 - 27 b6^2 + 9 b2 b4 b6`.
fn discriminant(coeffs: [i64; 5]) -> Result<i128> {
    let [a1, a2, a3, a4, a6] = coeffs.map(|c| c as i128);
    let m = |x: i128, y: i128| x.checked_mul(y).ok_or_else(overflow);
    let b2 = m(a1, a1)? + m(4, a2)?;
    let b4 = m(2, a4)? + m(a1, a3)?;
    let b6 = m(a3, a3)? + m(4, a6)?;
    let b8 = m(m(a1, a1)?, a6)? + m(m(4, a2)?, a6)? - m(m(a1, a3)?, a4)? + m(m(a2, a3)?, a3)?
        - m(a4, a4)?;
    let t1 = m(m(b2, b2)?, b8)?;
    let t2 = m(8, m(m(b4, b4)?, b4)?)?;
    let t3 = m(27, m(b6, b6)?)?;
    let t4 = m(9, m(m(b2, b4)?, b6)?)?;
    (-t1)
        .checked_sub(t2)
        .and_then(|v| v.checked_sub(t3))
        .and_then(|v| v.checked_add(t4))
        .ok_or_else(overflow)
}

/// Good iff `ell` does not divide the conductor.
pub fn reduction_type(curve: &CurveModel, ell: u64) -> Result<ReductionReport> {
    if ell < 2 {
        return Err(Error::invalid(format!("{ell} is not a prime")));
    }
    let divides_disc = curve.discriminant % ell as i128 == 0;
    let divides_cond = curve.conductor.is_multiple_of(ell);
    if divides_cond && !divides_disc {
        return Err(Error::Internal(format!(
            "{ell} divides the conductor but not the discriminant"
        )));
    }
    Ok(ReductionReport {
        ell,
        reduction: if divides_cond {
            Reduction::Bad
        } else {
            Reduction::Good
        },
        warning: (divides_disc && !divides_cond).then_some(ModelWarning::NonMinimalModelSuspected),
    })
}

/// `#E(F_ell)` including the point at infinity, by direct counting.
pub fn count_points_naive(curve: &CurveModel, ell: u64, config: &PointCountConfig) -> Result<u64> {
    curve.check_good(ell)?;
    if ell > config.naive_limit {
        return Err(Error::ResourceLimit(format!(
            "{ell} exceeds the naive point-count limit {}; use the BSGS count",
            config.naive_limit
        )));
    }
    if ell <= 3 {
        return Ok(count_by_enumeration(curve, ell));
    }
    // chi[v] is the quadratic character of v mod ell
    let mut chi = vec![-1i8; ell as usize];
    chi[0] = 0;
    let mut square = 0u64;
    for y in 1..=(ell - 1) / 2 {
        // y^2 = (y - 1)^2 + 2y - 1
        square = (square + 2 * y - 1) % ell;
        chi[square as usize] = 1;
    }
    let (b2, two_b4, b6) = curve.b_invariants_mod(ell);
    // Walk v = 4x^3 + b2 x^2 + 2 b4 x + b6 by forward differences.
    let step = |a: u64, b: u64| if a + b >= ell { a + b - ell } else { a + b };
    let mut v = b6;
    let mut d1 = (4 + b2 + two_b4) % ell;
    let mut d2 = (24 + 2 * b2) % ell;
    let d3 = 24 % ell;
    let mut affine: i64 = 0;
    for _ in 0..ell {
        affine += 1 + chi[v as usize] as i64;
        v = step(v, d1);
        d1 = step(d1, d2);
        d2 = step(d2, d3);
    }
    Ok(affine as u64 + 1)
}

/// Full scan of `(x, y)` pairs against the long equation.
fn count_by_enumeration(curve: &CurveModel, ell: u64) -> u64 {
    let [a1, a2, a3, a4, a6] = curve.coeffs.map(|c| reduce(c, ell));
    let mut count = 1;
    for x in 0..ell {
        for y in 0..ell {
            let lhs = (y * y + a1 * x * y + a3 * y) % ell;
            let rhs = (x * x * x + a2 * x * x + a4 * x + a6) % ell;
            if lhs == rhs {
                count += 1;
            }
        }
    }
    count
}

/// `#E(F_ell)` by baby-step giant-step; requires `ell >= 5`.
pub fn count_points_bsgs(curve: &CurveModel, ell: u64, config: &PointCountConfig) -> Result<u64> {
    curve.check_good(ell)?;
    if ell < 5 {
        return Err(Error::invalid("BSGS counting requires ell >= 5"));
    }
    bsgs::group_order(&curve.short_model(ell), config.bsgs_max_points)
}

/// `a_ell = ell + 1 - #E(F_ell)`, checked against the Hasse bound.
pub fn trace_of_frobenius(curve: &CurveModel, ell: u64, config: &PointCountConfig) -> Result<i64> {
    let count = if ell <= config.naive_limit || ell < 5 {
        count_points_naive(
            curve,
            ell,
            &PointCountConfig {
                naive_limit: ell.max(config.naive_limit),
                ..*config
            },
        )?
    } else {
        count_points_bsgs(curve, ell, config)?
    };
    let a = ell as i64 + 1 - count as i64;
    if !within_hasse_bound(a, ell) {
        return Err(Error::Internal(format!(
            "a_{ell} = {a} violates the Hasse bound"
        )));
    }
    Ok(a)
}

/// `|a| <= floor(2 sqrt(ell))`.
pub fn within_hasse_bound(a: i64, ell: u64) -> bool {
    a.unsigned_abs() <= isqrt(4 * ell)
}

/// Ordinary at `p` iff `p` does not divide `a_p`.
pub fn is_ordinary_trace(a_p: i64, p: u64) -> bool {
    reduce(a_p, p) != 0
}

pub fn is_ordinary(curve: &CurveModel, p: u64, config: &PointCountConfig) -> Result<bool> {
    if p < 5 {
        return Err(Error::invalid(format!("p must be at least 5, got {p}")));
    }
    if reduction_type(curve, p)?.reduction == Reduction::Bad {
        return Err(Error::invalid(format!("bad reduction at p = {p}")));
    }
    Ok(is_ordinary_trace(trace_of_frobenius(curve, p, config)?, p))
}
