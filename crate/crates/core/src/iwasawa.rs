//! Local invariants `s_ell`, `d_ell`, `sigma_ell = s_ell d_ell`, the
//! Greenberg-Vatsal transfer of `lambda`, and Bloch-Kato rank bounds.

use std::collections::BTreeMap;

use serde::{Serialize, Serializer};

use crate::arith::modular::{add_mod, inv_mod, mul_mod, pow_mod_unchecked, reduce, sub_mod};
use crate::error::{Error, PrimeKind, Result};
use crate::forms::FormContext;
use crate::residual::{FrobeniusClass, Verdict};

pub const DEFAULT_S_ELL_CAP: u32 = 20;

/// `s_ell = p^m` with `m` maximal such that `ell^(p-1) ≡ 1 mod p^(m+1)`.
///
/// Errors once `m` would exceed `cap`, or when `p^(m+2)` leaves `u64`.
pub fn compute_s_ell(p: u64, ell: u64, cap: u32) -> Result<u64> {
    if ell == p {
        return Err(Error::invalid(format!(
            "s_ell is undefined at ell = p = {p}"
        )));
    }
    if p < 2 || ell.is_multiple_of(p) {
        return Err(Error::invalid(format!(
            "ell = {ell} must be a unit mod p = {p}"
        )));
    }
    let mut m = 0u32;
    loop {
        let modulus = p.checked_pow(m + 2).ok_or_else(|| {
            Error::Overflow(format!(
                "p^{} for p = {p} while computing s_ell at ell = {ell}",
                m + 2
            ))
        })?;
        if pow_mod_unchecked(ell % modulus, p - 1, modulus) != 1 {
            break;
        }
        m += 1;
        if m > cap {
            return Err(Error::Overflow(format!(
                "s_ell at ell = {ell}, p = {p} exceeds p^{cap}"
            )));
        }
    }
    Ok(p.pow(m))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum EulerFactorSource {
    FromFrobenius,
    /// `f` ramified at a prime of the added level: the inertia coinvariants
    /// are a line on which `fr_ell` acts by `+1` (Pi) or `-1` (Omega).
    RamifiedTrivialQuotient,
    UserSupplied,
}

/// `P~_ell(X) = c0 + c1 X + c2 X^2` over `F_p`, with `c0 = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct EulerFactor {
    pub p: u64,
    pub coeffs: [u64; 3],
    pub source: EulerFactorSource,
}

impl EulerFactor {
    pub fn user_supplied(p: u64, coeffs: [i64; 3]) -> Result<Self> {
        if p < 2 {
            return Err(Error::invalid(format!("modulus {p} is too small")));
        }
        let coeffs = coeffs.map(|c| reduce(c, p));
        if coeffs[0] != 1 {
            return Err(Error::invalid(format!(
                "Euler factor constant term must be 1 mod {p}, got {}",
                coeffs[0]
            )));
        }
        Ok(EulerFactor {
            p,
            coeffs,
            source: EulerFactorSource::UserSupplied,
        })
    }

    /// `1 - X` for a Pi prime, `1 + X` for an Omega prime.
    pub fn ramified_trivial_quotient(p: u64, kind: PrimeKind) -> Self {
        let c1 = match kind {
            PrimeKind::Pi => p - 1,
            PrimeKind::Omega => 1,
        };
        EulerFactor {
            p,
            coeffs: [1, c1, 0],
            source: EulerFactorSource::RamifiedTrivialQuotient,
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|&c| c != 0).unwrap_or(0)
    }

    pub fn eval(&self, x: u64) -> u64 {
        let p = self.p;
        let [c0, c1, c2] = self.coeffs;
        add_mod(c0, mul_mod(x, add_mod(c1, mul_mod(c2, x, p), p), p), p)
    }
}

/// `P~_ell(X) = 1 - trace X + det X^2` for an unramified prime.
pub fn euler_factor_from_frobenius(class: &FrobeniusClass) -> EulerFactor {
    let p = class.p;
    EulerFactor {
        p,
        coeffs: [1, sub_mod(0, class.trace_mod_p, p), class.det_mod_p],
        source: EulerFactorSource::FromFrobenius,
    }
}

/// Multiplicity of `ell^(-1)` as a root of the factor over `F_p`.
pub fn compute_d_ell(factor: &EulerFactor, ell: u64, p: u64) -> Result<u32> {
    if factor.p != p {
        return Err(Error::invalid(format!(
            "Euler factor is over F_{} but p = {p}",
            factor.p
        )));
    }
    let root = inv_mod(ell % p, p)
        .ok_or_else(|| Error::invalid(format!("ell = {ell} is not invertible mod {p}")))?;
    // Synthetic division by (X - root), highest coefficient first.
    let mut poly: Vec<u64> = factor.coeffs[..=factor.degree()].to_vec();
    let mut d = 0;
    while poly.len() > 1 {
        let mut quotient = Vec::with_capacity(poly.len() - 1);
        let mut acc = 0;
        for &c in poly.iter().rev() {
            acc = add_mod(mul_mod(acc, root, p), c, p);
            quotient.push(acc);
        }
        let remainder = quotient.pop().expect("non-empty");
        if remainder != 0 {
            break;
        }
        quotient.reverse();
        poly = quotient;
        d += 1;
    }
    Ok(d)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SigmaDatum {
    pub ell: u64,
    #[serde(rename = "s")]
    pub s_ell: u64,
    #[serde(rename = "d")]
    pub d_ell: u32,
    pub sigma: u64,
}

pub fn sigma_ell(p: u64, ell: u64, factor: &EulerFactor, s_cap: u32) -> Result<SigmaDatum> {
    let s_ell = compute_s_ell(p, ell, s_cap)?;
    let d_ell = compute_d_ell(factor, ell, p)?;
    let sigma = s_ell
        .checked_mul(d_ell as u64)
        .ok_or_else(|| Error::Overflow(format!("sigma at ell = {ell}")))?;
    Ok(SigmaDatum {
        ell,
        s_ell,
        d_ell,
        sigma,
    })
}

/// `sigma_ell(g)` at an unramified prime, from its Frobenius class.
pub fn sigma_of_g(class: &FrobeniusClass, s_cap: u32) -> Result<SigmaDatum> {
    sigma_ell(
        class.p,
        class.ell,
        &euler_factor_from_frobenius(class),
        s_cap,
    )
}

/// `sigma_ell(f)` for `f` ramified at an added prime `ell` of the given kind.
pub fn sigma_of_f_at_added_prime(class: &FrobeniusClass, s_cap: u32) -> Result<SigmaDatum> {
    let kind = match class.verdict {
        Verdict::PiMember => PrimeKind::Pi,
        Verdict::OmegaMember => PrimeKind::Omega,
        Verdict::Neither => {
            return Err(Error::MissingData(format!(
                "no Euler factor for f at ell = {}, which lies in neither Pi_g nor Omega_g",
                class.ell
            )))
        }
    };
    let factor = EulerFactor::ramified_trivial_quotient(class.p, kind);
    sigma_ell(class.p, class.ell, &factor, s_cap)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LambdaPrediction {
    pub lambda_f: u32,
    pub mu_f: u32,
}

fn keyed(list: &[SigmaDatum], which: &str) -> Result<BTreeMap<u64, u64>> {
    let mut out = BTreeMap::new();
    for s in list {
        if s.ell < 2 {
            return Err(Error::invalid(format!(
                "{} is not a prime in sigma list for {which}",
                s.ell
            )));
        }
        if out.insert(s.ell, s.sigma).is_some() {
            return Err(Error::invalid(format!(
                "duplicate prime {} in sigma list for {which}",
                s.ell
            )));
        }
    }
    Ok(out)
}

/// `lambda_p(f) = lambda_p(g) + sum over ell | N_f of (sigma_ell(g) - sigma_ell(f))`.
///
/// Terms at `ell | N_g` vanish identically and may be left out of both lists.
/// The remaining primes must be the same in both lists.
pub fn transfer_lambda(
    lambda_g: u32,
    mu_zero: bool,
    base_level: u64,
    sigma_g: &[SigmaDatum],
    sigma_f: &[SigmaDatum],
) -> Result<LambdaPrediction> {
    if !mu_zero {
        return Err(Error::HypothesisViolation(
            "lambda transfer needs mu_p(g) = 0, but mu_zero is false".into(),
        ));
    }
    let g = keyed(sigma_g, "g")?;
    let f = keyed(sigma_f, "f")?;
    let new_g: Vec<_> = g
        .keys()
        .filter(|&&l| !base_level.is_multiple_of(l))
        .collect();
    let new_f: Vec<_> = f
        .keys()
        .filter(|&&l| !base_level.is_multiple_of(l))
        .collect();
    if new_g != new_f {
        return Err(Error::invalid(format!(
            "sigma lists cover different primes outside N_g: {new_g:?} vs {new_f:?}"
        )));
    }
    let mut lambda = lambda_g as i128;
    for ell in new_g {
        lambda += g[ell] as i128 - f[ell] as i128;
    }
    let lambda_f = u32::try_from(lambda).map_err(|_| {
        Error::Internal(format!(
            "transfer produced lambda_p(f) = {lambda} outside u32"
        ))
    })?;
    Ok(LambdaPrediction { lambda_f, mu_f: 0 })
}

pub fn lambda_transfer(
    ctx: &FormContext,
    sigma_g: &[SigmaDatum],
    sigma_f: &[SigmaDatum],
) -> Result<LambdaPrediction> {
    transfer_lambda(ctx.lambda_g(), ctx.mu_zero(), ctx.level(), sigma_g, sigma_f)
}

/// What `lambda` says about the Bloch-Kato corank.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BkRank {
    Exact(u32),
    /// `{lambda, lambda - 2, ...}` down to 0 or 1, ascending.
    Candidates(Vec<u32>),
}

impl Serialize for BkRank {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = serializer.serialize_map(Some(1))?;
        match self {
            BkRank::Exact(r) => map.serialize_entry("exact", r)?,
            BkRank::Candidates(c) => map.serialize_entry("candidates", c)?,
        }
        map.end()
    }
}

pub fn bk_rank_bounds(lambda_f: u32) -> BkRank {
    if lambda_f <= 1 {
        BkRank::Exact(lambda_f)
    } else {
        BkRank::Candidates((lambda_f % 2..=lambda_f).step_by(2).collect())
    }
}
