//! Frobenius classes of the residual representation and membership in the
//! admissible prime sets `Pi_g` and `Omega_g`.
//!
//! With weight 2 and trivial character, `det rhobar(fr_ell) = ell` and
//! `trace rhobar(fr_ell) = a_ell mod p`. When `ell ≢ ±1 mod p` the eigenvalues
//! `{ell, 1}` (or `{-ell, -1}`) are distinct, so trace and determinant pin
//! down the conjugacy class of `diag(ell, 1)` (resp. `diag(-ell, -1)`).
//!
//! `Omega_g` carries no mod-`p^2` condition: at such primes `d_ell = 0`, so
//! `sigma_ell` vanishes whatever `s_ell` is.

use rayon::prelude::*;
use serde::Serialize;

use crate::arith::factor::is_prime;
use crate::arith::modular::{add_mod, mul_mod, pow_mod_unchecked, reduce, sub_mod};
use crate::arith::sieve::PrimeRange;
use crate::curves::{self, CurveModel, PointCountConfig};
use crate::error::{Error, Result};
use crate::forms::FormContext;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Verdict {
    PiMember,
    OmegaMember,
    Neither,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::PiMember => "PiMember",
            Verdict::OmegaMember => "OmegaMember",
            Verdict::Neither => "Neither",
        }
    }
}

/// One evaluated condition. Each tag names the outcome, passed or failed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Reason {
    /// `ell ∤ N_g p`.
    Coprime,
    EllCongruentToOne,
    EllCongruentToMinusOne,
    EllNotPlusMinusOne,
    /// `a_ell ≡ 1 + ell`.
    TraceMatchesPi,
    /// `a_ell ≡ -(1 + ell)`.
    TraceMatchesOmega,
    TraceMatchesNeither,
    /// `ell^(p-1) ≢ 1 mod p^2`.
    NotWieferich,
    /// `ell^(p-1) ≡ 1 mod p^2`, which rules out `Pi_g`.
    WieferichFailure,
}

impl Reason {
    pub fn describe(self) -> &'static str {
        match self {
            Reason::Coprime => "ell coprime to N_g p",
            Reason::EllCongruentToOne => "ell ≡ 1 mod p",
            Reason::EllCongruentToMinusOne => "ell ≡ -1 mod p",
            Reason::EllNotPlusMinusOne => "ell ≢ ±1 mod p",
            Reason::TraceMatchesPi => "trace ≡ 1 + ell",
            Reason::TraceMatchesOmega => "trace ≡ -(1 + ell)",
            Reason::TraceMatchesNeither => "trace ≢ ±(1 + ell)",
            Reason::NotWieferich => "ell^(p-1) ≢ 1 mod p^2",
            Reason::WieferichFailure => "ell^(p-1) ≡ 1 mod p^2",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FrobeniusClass {
    pub p: u64,
    pub ell: u64,
    pub trace_mod_p: u64,
    pub det_mod_p: u64,
    pub verdict: Verdict,
    pub reasons: Vec<Reason>,
}

/// An entry of a classified prime range. Primes dividing `N_g p` are skipped,
/// not classified, and never enter density counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClassifiedPrime {
    Classified(FrobeniusClass),
    Skipped { ell: u64 },
}

impl ClassifiedPrime {
    pub fn ell(&self) -> u64 {
        match self {
            ClassifiedPrime::Classified(c) => c.ell,
            ClassifiedPrime::Skipped { ell } => *ell,
        }
    }

    pub fn class(&self) -> Option<&FrobeniusClass> {
        match self {
            ClassifiedPrime::Classified(c) => Some(c),
            ClassifiedPrime::Skipped { .. } => None,
        }
    }

    pub fn verdict(&self) -> Option<Verdict> {
        self.class().map(|c| c.verdict)
    }

    /// The `verdict` column of the classification CSV.
    pub fn label(&self) -> &'static str {
        self.verdict().map_or("Skipped", Verdict::as_str)
    }
}

/// `ell^(p-1) ≡ 1 mod p^2`.
pub fn is_wieferich_type(ell: u64, p: u64) -> bool {
    let p2 = p * p;
    pow_mod_unchecked(ell % p2, p - 1, p2) == 1
}

/// Classification from `(p, N_g, ell, a_ell)` alone.
pub fn classify(p: u64, level: u64, ell: u64, a_ell: i64) -> Result<FrobeniusClass> {
    if p < 5 || !is_prime(p) {
        return Err(Error::invalid(format!(
            "p = {p} must be a prime at least 5"
        )));
    }
    if !is_prime(ell) {
        return Err(Error::invalid(format!("{ell} is not prime")));
    }
    if ell == p || level.is_multiple_of(ell) {
        return Err(Error::invalid(format!(
            "classification undefined at ell = {ell}, which divides N_g p = {level} * {p}"
        )));
    }
    let l = ell % p;
    let t = reduce(a_ell, p);
    let one_plus_l = add_mod(1, l, p);
    let mut reasons = vec![Reason::Coprime];

    let residue_ok = if l == 1 {
        reasons.push(Reason::EllCongruentToOne);
        false
    } else if l == p - 1 {
        reasons.push(Reason::EllCongruentToMinusOne);
        false
    } else {
        reasons.push(Reason::EllNotPlusMinusOne);
        true
    };

    let pi_trace = t == one_plus_l;
    let omega_trace = t == sub_mod(0, one_plus_l, p);
    reasons.push(match (pi_trace, omega_trace) {
        (true, _) => Reason::TraceMatchesPi,
        (false, true) => Reason::TraceMatchesOmega,
        (false, false) => Reason::TraceMatchesNeither,
    });

    let mut verdict = Verdict::Neither;
    if pi_trace {
        let wieferich = is_wieferich_type(ell, p);
        reasons.push(if wieferich {
            Reason::WieferichFailure
        } else {
            Reason::NotWieferich
        });
        if residue_ok && !wieferich {
            verdict = Verdict::PiMember;
        }
    } else if omega_trace && residue_ok {
        verdict = Verdict::OmegaMember;
    }

    let class = FrobeniusClass {
        p,
        ell,
        trace_mod_p: t,
        det_mod_p: l,
        verdict,
        reasons,
    };
    check_semisimple_split(&class)?;
    Ok(class)
}

/// On a positive verdict, `X^2 - tX + d` must split with the distinct roots
/// `{ell, 1}` or `{-ell, -1}`.
fn check_semisimple_split(class: &FrobeniusClass) -> Result<()> {
    let p = class.p;
    let roots = match class.verdict {
        Verdict::Neither => return Ok(()),
        Verdict::PiMember => [class.ell % p, 1],
        Verdict::OmegaMember => [p - class.ell % p, p - 1],
    };
    let char_poly = |x: u64| {
        let x2 = mul_mod(x, x, p);
        add_mod(
            sub_mod(x2, mul_mod(class.trace_mod_p, x, p), p),
            class.det_mod_p,
            p,
        )
    };
    let product = mul_mod(roots[0], roots[1], p);
    if roots[0] == roots[1]
        || char_poly(roots[0]) != 0
        || char_poly(roots[1]) != 0
        || product != class.det_mod_p
    {
        return Err(Error::Internal(format!(
            "characteristic polynomial at ell = {} does not split as {{{}, {}}} mod {p}",
            class.ell, roots[0], roots[1]
        )));
    }
    Ok(())
}

pub fn classify_prime(ctx: &FormContext, ell: u64) -> Result<FrobeniusClass> {
    if ctx.is_excluded(ell) {
        return Err(Error::invalid(format!(
            "classification undefined at ell = {ell}, which divides N_g p = {} * {}",
            ctx.level(),
            ctx.p()
        )));
    }
    classify(ctx.p(), ctx.level(), ell, ctx.a_ell(ell)?)
}

fn classify_or_skip(ctx: &FormContext, ell: u64) -> Result<ClassifiedPrime> {
    if ctx.is_excluded(ell) {
        Ok(ClassifiedPrime::Skipped { ell })
    } else {
        classify_prime(ctx, ell).map(ClassifiedPrime::Classified)
    }
}

/// Classifies every prime of `range` in parallel; the output is in ascending
/// order and does not depend on the thread count.
pub fn classify_range(ctx: &FormContext, range: PrimeRange) -> Result<Vec<ClassifiedPrime>> {
    let primes = range.primes()?;
    classify_primes(ctx, &primes)
}

pub fn classify_primes(ctx: &FormContext, primes: &[u64]) -> Result<Vec<ClassifiedPrime>> {
    primes
        .par_iter()
        .map(|&ell| classify_or_skip(ctx, ell))
        .collect()
}

/// Single-threaded counterpart of [`classify_range`].
pub fn classify_range_sequential(
    ctx: &FormContext,
    range: PrimeRange,
) -> Result<Vec<ClassifiedPrime>> {
    range
        .primes()?
        .into_iter()
        .map(|ell| classify_or_skip(ctx, ell))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CheckStatus {
    Pass,
    Fail,
    /// Not mechanically checkable; must be attested in the configuration.
    AssertedOnly,
    /// Skipped because an earlier check failed.
    NotEvaluated,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ScreenCheck {
    pub name: &'static str,
    pub status: CheckStatus,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ScreenReport {
    pub p: u64,
    pub conductor: u64,
    pub a_p: Option<i64>,
    /// All mechanical checks pass. The asserted items are never counted here.
    pub mechanically_eligible: bool,
    pub checks: Vec<ScreenCheck>,
}

/// Screens `p` as a candidate prime for `g = E`. Always returns a report.
pub fn screen_p(curve: &CurveModel, p: u64, counting: &PointCountConfig) -> ScreenReport {
    let n = curve.conductor();
    let mut checks = Vec::new();
    let mut a_p = None;

    let prime = is_prime(p);
    checks.push(ScreenCheck {
        name: "p_prime_at_least_5",
        status: if prime && p >= 5 {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        },
        detail: format!("p = {p}"),
    });
    let coprime = prime && !n.is_multiple_of(p);
    checks.push(ScreenCheck {
        name: "p_coprime_to_level",
        status: match (prime, coprime) {
            (false, _) => CheckStatus::NotEvaluated,
            (true, true) => CheckStatus::Pass,
            (true, false) => CheckStatus::Fail,
        },
        detail: format!("N_g = {n}"),
    });
    let ordinary = if coprime {
        match curves::trace_of_frobenius(curve, p, counting) {
            Ok(a) => {
                a_p = Some(a);
                let ok = curves::is_ordinary_trace(a, p);
                checks.push(ScreenCheck {
                    name: "ordinary_at_p",
                    status: if ok {
                        CheckStatus::Pass
                    } else {
                        CheckStatus::Fail
                    },
                    detail: format!("a_p = {a}"),
                });
                ok
            }
            Err(e) => {
                checks.push(ScreenCheck {
                    name: "ordinary_at_p",
                    status: CheckStatus::Fail,
                    detail: format!("a_p unavailable: {e}"),
                });
                false
            }
        }
    } else {
        checks.push(ScreenCheck {
            name: "ordinary_at_p",
            status: CheckStatus::NotEvaluated,
            detail: "needs good reduction at p".into(),
        });
        false
    };
    checks.push(ScreenCheck {
        name: "residual_image_surjective",
        status: CheckStatus::AssertedOnly,
        detail: "image of rhobar equal to GL2(F_p); attest with surjective_mod_p".into(),
    });
    checks.push(ScreenCheck {
        name: "mu_and_lambda_vanish",
        status: CheckStatus::AssertedOnly,
        detail: "mu_p(g) = lambda_p(g) = 0; attest with mu_zero and lambda_g".into(),
    });
    ScreenReport {
        p,
        conductor: n,
        a_p,
        mechanically_eligible: prime && p >= 5 && coprime && ordinary,
        checks,
    }
}
