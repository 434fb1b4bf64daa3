//! Level sets `Sigma` of Pi and Omega primes, the raised level
//! `N_f = N_g N_Sigma`, Carayol admissibility, and target-lambda planning.

use itertools::Itertools;
use serde::Serialize;

use crate::arith::factor::{factorize_bounded, gcd, is_prime};
use crate::arith::modular::{add_mod, mul_mod, reduce};
use crate::arith::sieve::PrimeRange;
use crate::density::exact_densities;
use crate::error::{Error, PrimeKind, Result};
use crate::forms::FormContext;
use crate::iwasawa::{
    bk_rank_bounds, sigma_of_f_at_added_prime, sigma_of_g, transfer_lambda, BkRank, SigmaDatum,
};
use crate::residual::{classify_range, ClassifiedPrime, FrobeniusClass, Verdict};

pub const DEFAULT_FACTOR_BOUND: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Existence {
    /// `n = r = 0`: the set describes `g` itself.
    Identity,
    /// A newform at level `N_f` exists by Diamond-Taylor level raising.
    /// Taken on trust, never verified.
    DiamondTaylorAsserted,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LevelSet {
    pub pi_primes: Vec<u64>,
    pub omega_primes: Vec<u64>,
    #[serde(rename = "N_sigma")]
    pub n_sigma: u64,
    #[serde(rename = "N_f")]
    pub n_f: u64,
    pub predicted_lambda: u32,
    pub predicted_mu: u32,
    pub bk_rank: BkRank,
    pub existence: Existence,
    pub sigma_g: Vec<SigmaDatum>,
    pub sigma_f: Vec<SigmaDatum>,
}

impl LevelSet {
    pub fn identity(ctx: &FormContext) -> Self {
        let lambda = ctx.lambda_g();
        LevelSet {
            pi_primes: Vec::new(),
            omega_primes: Vec::new(),
            n_sigma: 1,
            n_f: ctx.level(),
            predicted_lambda: lambda,
            predicted_mu: 0,
            bk_rank: bk_rank_bounds(lambda),
            existence: Existence::Identity,
            sigma_g: Vec::new(),
            sigma_f: Vec::new(),
        }
    }

    /// Builds `Sigma = Q ∪ Q'` and predicts `lambda_p(f)` through the generic
    /// sigma pipeline and the transfer formula.
    pub fn from_classes(
        ctx: &FormContext,
        pis: &[&FrobeniusClass],
        omegas: &[&FrobeniusClass],
        s_cap: u32,
    ) -> Result<Self> {
        if pis.is_empty() && omegas.is_empty() {
            return Ok(LevelSet::identity(ctx));
        }
        if !ctx.mu_zero() {
            return Err(Error::HypothesisViolation(
                "level sets predict lambda only when mu_p(g) = 0, but mu_zero is false".into(),
            ));
        }
        let p = ctx.p();
        for (list, want) in [(pis, Verdict::PiMember), (omegas, Verdict::OmegaMember)] {
            for c in list {
                if c.verdict != want || c.p != p {
                    return Err(Error::invalid(format!(
                        "ell = {} is {:?} for p = {}, expected {want:?} for p = {p}",
                        c.ell, c.verdict, c.p
                    )));
                }
                if ctx.is_excluded(c.ell) {
                    return Err(Error::invalid(format!("ell = {} divides N_g p", c.ell)));
                }
                if !satisfies_case_one(p, c.ell, c.trace_mod_p, c.det_mod_p) {
                    return Err(Error::Internal(format!(
                        "ell = {} fails Carayol case (1) despite verdict {:?}",
                        c.ell, c.verdict
                    )));
                }
            }
        }
        let mut pi_primes: Vec<u64> = pis.iter().map(|c| c.ell).collect();
        let mut omega_primes: Vec<u64> = omegas.iter().map(|c| c.ell).collect();
        pi_primes.sort_unstable();
        omega_primes.sort_unstable();
        let mut all: Vec<u64> = pi_primes.iter().chain(&omega_primes).copied().collect();
        all.sort_unstable();
        if all.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid(format!(
                "repeated prime in level set {all:?}"
            )));
        }

        let mut n_sigma = 1u64;
        for &ell in &all {
            n_sigma = n_sigma
                .checked_mul(ell)
                .filter(|&n| n < 1 << 63)
                .ok_or_else(|| Error::Overflow(format!("N_Sigma over 2^63 with primes {all:?}")))?;
        }
        let n_f = ctx
            .level()
            .checked_mul(n_sigma)
            .filter(|&n| n < 1 << 63)
            .ok_or_else(|| {
                Error::Overflow(format!("N_f = {} * {n_sigma} over 2^63", ctx.level()))
            })?;

        let classes = pis.iter().chain(omegas);
        let sigma_g: Vec<SigmaDatum> = classes
            .clone()
            .map(|c| sigma_of_g(c, s_cap))
            .try_collect()?;
        let sigma_f: Vec<SigmaDatum> = classes
            .map(|c| sigma_of_f_at_added_prime(c, s_cap))
            .try_collect()?;
        let prediction = transfer_lambda(
            ctx.lambda_g(),
            ctx.mu_zero(),
            ctx.level(),
            &sigma_g,
            &sigma_f,
        )?;
        let expected = ctx.lambda_g() + pis.len() as u32;
        if prediction.lambda_f != expected {
            return Err(Error::Internal(format!(
                "transfer gave lambda = {} but lambda_g + n = {expected}",
                prediction.lambda_f
            )));
        }
        let mut sigma_g = sigma_g;
        let mut sigma_f = sigma_f;
        sigma_g.sort_by_key(|s| s.ell);
        sigma_f.sort_by_key(|s| s.ell);
        Ok(LevelSet {
            pi_primes,
            omega_primes,
            n_sigma,
            n_f,
            predicted_lambda: prediction.lambda_f,
            predicted_mu: prediction.mu_f,
            bk_rank: bk_rank_bounds(prediction.lambda_f),
            existence: Existence::DiamondTaylorAsserted,
            sigma_g,
            sigma_f,
        })
    }

    pub fn n(&self) -> usize {
        self.pi_primes.len()
    }

    pub fn r(&self) -> usize {
        self.omega_primes.len()
    }
}

/// `ell t^2 ≡ (1 + ell)^2 det mod p`.
pub fn satisfies_case_one(p: u64, ell: u64, trace: u64, det: u64) -> bool {
    let l = ell % p;
    let one_plus = add_mod(1, l, p);
    mul_mod(l, mul_mod(trace, trace, p), p) == mul_mod(mul_mod(one_plus, one_plus, p), det, p)
}

fn expected_rate(p: u64, kind: PrimeKind) -> String {
    let (pi, omega) = exact_densities(p).expect("p >= 5 in a form context");
    match kind {
        PrimeKind::Pi => format!("(p-3)/(p(p-1)) = {pi}"),
        PrimeKind::Omega => format!("(p-3)/(p-1)^2 = {omega}"),
    }
}

fn split_by_kind(classified: &[ClassifiedPrime]) -> (Vec<&FrobeniusClass>, Vec<&FrobeniusClass>) {
    let mut pis = Vec::new();
    let mut omegas = Vec::new();
    for c in classified.iter().filter_map(ClassifiedPrime::class) {
        match c.verdict {
            Verdict::PiMember => pis.push(c),
            Verdict::OmegaMember => omegas.push(c),
            Verdict::Neither => {}
        }
    }
    (pis, omegas)
}

fn scarcity(
    ctx: &FormContext,
    kind: PrimeKind,
    needed: usize,
    found: usize,
    scanned_to: u64,
) -> Error {
    Error::Scarcity {
        kind,
        needed,
        found,
        scanned_to,
        expected_rate: expected_rate(ctx.p(), kind),
    }
}

/// The `limit` lexicographically smallest `(Q, Q')` with `|Q| = n` Pi primes
/// and `|Q'| = r` Omega primes drawn from `classified`, `Q` varying slowest.
pub fn enumerate_level_sets(
    ctx: &FormContext,
    classified: &[ClassifiedPrime],
    n: usize,
    r: usize,
    limit: usize,
    s_cap: u32,
) -> Result<Vec<LevelSet>> {
    if n == 0 && r == 0 {
        return Ok(vec![LevelSet::identity(ctx)]);
    }
    let (mut pis, mut omegas) = split_by_kind(classified);
    pis.sort_by_key(|c| c.ell);
    omegas.sort_by_key(|c| c.ell);
    let scanned_to = classified
        .iter()
        .map(ClassifiedPrime::ell)
        .max()
        .unwrap_or(0);
    if pis.len() < n {
        return Err(scarcity(ctx, PrimeKind::Pi, n, pis.len(), scanned_to));
    }
    if omegas.len() < r {
        return Err(scarcity(ctx, PrimeKind::Omega, r, omegas.len(), scanned_to));
    }
    let mut out = Vec::new();
    'outer: for q in pis.iter().copied().combinations(n) {
        for q_prime in omegas.iter().copied().combinations(r) {
            if out.len() >= limit {
                break 'outer;
            }
            out.push(LevelSet::from_classes(ctx, &q, &q_prime, s_cap)?);
        }
    }
    Ok(out)
}

/// Chooses the `n = target - lambda_g` smallest Pi primes and the `r` smallest
/// Omega primes up to `scan_bound`.
pub fn plan_target_lambda(
    ctx: &FormContext,
    target: u32,
    r: usize,
    scan_bound: u64,
    s_cap: u32,
) -> Result<LevelSet> {
    let lambda_g = ctx.lambda_g();
    if target < lambda_g {
        return Err(Error::invalid(format!(
            "target lambda {target} is below lambda_g = {lambda_g}"
        )));
    }
    let n = (target - lambda_g) as usize;
    if n == 0 && r == 0 {
        return Err(Error::invalid(
            "max(n, r) > 0 is required: raise the target lambda or ask for Omega primes",
        ));
    }
    if !ctx.mu_zero() {
        return Err(Error::HypothesisViolation(
            "planning predicts lambda only when mu_p(g) = 0, but mu_zero is false".into(),
        ));
    }
    if scan_bound < 2 {
        return Err(Error::invalid(format!(
            "scan bound {scan_bound} is below 2"
        )));
    }

    let mut pis: Vec<FrobeniusClass> = Vec::new();
    let mut omegas: Vec<FrobeniusClass> = Vec::new();
    let mut lo = 2u64;
    let mut width = 4096u64;
    while (pis.len() < n || omegas.len() < r) && lo <= scan_bound {
        let hi = lo.saturating_add(width - 1).min(scan_bound);
        let chunk = if hi > lo {
            classify_range(ctx, PrimeRange::new(lo, hi)?)?
        } else if is_prime(lo) && !ctx.is_excluded(lo) {
            vec![ClassifiedPrime::Classified(
                crate::residual::classify_prime(ctx, lo)?,
            )]
        } else {
            Vec::new()
        };
        for c in chunk.into_iter().filter_map(|c| match c {
            ClassifiedPrime::Classified(c) => Some(c),
            ClassifiedPrime::Skipped { .. } => None,
        }) {
            match c.verdict {
                Verdict::PiMember if pis.len() < n => pis.push(c),
                Verdict::OmegaMember if omegas.len() < r => omegas.push(c),
                _ => {}
            }
        }
        lo = hi + 1;
        width = width.saturating_mul(2);
    }
    if pis.len() < n {
        return Err(scarcity(ctx, PrimeKind::Pi, n, pis.len(), scan_bound));
    }
    if omegas.len() < r {
        return Err(scarcity(ctx, PrimeKind::Omega, r, omegas.len(), scan_bound));
    }
    let pis: Vec<&FrobeniusClass> = pis.iter().collect();
    let omegas: Vec<&FrobeniusClass> = omegas.iter().collect();
    LevelSet::from_classes(ctx, &pis, &omegas, s_cap)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum CarayolCase {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2a")]
    TwoA,
    #[serde(rename = "2b")]
    TwoB,
    #[serde(rename = "3a")]
    ThreeA,
    /// `ell || N_g` and `alpha = 1`.
    #[serde(rename = "3b")]
    ThreeB,
    /// `ell ∤ N_g` and `alpha = 1`; overlaps the setting of case (1).
    #[serde(rename = "3b-unramified")]
    ThreeBUnramified,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Admissibility {
    Admissible,
    Inadmissible,
    /// No case holds among those that could be evaluated, and some case
    /// needs a coefficient the backend cannot supply.
    Unknown,
}

/// The raw data one extra prime of a proposed level is judged on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CarayolInput {
    pub p: u64,
    pub ell: u64,
    /// Exponent of `ell` in `level / N_g`.
    pub alpha: u32,
    /// Exponent of `ell` in `N_g`.
    pub base_exponent: u32,
    /// `a_ell mod p` when `ell ∤ N_g` and the backend supplies it.
    pub trace_mod_p: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CarayolPrimeReport {
    pub ell: u64,
    pub alpha: u32,
    pub base_exponent: u32,
    pub trace_mod_p: Option<u64>,
    pub satisfied_cases: Vec<CarayolCase>,
    pub status: Admissibility,
    /// Set when the second branch of case (3)(b) is among the satisfied
    /// cases; that branch overlaps the hypotheses of case (1).
    pub overlap_ambiguity: bool,
}

/// Evaluates every case for one extra prime. `det` is `ell mod p`; it is
/// unramified at every `ell ≠ p`.
pub fn evaluate_carayol_prime(input: CarayolInput) -> CarayolPrimeReport {
    let CarayolInput {
        p,
        ell,
        alpha,
        base_exponent,
        trace_mod_p,
    } = input;
    let l = ell % p;
    let unramified = base_exponent == 0;
    let exactly_once = base_exponent == 1;
    let mut cases = Vec::new();
    let mut needs_trace = false;

    if unramified && alpha == 1 {
        match trace_mod_p {
            Some(t) if satisfies_case_one(p, ell, t, l) => cases.push(CarayolCase::One),
            Some(_) => {}
            None => needs_trace = true,
        }
    }
    if l == p - 1 {
        if unramified && alpha == 2 {
            match trace_mod_p {
                Some(0) => cases.push(CarayolCase::TwoA),
                Some(_) => {}
                None => needs_trace = true,
            }
        }
        if exactly_once && alpha == 1 {
            cases.push(CarayolCase::TwoB);
        }
    }
    if l == 1 {
        if unramified && alpha == 2 {
            cases.push(CarayolCase::ThreeA);
        }
        if exactly_once && alpha == 1 {
            cases.push(CarayolCase::ThreeB);
        }
        if unramified && alpha == 1 {
            cases.push(CarayolCase::ThreeBUnramified);
        }
    }
    let status = if !cases.is_empty() {
        Admissibility::Admissible
    } else if needs_trace {
        Admissibility::Unknown
    } else {
        Admissibility::Inadmissible
    };
    CarayolPrimeReport {
        ell,
        alpha,
        base_exponent,
        trace_mod_p,
        overlap_ambiguity: cases.contains(&CarayolCase::ThreeBUnramified),
        satisfied_cases: cases,
        status,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CarayolReport {
    pub level: u64,
    pub base_level: u64,
    pub p: u64,
    pub primes: Vec<CarayolPrimeReport>,
    pub status: Admissibility,
}

fn valuation(mut n: u64, q: u64) -> u32 {
    let mut v = 0;
    while n.is_multiple_of(q) {
        n /= q;
        v += 1;
    }
    v
}

pub fn carayol_check(ctx: &FormContext, level: u64, factor_bound: u64) -> Result<CarayolReport> {
    let p = ctx.p();
    let base = ctx.level();
    if level == 0 {
        return Err(Error::invalid("proposed level must be positive"));
    }
    if gcd(level, p) != 1 {
        return Err(Error::invalid(format!(
            "proposed level {level} is divisible by p = {p}"
        )));
    }
    if !level.is_multiple_of(base) {
        return Err(Error::NotMultipleOfLevel {
            level,
            base_level: base,
        });
    }
    let extra = factorize_bounded(level / base, factor_bound)?;
    let mut primes = Vec::with_capacity(extra.len());
    for (ell, alpha) in extra {
        let base_exponent = valuation(base, ell);
        let trace_mod_p = if base_exponent == 0 {
            match ctx.a_ell(ell) {
                Ok(a) => Some(reduce(a, p)),
                Err(Error::Coverage { .. }) => None,
                Err(e) => return Err(e),
            }
        } else {
            None
        };
        primes.push(evaluate_carayol_prime(CarayolInput {
            p,
            ell,
            alpha,
            base_exponent,
            trace_mod_p,
        }));
    }
    let status = if primes
        .iter()
        .any(|r| r.status == Admissibility::Inadmissible)
    {
        Admissibility::Inadmissible
    } else if primes.iter().any(|r| r.status == Admissibility::Unknown) {
        Admissibility::Unknown
    } else {
        Admissibility::Admissible
    };
    Ok(CarayolReport {
        level,
        base_level: base,
        p,
        primes,
        status,
    })
}
