//! The densities `(p-3)/(p(p-1))` of `Pi_g` and `(p-3)/(p-1)^2` of `Omega_g`:
//! exact values, a brute-force count over `GL2(F_p)`, and empirical
//! Chebotarev frequencies over a prime range.

use num_rational::Ratio;
use serde::{Serialize, Serializer};

use crate::arith::factor::is_prime;
use crate::arith::modular::{add_mod, mul_mod, sub_mod};
use crate::arith::sieve::PrimeRange;
use crate::error::{Error, PrimeKind, Result};
use crate::forms::FormContext;
use crate::residual::{classify_range, ClassifiedPrime, Verdict};

pub const DEFAULT_SIGMA_BAND: f64 = 3.0;
pub const DEFAULT_MIN_EXPECTED_HITS: f64 = 30.0;

pub const GL2_ENUMERATION_MAX_P: u64 = 13;

fn ratio_string<S: Serializer>(r: &Ratio<u64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(r)
}

fn opt_ratio_string<S: Serializer>(
    r: &Option<Ratio<u64>>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.collect_str(r),
        None => s.serialize_none(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassCountReport {
    pub p: u64,
    pub gl2_order: u64,
    pub torus_order: u64,
    #[serde(rename = "count_Y")]
    pub count_y: u64,
    #[serde(rename = "count_Y_prime")]
    pub count_y_prime: u64,
    #[serde(rename = "ratio_Y", serialize_with = "ratio_string")]
    pub ratio_y: Ratio<u64>,
    #[serde(rename = "ratio_Y_prime", serialize_with = "ratio_string")]
    pub ratio_y_prime: Ratio<u64>,
}

/// Counts, over all of `GL2(F_p)`, the matrices with eigenvalues `{a, 1}`
/// (the set `Y`) and `{a, -1}` (the set `Y'`), `a ∉ {0, ±1}`.
///
/// A matrix has eigenvalue `±1` exactly when `1 ∓ t + det ≡ 0`; the other
/// eigenvalue is then `±det`, and distinct eigenvalues make it semisimple.
pub fn enumerate_gl2_classes(p: u64) -> Result<ClassCountReport> {
    if !is_prime(p) || p < 5 {
        return Err(Error::invalid(format!(
            "p = {p} must be a prime at least 5"
        )));
    }
    if p > GL2_ENUMERATION_MAX_P {
        return Err(Error::ResourceLimit(format!(
            "GL2 enumeration is limited to p <= {GL2_ENUMERATION_MAX_P}, got {p}"
        )));
    }
    let (mut order, mut y, mut y_prime) = (0u64, 0u64, 0u64);
    for a in 0..p {
        for d in 0..p {
            let t = add_mod(a, d, p);
            let ad = mul_mod(a, d, p);
            for b in 0..p {
                for c in 0..p {
                    let det = sub_mod(ad, mul_mod(b, c, p), p);
                    if det == 0 {
                        continue;
                    }
                    order += 1;
                    if det == 1 || det == p - 1 {
                        continue;
                    }
                    if add_mod(sub_mod(1, t, p), det, p) == 0 {
                        y += 1;
                    }
                    if add_mod(add_mod(1, t, p), det, p) == 0 {
                        y_prime += 1;
                    }
                }
            }
        }
    }
    let formula = (p * p - 1) * (p * p - p);
    if order != formula {
        return Err(Error::Internal(format!(
            "enumerated {order} invertible matrices mod {p}, expected {formula}"
        )));
    }
    Ok(ClassCountReport {
        p,
        gl2_order: order,
        torus_order: (p - 1) * (p - 1),
        count_y: y,
        count_y_prime: y_prime,
        ratio_y: Ratio::new(y, order),
        ratio_y_prime: Ratio::new(y_prime, order),
    })
}

/// `((p-3)/(p(p-1)), (p-3)/(p-1)^2)` in lowest terms.
pub fn exact_densities(p: u64) -> Result<(Ratio<u64>, Ratio<u64>)> {
    if !is_prime(p) || p < 5 {
        return Err(Error::invalid(format!(
            "p = {p} must be a prime at least 5"
        )));
    }
    Ok((
        Ratio::new(p - 3, p * (p - 1)),
        Ratio::new(p - 3, (p - 1) * (p - 1)),
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DensityConfig {
    /// Consistent means `|z| <= sigma_band`.
    pub sigma_band: f64,
    pub min_expected_hits: f64,
}

impl Default for DensityConfig {
    fn default() -> Self {
        DensityConfig {
            sigma_band: DEFAULT_SIGMA_BAND,
            min_expected_hits: DEFAULT_MIN_EXPECTED_HITS,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DensityVerdict {
    Consistent,
    Inconsistent,
    /// Fewer expected hits than the configured minimum.
    Underpowered,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityReport {
    pub set_name: PrimeKindName,
    #[serde(serialize_with = "ratio_string")]
    pub exact_density: Ratio<u64>,
    pub sample_primes: u64,
    pub hits: u64,
    #[serde(serialize_with = "opt_ratio_string")]
    pub empirical: Option<Ratio<u64>>,
    pub expected_hits: f64,
    pub standard_error: Option<f64>,
    pub z_score: Option<f64>,
    pub verdict: DensityVerdict,
}

/// `Pi` or `Omega` as it appears in density reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrimeKindName(pub PrimeKind);

impl Serialize for PrimeKindName {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(&self.0)
    }
}

fn to_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

pub fn density_report(
    kind: PrimeKind,
    exact: Ratio<u64>,
    sample_primes: u64,
    hits: u64,
    config: &DensityConfig,
) -> DensityReport {
    let delta = to_f64(exact);
    let n = sample_primes as f64;
    let expected_hits = delta * n;
    let (empirical, standard_error, z_score) = if sample_primes == 0 {
        (None, None, None)
    } else {
        let se = (delta * (1.0 - delta) / n).sqrt();
        let freq = hits as f64 / n;
        (
            Some(Ratio::new(hits, sample_primes)),
            Some(se),
            Some((freq - delta) / se),
        )
    };
    let verdict = match z_score {
        _ if expected_hits < config.min_expected_hits => DensityVerdict::Underpowered,
        Some(z) if z.abs() <= config.sigma_band => DensityVerdict::Consistent,
        _ => DensityVerdict::Inconsistent,
    };
    DensityReport {
        set_name: PrimeKindName(kind),
        exact_density: exact,
        sample_primes,
        hits,
        empirical,
        expected_hits,
        standard_error,
        z_score,
        verdict,
    }
}

/// Pi and Omega frequency reports for an already classified range.
pub fn density_from_classes(
    p: u64,
    classified: &[ClassifiedPrime],
    config: &DensityConfig,
) -> Result<(DensityReport, DensityReport)> {
    let (pi_exact, omega_exact) = exact_densities(p)?;
    let (mut sample, mut pi_hits, mut omega_hits) = (0u64, 0u64, 0u64);
    for verdict in classified.iter().filter_map(ClassifiedPrime::verdict) {
        sample += 1;
        match verdict {
            Verdict::PiMember => pi_hits += 1,
            Verdict::OmegaMember => omega_hits += 1,
            Verdict::Neither => {}
        }
    }
    Ok((
        density_report(PrimeKind::Pi, pi_exact, sample, pi_hits, config),
        density_report(PrimeKind::Omega, omega_exact, sample, omega_hits, config),
    ))
}

fn require_surjective(ctx: &FormContext) -> Result<()> {
    if !ctx.surjective_mod_p() {
        return Err(Error::HypothesisViolation(
            "density comparison needs a surjective residual image, but surjective_mod_p is false"
                .into(),
        ));
    }
    Ok(())
}

/// Classifies `range` and compares the hit frequencies with the exact densities.
pub fn empirical_density(
    ctx: &FormContext,
    range: PrimeRange,
    config: &DensityConfig,
) -> Result<(DensityReport, DensityReport)> {
    require_surjective(ctx)?;
    let classified = classify_range(ctx, range)?;
    density_from_classes(ctx.p(), &classified, config)
}

/// Same as [`empirical_density`], also returning the per-prime classification.
pub fn empirical_density_with_classes(
    ctx: &FormContext,
    range: PrimeRange,
    config: &DensityConfig,
) -> Result<((DensityReport, DensityReport), Vec<ClassifiedPrime>)> {
    require_surjective(ctx)?;
    let classified = classify_range(ctx, range)?;
    let reports = density_from_classes(ctx.p(), &classified, config)?;
    Ok((reports, classified))
}
