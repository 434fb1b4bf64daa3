//! The fixed newform `g`: its level, the prime `p`, the certified Iwasawa
//! inputs, and a source of Fourier coefficients `a_ell`.
//!
//! Coefficients come either from point counts on an elliptic curve or from a
//! CSV table (`ell,a_ell`). The λ-invariant, the vanishing of μ, surjectivity
//! of the mod-p representation and optimality of the level are carried as
//! asserted inputs; none of them is computed here.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;
use std::path::Path;

use crate::arith::factor::is_prime;
use crate::curves::{self, within_hasse_bound, CurveModel, PointCountConfig};
use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CoefficientTable {
    entries: BTreeMap<u64, i64>,
    ramified: BTreeSet<u64>,
}

impl CoefficientTable {
    /// Validates rows as they would be validated from a file; `line` numbers
    /// in errors count rows from 1 after the header.
    pub fn from_rows(level: u64, rows: impl IntoIterator<Item = (u64, i64)>) -> Result<Self> {
        let mut table = CoefficientTable::default();
        for (i, (ell, a)) in rows.into_iter().enumerate() {
            table.insert(level, ell, a, i as u64 + 2)?;
        }
        Ok(table)
    }

    fn insert(&mut self, level: u64, ell: u64, a: i64, line: u64) -> Result<()> {
        if !is_prime(ell) {
            return Err(Error::Parse {
                line,
                message: format!("{ell} is not prime"),
            });
        }
        if let Some((&last, _)) = self.entries.last_key_value() {
            if ell <= last {
                return Err(Error::Parse {
                    line,
                    message: format!("ell must be strictly increasing ({ell} after {last})"),
                });
            }
        }
        if level.is_multiple_of(ell) {
            self.ramified.insert(ell);
        } else if !within_hasse_bound(a, ell) {
            return Err(Error::Validation {
                line,
                message: format!("a_{ell} = {a} violates |a_ell| <= 2 sqrt(ell)"),
            });
        }
        self.entries.insert(ell, a);
        Ok(())
    }

    pub fn get(&self, ell: u64) -> Result<i64> {
        self.entries
            .get(&ell)
            .copied()
            .ok_or(Error::Coverage { ell })
    }

    /// Primes dividing the level; stored but never classified.
    pub fn is_ramified(&self, ell: u64) -> bool {
        self.ramified.contains(&ell)
    }

    /// The largest prime listed, if any.
    pub fn max_ell(&self) -> Option<u64> {
        self.entries.last_key_value().map(|(&k, _)| k)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, i64)> + '_ {
        self.entries.iter().map(|(&k, &v)| (k, v))
    }
}

/// Reads a UTF-8 CSV with header `ell,a_ell`.
pub fn parse_coefficients<R: Read>(reader: R, level: u64) -> Result<CoefficientTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut table = CoefficientTable::default();
    let mut saw_header = false;
    for record in rdr.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if !saw_header {
            if record.len() != 2 || &record[0] != "ell" || &record[1] != "a_ell" {
                return Err(Error::Parse {
                    line,
                    message: "expected header `ell,a_ell`".into(),
                });
            }
            saw_header = true;
            continue;
        }
        if record.len() != 2 {
            return Err(Error::Parse {
                line,
                message: format!("expected 2 fields, found {}", record.len()),
            });
        }
        let ell: u64 = record[0].parse().map_err(|_| Error::Parse {
            line,
            message: format!("bad prime `{}`", &record[0]),
        })?;
        let a: i64 = record[1].parse().map_err(|_| Error::Parse {
            line,
            message: format!("bad coefficient `{}`", &record[1]),
        })?;
        table.insert(level, ell, a, line)?;
    }
    if !saw_header {
        return Err(Error::Parse {
            line: 1,
            message: "missing header `ell,a_ell`".into(),
        });
    }
    Ok(table)
}

pub fn load_coefficients(path: impl AsRef<Path>, level: u64) -> Result<CoefficientTable> {
    let file = std::fs::File::open(path)?;
    parse_coefficients(std::io::BufReader::new(file), level)
}

#[derive(Clone, Debug)]
pub enum CoefficientBackend {
    Curve {
        curve: CurveModel,
        counting: PointCountConfig,
    },
    Table(CoefficientTable),
}

impl CoefficientBackend {
    fn coefficient(&self, ell: u64) -> Result<i64> {
        match self {
            CoefficientBackend::Curve { curve, counting } => {
                curves::trace_of_frobenius(curve, ell, counting)
            }
            CoefficientBackend::Table(table) => table.get(ell),
        }
    }
}

/// Hypotheses about `g` that are taken on trust.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CertifiedInputs {
    pub p: u64,
    pub lambda_g: u32,
    pub mu_zero: bool,
    pub surjective_mod_p: bool,
    pub optimal_level_asserted: bool,
}

/// Immutable description of `g`. Construction enforces `p >= 5`, `p ∤ N_g`
/// and `p ∤ a_p`.
#[derive(Clone, Debug)]
pub struct FormContext {
    level: u64,
    inputs: CertifiedInputs,
    a_p: i64,
    backend: CoefficientBackend,
}

impl FormContext {
    pub fn new(level: u64, inputs: CertifiedInputs, backend: CoefficientBackend) -> Result<Self> {
        let p = inputs.p;
        if level == 0 {
            return Err(Error::invalid("level must be positive"));
        }
        if !is_prime(p) {
            return Err(Error::invalid(format!("p = {p} is not prime")));
        }
        if p < 5 {
            return Err(Error::HypothesisViolation(format!(
                "p = {p} must be at least 5"
            )));
        }
        if level.is_multiple_of(p) {
            return Err(Error::HypothesisViolation(format!(
                "p = {p} divides N_g = {level}"
            )));
        }
        if let CoefficientBackend::Curve { curve, .. } = &backend {
            if curve.conductor() != level {
                return Err(Error::Config(format!(
                    "level {level} differs from the curve conductor {}",
                    curve.conductor()
                )));
            }
        }
        let a_p = backend.coefficient(p)?;
        if !curves::is_ordinary_trace(a_p, p) {
            return Err(Error::HypothesisViolation(format!(
                "g is not ordinary at p = {p}: a_p = {a_p}"
            )));
        }
        Ok(FormContext {
            level,
            inputs,
            a_p,
            backend,
        })
    }

    pub fn from_curve(
        curve: CurveModel,
        counting: PointCountConfig,
        inputs: CertifiedInputs,
    ) -> Result<Self> {
        let level = curve.conductor();
        FormContext::new(level, inputs, CoefficientBackend::Curve { curve, counting })
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn p(&self) -> u64 {
        self.inputs.p
    }

    pub fn lambda_g(&self) -> u32 {
        self.inputs.lambda_g
    }

    pub fn mu_zero(&self) -> bool {
        self.inputs.mu_zero
    }

    pub fn surjective_mod_p(&self) -> bool {
        self.inputs.surjective_mod_p
    }

    pub fn inputs(&self) -> &CertifiedInputs {
        &self.inputs
    }

    pub fn a_p(&self) -> i64 {
        self.a_p
    }

    pub fn backend(&self) -> &CoefficientBackend {
        &self.backend
    }

    /// `true` when `ell` divides `N_g p`.
    pub fn is_excluded(&self, ell: u64) -> bool {
        self.level.is_multiple_of(ell) || ell == self.inputs.p
    }

    /// The `ell`-th Fourier coefficient of `g`, for `ell ∤ N_g p`.
    ///
    /// Its reduction mod p is the trace of the residual Frobenius at `ell`.
    pub fn a_ell(&self, ell: u64) -> Result<i64> {
        if !is_prime(ell) {
            return Err(Error::invalid(format!("{ell} is not prime")));
        }
        if self.is_excluded(ell) {
            return Err(Error::invalid(format!(
                "{ell} divides N_g p = {} * {}",
                self.level, self.inputs.p
            )));
        }
        self.backend.coefficient(ell)
    }
}
