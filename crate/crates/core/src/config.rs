//! Run configuration: a flat TOML file.
//!
//! ```toml
//! p = 7
//! lambda_g = 0
//! mu_zero = true
//! surjective_mod_p = true
//! optimal_level_asserted = true
//! backend = "curve"            # or "table"
//! curve = [0, -1, 1, -10, -20] # [a1, a2, a3, a4, a6], curve backend
//! conductor = 11               # curve backend
//! # level = 11                 # table backend
//! # table = "coefficients.csv" # table backend, relative to this file
//! ```
//!
//! Optional tuning keys: `scan_bound`, `density_bound`, `naive_count_limit`,
//! `bsgs_max_points`, `s_ell_cap`, `sigma_band`, `min_expected_hits`,
//! `factor_bound`, `threads`.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::curves::{CurveModel, PointCountConfig, DEFAULT_BSGS_MAX_POINTS, DEFAULT_NAIVE_LIMIT};
use crate::density::{DensityConfig, DEFAULT_MIN_EXPECTED_HITS, DEFAULT_SIGMA_BAND};
use crate::error::{Error, Result};
use crate::forms::{load_coefficients, CertifiedInputs, CoefficientBackend, FormContext};
use crate::iwasawa::DEFAULT_S_ELL_CAP;
use crate::levels::DEFAULT_FACTOR_BOUND;

pub const DEFAULT_CONFIG: &str = include_str!("../configs/default.toml");
pub const DEFAULT_SCAN_BOUND: u64 = 100_000;
pub const DEFAULT_DENSITY_BOUND: u64 = 2_000_000;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    p: Option<u64>,
    lambda_g: Option<u32>,
    mu_zero: Option<bool>,
    surjective_mod_p: Option<bool>,
    optimal_level_asserted: Option<bool>,
    backend: Option<String>,
    curve: Option<[i64; 5]>,
    conductor: Option<u64>,
    level: Option<u64>,
    table: Option<PathBuf>,
    scan_bound: Option<u64>,
    density_bound: Option<u64>,
    naive_count_limit: Option<u64>,
    bsgs_max_points: Option<u32>,
    s_ell_cap: Option<u32>,
    sigma_band: Option<f64>,
    min_expected_hits: Option<f64>,
    factor_bound: Option<u64>,
    threads: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum BackendSpec {
    Curve { coeffs: [i64; 5], conductor: u64 },
    Table { level: u64, path: PathBuf },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub inputs: CertifiedInputs,
    pub backend: BackendSpec,
    pub counting: PointCountConfig,
    pub scan_bound: u64,
    pub density_bound: u64,
    pub s_ell_cap: u32,
    pub density: DensityConfig,
    pub factor_bound: u64,
    pub threads: Option<usize>,
}

fn required<T>(value: Option<T>, key: &str) -> Result<T> {
    value.ok_or_else(|| Error::Config(format!("missing config key `{key}`")))
}

impl RunConfig {
    /// Parses a configuration; relative table paths resolve against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let inputs = CertifiedInputs {
            p: required(raw.p, "p")?,
            lambda_g: required(raw.lambda_g, "lambda_g")?,
            mu_zero: required(raw.mu_zero, "mu_zero")?,
            surjective_mod_p: required(raw.surjective_mod_p, "surjective_mod_p")?,
            optimal_level_asserted: required(raw.optimal_level_asserted, "optimal_level_asserted")?,
        };
        let backend = match required(raw.backend, "backend")?.as_str() {
            "curve" => BackendSpec::Curve {
                coeffs: required(raw.curve, "curve")?,
                conductor: required(raw.conductor, "conductor")?,
            },
            "table" => BackendSpec::Table {
                level: required(raw.level, "level")?,
                path: base_dir.join(required(raw.table, "table")?),
            },
            other => {
                return Err(Error::Config(format!(
                    "backend must be \"curve\" or \"table\", got {other:?}"
                )))
            }
        };
        let counting = PointCountConfig {
            naive_limit: raw.naive_count_limit.unwrap_or(DEFAULT_NAIVE_LIMIT),
            bsgs_max_points: raw.bsgs_max_points.unwrap_or(DEFAULT_BSGS_MAX_POINTS),
        };
        let density = DensityConfig {
            sigma_band: raw.sigma_band.unwrap_or(DEFAULT_SIGMA_BAND),
            min_expected_hits: raw.min_expected_hits.unwrap_or(DEFAULT_MIN_EXPECTED_HITS),
        };
        let band_ok = density.sigma_band > 0.0;
        let hits_ok = density.min_expected_hits >= 0.0;
        if !band_ok || !hits_ok {
            return Err(Error::Config(
                "sigma_band must be positive and min_expected_hits non-negative".into(),
            ));
        }
        if raw.threads == Some(0) {
            return Err(Error::Config("threads must be positive".into()));
        }
        Ok(RunConfig {
            inputs,
            backend,
            counting,
            scan_bound: raw.scan_bound.unwrap_or(DEFAULT_SCAN_BOUND),
            density_bound: raw.density_bound.unwrap_or(DEFAULT_DENSITY_BOUND),
            s_ell_cap: raw.s_ell_cap.unwrap_or(DEFAULT_S_ELL_CAP),
            density,
            factor_bound: raw.factor_bound.unwrap_or(DEFAULT_FACTOR_BOUND),
            threads: raw.threads,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        RunConfig::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// The bundled example: `11a1` with `p = 7`.
    pub fn default_config() -> Self {
        RunConfig::parse(DEFAULT_CONFIG, Path::new(".")).expect("bundled default config parses")
    }

    pub fn level(&self) -> u64 {
        match &self.backend {
            BackendSpec::Curve { conductor, .. } => *conductor,
            BackendSpec::Table { level, .. } => *level,
        }
    }

    pub fn curve(&self) -> Result<Option<CurveModel>> {
        match &self.backend {
            BackendSpec::Curve { coeffs, conductor } => CurveModel::new(*coeffs, *conductor)
                .map(Some)
                .map_err(|e| Error::Config(format!("curve: {e}"))),
            BackendSpec::Table { .. } => Ok(None),
        }
    }

    pub fn context(&self) -> Result<FormContext> {
        let backend = match &self.backend {
            BackendSpec::Curve { .. } => CoefficientBackend::Curve {
                curve: self.curve()?.expect("curve backend"),
                counting: self.counting,
            },
            BackendSpec::Table { level, path } => {
                CoefficientBackend::Table(load_coefficients(path, *level)?)
            }
        };
        FormContext::new(self.level(), self.inputs, backend)
    }

    /// The hypotheses taken on trust, as `key = value` lines.
    pub fn assertions(&self) -> Vec<String> {
        let i = &self.inputs;
        vec![
            format!("lambda_g = {}", i.lambda_g),
            format!("mu_zero = {}", i.mu_zero),
            format!("surjective_mod_p = {}", i.surjective_mod_p),
            format!("optimal_level_asserted = {}", i.optimal_level_asserted),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_builds_a_context() {
        let cfg = RunConfig::default_config();
        assert_eq!((cfg.inputs.p, cfg.level()), (7, 11));
        let ctx = cfg.context().unwrap();
        assert_eq!(ctx.a_p(), -2);
    }

    #[test]
    fn missing_key_is_named() {
        let text = DEFAULT_CONFIG.replace("p = 7", "");
        let err = RunConfig::parse(&text, Path::new(".")).unwrap_err();
        assert!(err.to_string().contains("`p`"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{DEFAULT_CONFIG}\nbogus = 1\n");
        assert!(matches!(
            RunConfig::parse(&text, Path::new(".")),
            Err(Error::Config(_))
        ));
    }
}
