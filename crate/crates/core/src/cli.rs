//! Command-line front end.
//!
//! Exit codes: 0 success, 2 configuration or precondition error, 3
//! computation error (coverage gaps, scarcity, resource limits, internal
//! failures).

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::arith::sieve::PrimeRange;
use crate::config::RunConfig;
use crate::density::{empirical_density_with_classes, enumerate_gl2_classes, exact_densities};
use crate::error::{Error, Result};
use crate::forms::FormContext;
use crate::iwasawa::sigma_of_g;
use crate::levels::{carayol_check, enumerate_level_sets, plan_target_lambda, Admissibility};
use crate::report::{render, ReportOptions};
use crate::residual::{classify_range, screen_p, ClassifiedPrime, Verdict};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_COMPUTATION: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "lambda-forge",
    version,
    about = "Level-raising primes, lambda-invariant prediction and Chebotarev checks"
)]
pub struct Cli {
    /// Configuration file (TOML). Defaults to the bundled 11a1, p = 7 example.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Add a generation timestamp to JSON reports.
    #[arg(long, global = true)]
    pub timestamps: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify Frobenius at every prime of a range.
    Classify(RangeArgs),
    /// Choose Pi and Omega primes reaching a target lambda.
    Plan(PlanArgs),
    /// Compare empirical Pi/Omega frequencies with the exact densities.
    VerifyDensity(DensityArgs),
    /// Check a proposed level against Carayol's conditions.
    Carayol(CarayolArgs),
    /// Tabulate s, d and sigma for g over a range.
    Sigma(SigmaArgs),
    /// Screen a prime p for the configured curve.
    ScreenP(ScreenArgs),
    /// Print Fourier coefficients a_ell.
    AEll(AEllArgs),
}

#[derive(Debug, Args)]
pub struct RangeArgs {
    #[arg(long, default_value_t = 2)]
    pub from: u64,
    #[arg(long)]
    pub to: u64,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    #[arg(long)]
    pub target_lambda: u32,
    #[arg(long, default_value_t = 0)]
    pub omega_count: usize,
    /// Largest prime scanned; defaults to `scan_bound` from the configuration.
    #[arg(long)]
    pub scan_bound: Option<u64>,
    /// Also list this many lexicographically smallest level sets.
    #[arg(long, default_value_t = 1)]
    pub alternatives: usize,
}

#[derive(Debug, Args)]
pub struct DensityArgs {
    /// Largest prime scanned; defaults to `density_bound` from the configuration.
    #[arg(long)]
    pub bound: Option<u64>,
    /// Instead of sampling primes, count classes in GL2(F_P) exhaustively.
    #[arg(long, value_name = "P")]
    pub enumerate_gl2: Option<u64>,
    /// Dump the per-prime classification as CSV.
    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CarayolArgs {
    #[arg(long)]
    pub level: u64,
}

#[derive(Debug, Args)]
pub struct SigmaArgs {
    #[arg(long, default_value_t = 2)]
    pub from: u64,
    #[arg(long)]
    pub to: u64,
    /// Only primes in Pi_g or Omega_g.
    #[arg(long)]
    pub admissible_only: bool,
}

#[derive(Debug, Args)]
pub struct ScreenArgs {
    #[arg(long)]
    pub p: u64,
}

#[derive(Debug, Args)]
pub struct AEllArgs {
    #[arg(long, conflicts_with_all = ["from", "to"])]
    pub ell: Option<u64>,
    #[arg(long)]
    pub from: Option<u64>,
    #[arg(long)]
    pub to: Option<u64>,
}

pub fn exit_code(error: &Error) -> u8 {
    match error {
        Error::Config(_)
        | Error::InvalidArgument(_)
        | Error::HypothesisViolation(_)
        | Error::NotMultipleOfLevel { .. }
        | Error::Parse { .. }
        | Error::Validation { .. } => EXIT_CONFIG,
        Error::ResourceLimit(_)
        | Error::Overflow(_)
        | Error::Coverage { .. }
        | Error::MissingData(_)
        | Error::Scarcity { .. }
        | Error::Unfactorable(_)
        | Error::Internal(_)
        | Error::Io(_) => EXIT_COMPUTATION,
    }
}

pub fn load_config(cli: &Cli) -> Result<RunConfig> {
    match &cli.config {
        Some(path) => RunConfig::load(path),
        None => Ok(RunConfig::default_config()),
    }
}

/// Runs a parsed command and returns the text to emit.
pub fn execute(cli: &Cli, cfg: &RunConfig) -> Result<String> {
    let options = ReportOptions {
        timestamps: cli.timestamps,
    };
    let json_only = |name: &str| -> Result<()> {
        if cli.format == Format::Csv {
            return Err(Error::invalid(format!("{name} only produces JSON")));
        }
        Ok(())
    };
    match &cli.command {
        Command::Classify(args) => {
            let ctx = cfg.context()?;
            let classified = classify_range(&ctx, range(args.from, args.to)?)?;
            match cli.format {
                Format::Csv => classification_csv(&classified),
                Format::Json => render(
                    "classify",
                    cfg,
                    &classification_json(&classified, args),
                    &options,
                ),
            }
        }
        Command::Plan(args) => {
            json_only("plan")?;
            let ctx = cfg.context()?;
            render("plan", cfg, &plan(&ctx, cfg, args)?, &options)
        }
        Command::VerifyDensity(args) => {
            json_only("verify-density")?;
            if let Some(p) = args.enumerate_gl2 {
                let report = enumerate_gl2_classes(p)?;
                let formula = (p - 3) * report.gl2_order / ((p - 1) * (p - 1));
                let body = json!({
                    "class_counts": report,
                    "formula_count": formula,
                    "identity_holds": report.count_y == formula && report.count_y_prime == formula,
                });
                return render("verify-density", cfg, &body, &options);
            }
            let ctx = cfg.context()?;
            let bound = args.bound.unwrap_or(cfg.density_bound);
            let ((pi, omega), classified) =
                empirical_density_with_classes(&ctx, range(2, bound)?, &cfg.density)?;
            if let Some(path) = &args.csv {
                std::fs::write(path, classification_csv(&classified)?)?;
            }
            let body = json!({
                "bound": bound,
                "sigma_band": cfg.density.sigma_band,
                "min_expected_hits": cfg.density.min_expected_hits,
                "pi": pi,
                "omega": omega,
                "note": "The Pi frequency tests the product of the GL2 class proportion and the \
                         proportion (p-1)/p of primes with ell^(p-1) ≢ 1 mod p^2 jointly; the \
                         independence of the two conditions is not tested on its own.",
            });
            render("verify-density", cfg, &body, &options)
        }
        Command::Carayol(args) => {
            json_only("carayol")?;
            let ctx = cfg.context()?;
            let report = carayol_check(&ctx, args.level, cfg.factor_bound)?;
            render("carayol", cfg, &report, &options)
        }
        Command::Sigma(args) => {
            let ctx = cfg.context()?;
            let classified = classify_range(&ctx, range(args.from, args.to)?)?;
            let mut rows = Vec::new();
            for c in classified.iter().filter_map(ClassifiedPrime::class) {
                if args.admissible_only && c.verdict == Verdict::Neither {
                    continue;
                }
                rows.push(sigma_of_g(c, cfg.s_ell_cap)?);
            }
            match cli.format {
                Format::Csv => to_csv(&["ell", "s", "d", "sigma"], &rows),
                Format::Json => render(
                    "sigma",
                    cfg,
                    &json!({ "from": args.from, "to": args.to, "sigma": rows }),
                    &options,
                ),
            }
        }
        Command::ScreenP(args) => {
            json_only("screen-p")?;
            let curve = cfg
                .curve()?
                .ok_or_else(|| Error::Config("screen-p needs the curve backend".into()))?;
            render(
                "screen-p",
                cfg,
                &screen_p(&curve, args.p, &cfg.counting),
                &options,
            )
        }
        Command::AEll(args) => {
            let ctx = cfg.context()?;
            let rows = a_ell_rows(&ctx, args)?;
            match cli.format {
                Format::Csv => to_csv(&["ell", "a_ell"], &rows),
                Format::Json => render("a-ell", cfg, &json!({ "coefficients": rows }), &options),
            }
        }
    }
}

fn range(from: u64, to: u64) -> Result<PrimeRange> {
    PrimeRange::new(from.max(2), to)
}

#[derive(Serialize)]
struct ClassRow {
    ell: u64,
    trace_mod_p: Option<u64>,
    verdict: &'static str,
}

fn to_csv<T: Serialize>(header: &[&str], rows: &[T]) -> Result<String> {
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    writer
        .write_record(header)
        .map_err(|e| Error::Internal(format!("writing CSV: {e}")))?;
    for row in rows {
        writer
            .serialize(row)
            .map_err(|e| Error::Internal(format!("writing CSV: {e}")))?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::Internal(format!("writing CSV: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Internal(e.to_string()))
}

fn classification_csv(classified: &[ClassifiedPrime]) -> Result<String> {
    let rows: Vec<ClassRow> = classified
        .iter()
        .map(|c| ClassRow {
            ell: c.ell(),
            trace_mod_p: c.class().map(|k| k.trace_mod_p),
            verdict: c.label(),
        })
        .collect();
    to_csv(&["ell", "trace_mod_p", "verdict"], &rows)
}

fn classification_json(classified: &[ClassifiedPrime], args: &RangeArgs) -> serde_json::Value {
    let mut counts = std::collections::BTreeMap::new();
    let classes: Vec<_> = classified
        .iter()
        .map(|c| {
            *counts.entry(c.label()).or_insert(0u64) += 1;
            match c {
                ClassifiedPrime::Classified(k) => serde_json::to_value(k).expect("plain data"),
                ClassifiedPrime::Skipped { ell } => json!({ "ell": ell, "verdict": "Skipped" }),
            }
        })
        .collect();
    json!({ "from": args.from, "to": args.to, "counts": counts, "classes": classes })
}

fn plan(ctx: &FormContext, cfg: &RunConfig, args: &PlanArgs) -> Result<serde_json::Value> {
    let scan_bound = args.scan_bound.unwrap_or(cfg.scan_bound);
    let set = plan_target_lambda(
        ctx,
        args.target_lambda,
        args.omega_count,
        scan_bound,
        cfg.s_ell_cap,
    )?;
    let carayol = carayol_check(ctx, set.n_f, cfg.factor_bound)?;
    if carayol.status != Admissibility::Admissible {
        return Err(Error::Internal(format!(
            "planned level {} fails the Carayol check",
            set.n_f
        )));
    }
    let mut body = serde_json::to_value(&set).map_err(|e| Error::Internal(e.to_string()))?;
    let map = body.as_object_mut().expect("level set is an object");
    map.insert("n".into(), json!(set.n()));
    map.insert("r".into(), json!(set.r()));
    map.insert("target_lambda".into(), json!(args.target_lambda));
    map.insert("scan_bound".into(), json!(scan_bound));
    map.insert("carayol_cases".into(), json!(carayol.primes));
    if args.alternatives > 1 {
        let classified = classify_range(ctx, range(2, scan_bound)?)?;
        let sets = enumerate_level_sets(
            ctx,
            &classified,
            set.n(),
            set.r(),
            args.alternatives,
            cfg.s_ell_cap,
        )?;
        map.insert("alternatives".into(), json!(sets));
    }
    let (pi, omega) = exact_densities(ctx.p())?;
    map.insert(
        "expected_supply".into(),
        json!({ "pi": pi.to_string(), "omega": omega.to_string() }),
    );
    Ok(body)
}

#[derive(Serialize)]
struct AEllRow {
    ell: u64,
    a_ell: i64,
}

fn a_ell_rows(ctx: &FormContext, args: &AEllArgs) -> Result<Vec<AEllRow>> {
    let coefficient = |ell: u64| -> Result<i64> {
        if ell == ctx.p() {
            Ok(ctx.a_p())
        } else {
            ctx.a_ell(ell)
        }
    };
    if let Some(ell) = args.ell {
        return Ok(vec![AEllRow {
            ell,
            a_ell: coefficient(ell)?,
        }]);
    }
    let to = args
        .to
        .ok_or_else(|| Error::invalid("a-ell needs --ell or --to"))?;
    let primes = range(args.from.unwrap_or(2), to)?.primes()?;
    use rayon::prelude::*;
    primes
        .par_iter()
        .filter(|&&ell| !ctx.level().is_multiple_of(ell))
        .map(|&ell| coefficient(ell).map(|a_ell| AEllRow { ell, a_ell }))
        .collect()
}

/// Parses, runs and writes output; returns the process exit code.
pub fn run(cli: Cli) -> u8 {
    let result = load_config(&cli).and_then(|cfg| {
        configure_threads(&cfg)?;
        execute(&cli, &cfg)
    });
    match result.and_then(|text| emit(&cli, &text)) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn emit(cli: &Cli, text: &str) -> Result<()> {
    match &cli.out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// `LAMBDA_FORGE_THREADS` takes precedence over the `threads` config key.
fn configure_threads(cfg: &RunConfig) -> Result<()> {
    let threads = match std::env::var("LAMBDA_FORGE_THREADS") {
        Ok(v) => Some(
            v.trim()
                .parse::<usize>()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| {
                    Error::Config(format!(
                        "LAMBDA_FORGE_THREADS must be a positive integer, got {v:?}"
                    ))
                })?,
        ),
        Err(_) => cfg.threads,
    };
    if let Some(n) = threads {
        // A pool that is already built (as in tests) is kept.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    Ok(())
}
