//! JSON report envelope.
//!
//! Every report is one JSON object with sorted keys. Besides the command's
//! own fields it carries `schema_version`, `command`, `context` and the
//! `assertions` taken on trust. Nothing time-dependent appears unless
//! timestamps are requested.

use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::{BackendSpec, RunConfig};
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

pub struct ReportOptions {
    pub timestamps: bool,
}

fn context_block(cfg: &RunConfig) -> Value {
    let backend = match &cfg.backend {
        BackendSpec::Curve { coeffs, conductor } => json!({
            "kind": "curve",
            "curve": coeffs,
            "conductor": conductor,
        }),
        BackendSpec::Table { level, path } => json!({
            "kind": "table",
            "level": level,
            "table": path.display().to_string(),
        }),
    };
    json!({
        "p": cfg.inputs.p,
        "level": cfg.level(),
        "backend": backend,
    })
}

/// Wraps `body` (which must serialize to a JSON object) into a report.
pub fn render<T: Serialize>(
    command: &str,
    cfg: &RunConfig,
    body: &T,
    options: &ReportOptions,
) -> Result<String> {
    let body = serde_json::to_value(body)
        .map_err(|e| Error::Internal(format!("serializing report: {e}")))?;
    let Value::Object(mut map) = body else {
        return Err(Error::Internal("report body is not a JSON object".into()));
    };
    let mut envelope = Map::new();
    envelope.insert("schema_version".into(), json!(SCHEMA_VERSION));
    envelope.insert("command".into(), json!(command));
    envelope.insert("context".into(), context_block(cfg));
    envelope.insert("assertions".into(), json!(cfg.assertions()));
    if options.timestamps {
        let secs = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        envelope.insert("generated_at_unix".into(), json!(secs));
    }
    for (k, v) in envelope {
        if map.insert(k.clone(), v).is_some() {
            return Err(Error::Internal(format!(
                "report body uses reserved key {k:?}"
            )));
        }
    }
    let mut text = serde_json::to_string_pretty(&Value::Object(map))
        .map_err(|e| Error::Internal(format!("serializing report: {e}")))?;
    text.push('\n');
    Ok(text)
}
