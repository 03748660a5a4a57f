//! Persisted model records.

use chrono::{DateTime, SecondsFormat, Utc};
use ptex_core::{CountDataset, FitMethod, FitResult, PteParams};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelRecord {
    pub schema_version: String,
    pub method: FitMethod,
    pub alpha: f64,
    pub theta: f64,
    pub loglik: f64,
    pub se_alpha: Option<f64>,
    pub se_theta: Option<f64>,
    pub n: u64,
    pub fitted_at: String,
    pub dataset_digest: String,
}

/// SHA-256 of the canonical `value,frequency` listing.
pub fn dataset_digest(data: &CountDataset) -> String {
    hex::encode(Sha256::digest(data.canonical_text().as_bytes()))
}

/// Now, or `SOURCE_DATE_EPOCH` when set.
pub fn timestamp() -> String {
    let at = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<i64>().ok())
        .and_then(|s| DateTime::<Utc>::from_timestamp(s, 0))
        .unwrap_or_else(Utc::now);
    at.to_rfc3339_opts(SecondsFormat::Secs, true)
}

impl ModelRecord {
    pub fn from_fit(fit: &FitResult, data: &CountDataset) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.into(),
            method: fit.method,
            alpha: fit.params.alpha(),
            theta: fit.params.theta(),
            loglik: fit.loglik,
            se_alpha: fit.se.map(|s| s[0]),
            se_theta: fit.se.map(|s| s[1]),
            n: data.n(),
            fitted_at: timestamp(),
            dataset_digest: dataset_digest(data),
        }
    }

    pub fn params(&self) -> CliResult<PteParams> {
        PteParams::new(self.alpha, self.theta)
            .map_err(|e| CliError::data(format!("model record holds invalid parameters: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("record serializes")
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| CliError::data(format!("model record is not valid JSON: {e}")))?;
        match value.get("schema_version").and_then(|v| v.as_str()) {
            Some(SCHEMA_VERSION) => {}
            Some(other) => {
                return Err(CliError::data(format!(
                    "model record schema version {other} is not supported (expected {SCHEMA_VERSION})"
                )))
            }
            None => return Err(CliError::data("model record has no schema_version")),
        }
        serde_json::from_value(value).map_err(|e| CliError::data(format!("model record schema error: {e}")))
    }
}
