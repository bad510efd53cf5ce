//! JSON reports shared by every command.

use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::algebroid::AlgebroidModel;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tol: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, residual: f64, tol: f64) -> Self {
        Check {
            name: name.into(),
            residual,
            tol,
            pass: residual <= tol,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub version: String,
    pub command: String,
    pub model: String,
    pub model_hash: Option<String>,
    pub seed: u64,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conditions: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<Value>,
    pub timestamp: u64,
}

/// SHA-256 of the canonical model JSON (keys sorted).
pub fn model_hash(model: &AlgebroidModel) -> String {
    let text = serde_json::to_string(&model.to_json()).expect("model JSON serializes");
    Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

impl Report {
    pub fn new(command: &str, model: &str, model_hash: Option<String>, seed: u64) -> Self {
        let timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Report {
            version: VERSION.to_string(),
            command: command.to_string(),
            model: model.to_string(),
            model_hash,
            seed,
            checks: Vec::new(),
            conditions: None,
            summary: None,
            timestamp,
        }
    }

    pub fn for_model(command: &str, model: &AlgebroidModel, seed: u64) -> Self {
        Report::new(command, &model.name, Some(model_hash(model)), seed)
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_pretty_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
