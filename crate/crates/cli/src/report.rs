//! Report files: machine-readable JSON plus a flat table rendering.

use crate::instance::MeasurementSection;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub instance_hash: String,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dual_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub covariant: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub covariance_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value_before: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub self_check_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measurement: Option<MeasurementSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theorem: Option<TheoremSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub in_class: Option<bool>,
    pub timing_ms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoremSummary {
    pub trials: usize,
    pub max_value_deviation: f64,
    pub max_covariance_residual: f64,
    pub all_valid: bool,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessSummary {
    pub outcome: usize,
    pub pairing: f64,
    pub violation: f64,
    pub determinism_residual: f64,
    pub min_product_pairing: f64,
}

impl Report {
    pub fn new(instance_hash: String, command: &str) -> Self {
        Report {
            instance_hash,
            command: command.to_string(),
            method: None,
            value: None,
            dual_bound: None,
            gap: None,
            iterations: None,
            covariant: None,
            covariance_residual: None,
            value_before: None,
            self_check_residual: None,
            measurement: None,
            theorem: None,
            witness: None,
            in_class: None,
            timing_ms: 0.0,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Flat `key: value` listing; nested sections are dotted, bulky arrays
    /// are summarized by length.
    pub fn to_table(&self) -> String {
        let v = serde_json::to_value(self).expect("report serializes");
        let mut rows: Vec<(String, String)> = Vec::new();
        flatten("", &v, &mut rows);
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        let mut out = String::new();
        for (k, val) in rows {
            out.push_str(&format!("{:<width$}  {}\n", k, val, width = width));
        }
        out
    }
}

fn flatten(prefix: &str, v: &serde_json::Value, rows: &mut Vec<(String, String)>) {
    match v {
        serde_json::Value::Object(map) => {
            for (k, inner) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{}.{}", prefix, k)
                };
                flatten(&key, inner, rows);
            }
        }
        serde_json::Value::Array(items) => {
            rows.push((prefix.to_string(), format!("[{} entries]", items.len())));
        }
        other => rows.push((prefix.to_string(), other.to_string())),
    }
}
