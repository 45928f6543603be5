//! Audit records pairing each reference value with how it was obtained.

use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub name: String,
    pub inputs: serde_json::Value,
    pub oracle_value: serde_json::Value,
    pub tolerance: f64,
    pub method: String,
}

impl OracleReport {
    pub fn new(
        name: impl Into<String>,
        inputs: serde_json::Value,
        oracle_value: serde_json::Value,
        tolerance: f64,
        method: impl Into<String>,
    ) -> Self {
        Self { name: name.into(), inputs, oracle_value, tolerance, method: method.into() }
    }
}

/// Serialize a batch of reports as pretty JSON.
pub fn to_json(reports: &[OracleReport]) -> String {
    serde_json::to_string_pretty(reports).expect("reports serialize")
}
