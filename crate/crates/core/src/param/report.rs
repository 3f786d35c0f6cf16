use serde::{Deserialize, Serialize};

use crate::symcore::ZeroVerdict;

/// One named check of a verification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// `None` when the check was not performed.
    pub passed: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<ZeroVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "String::is_empty", default)]
    pub detail: String,
}

/// Per-check results of a verification.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn verdict(&mut self, name: &str, passed: bool, v: ZeroVerdict) {
        self.push(Check {
            name: name.into(),
            passed: Some(passed),
            verdict: Some(v),
            value: None,
            detail: String::new(),
        });
    }

    pub fn value(&mut self, name: &str, passed: bool, value: f64, detail: impl Into<String>) {
        self.push(Check {
            name: name.into(),
            passed: Some(passed),
            verdict: None,
            value: Some(value),
            detail: detail.into(),
        });
    }

    pub fn skipped(&mut self, name: &str, detail: impl Into<String>) {
        self.push(Check { name: name.into(), passed: None, verdict: None, value: None, detail: detail.into() });
    }

    /// True when no performed check failed.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed != Some(false))
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn extend(&mut self, other: VerificationReport) {
        self.checks.extend(other.checks);
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "passed": self.passed(), "checks": self.checks })
    }
}
