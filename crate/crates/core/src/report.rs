use serde::{Deserialize, Serialize};

/// Result of a verification run. Serializes to the JSON report schema
/// `{name, samples, max_residual, threshold, pass, details[]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub samples: usize,
    pub max_residual: f64,
    pub threshold: f64,
    pub pass: bool,
    #[serde(default)]
    pub details: Vec<Detail>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detail {
    pub label: String,
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pass: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Detail {
    pub fn value(label: impl Into<String>, value: f64) -> Self {
        Detail { label: label.into(), value, threshold: None, pass: None, note: None }
    }

    /// A sub-check that passes when `value <= threshold`.
    pub fn bounded(label: impl Into<String>, value: f64, threshold: f64) -> Self {
        Detail { label: label.into(), value, threshold: Some(threshold), pass: Some(value <= threshold), note: None }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

impl CheckReport {
    /// A report that passes when `max_residual < threshold`.
    pub fn below(name: impl Into<String>, samples: usize, max_residual: f64, threshold: f64) -> Self {
        CheckReport {
            name: name.into(),
            samples,
            max_residual,
            threshold,
            pass: max_residual < threshold,
            details: Vec::new(),
        }
    }

    pub fn with_detail(mut self, d: Detail) -> Self {
        self.details.push(d);
        self
    }

    pub fn detail(&self, label: &str) -> Option<&Detail> {
        self.details.iter().find(|d| d.label == label)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

/// Running maximum that treats NaN as a failure value.
pub(crate) fn max_abs(acc: f64, v: f64) -> f64 {
    if v.is_nan() || acc.is_nan() {
        f64::NAN
    } else {
        acc.max(v.abs())
    }
}
