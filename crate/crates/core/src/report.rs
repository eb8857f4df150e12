//! Computed risk values with enough context to audit them.

use serde_json::{json, Value};

use crate::scalar::Real;

/// A computed risk value plus the method that produced it, for table
/// emission and audit. Serializes to a flat key-value record.
#[derive(Debug, Clone)]
pub struct RiskReport<T> {
    pub value: T,
    pub method: &'static str,
    pub alpha: T,
    /// Parameter echo, e.g. `"delta=0.05, kappa=1"`.
    pub inputs: String,
    pub tolerance_used: T,
    pub warning: Option<String>,
}

impl<T: Real> RiskReport<T> {
    pub fn new(value: T, method: &'static str, alpha: T, inputs: String, tolerance_used: T) -> Self {
        RiskReport {
            value,
            method,
            alpha,
            inputs,
            tolerance_used,
            warning: None,
        }
    }

    pub fn with_warning(mut self, warning: impl Into<String>) -> Self {
        self.warning = Some(warning.into());
        self
    }

    pub fn csv_header() -> &'static str {
        "value,method,alpha,tolerance_used,inputs,warning"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},\"{}\",\"{}\"",
            self.value.to_f64().unwrap_or(f64::NAN),
            self.method,
            self.alpha.to_f64().unwrap_or(f64::NAN),
            self.tolerance_used.to_f64().unwrap_or(f64::NAN),
            self.inputs,
            self.warning.as_deref().unwrap_or("")
        )
    }

    pub fn to_json(&self) -> Value {
        let num = |x: T| {
            let v = x.to_f64().unwrap_or(f64::NAN);
            if v.is_finite() {
                json!(v)
            } else {
                Value::Null
            }
        };
        json!({
            "value": num(self.value),
            "method": self.method,
            "alpha": num(self.alpha),
            "tolerance_used": num(self.tolerance_used),
            "inputs": self.inputs,
            "warning": self.warning,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trips_value_exactly() {
        let r = RiskReport::new(2.154344350649533f64, "test", 0.96, "law=normal".into(), 1e-9);
        let v = r.to_json();
        let text = serde_json::to_string(&v).unwrap();
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["value"].as_f64().unwrap(), 2.154344350649533);
    }

    #[test]
    fn csv_row_carries_warning() {
        let r = RiskReport::new(1.0f64, "test", 0.5, String::new(), 0.0)
            .with_warning("m clamped to 1");
        assert!(r.csv_row().contains("m clamped to 1"));
    }
}
