//! Machine-readable run reports.
//!
//! Single runs emit one JSON object with the fixed top-level keys
//! `inputs`, `result`, `residuals`, `flags`, `timing_ms`; each residual is
//! paired with the tolerance it was judged against.  Map keys are sorted,
//! so identical runs serialize byte-identically.

use serde::Serialize;
use serde_json::Value;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ResidualEntry {
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub inputs: Value,
    pub result: Value,
    pub residuals: BTreeMap<String, ResidualEntry>,
    pub flags: BTreeMap<String, bool>,
    pub timing_ms: u64,
}

impl RunReport {
    pub fn new(inputs: Value) -> Self {
        RunReport {
            inputs,
            result: Value::Null,
            residuals: BTreeMap::new(),
            flags: BTreeMap::new(),
            timing_ms: 0,
        }
    }

    /// Adds a residual judged as `|value| <= tolerance`.
    pub fn residual(&mut self, name: &str, value: f64, tolerance: f64) -> bool {
        let pass = value.abs() <= tolerance;
        self.residuals.insert(name.into(), ResidualEntry { value, tolerance, pass });
        pass
    }

    /// Adds a one-sided residual judged as `value <= tolerance` (signed
    /// quantities that may legitimately be very negative).
    pub fn residual_upper(&mut self, name: &str, value: f64, tolerance: f64) -> bool {
        let pass = value <= tolerance;
        self.residuals.insert(name.into(), ResidualEntry { value, tolerance, pass });
        pass
    }

    pub fn flag(&mut self, name: &str, value: bool) {
        self.flags.insert(name.into(), value);
    }

    pub fn all_pass(&self) -> bool {
        self.residuals.values().all(|r| r.pass)
    }

    /// Guard used before printing: a NaN or infinity anywhere in a report
    /// is a reportable bug.
    pub fn assert_finite(&self) -> Result<(), String> {
        fn walk(v: &Value, path: &str) -> Result<(), String> {
            match v {
                Value::Number(n) => {
                    if let Some(f) = n.as_f64() {
                        if !f.is_finite() {
                            return Err(format!("non-finite value at {path}"));
                        }
                    }
                    Ok(())
                }
                Value::Array(items) => {
                    for (i, item) in items.iter().enumerate() {
                        walk(item, &format!("{path}[{i}]"))?;
                    }
                    Ok(())
                }
                Value::Object(map) => {
                    for (k, item) in map {
                        walk(item, &format!("{path}.{k}"))?;
                    }
                    Ok(())
                }
                _ => Ok(()),
            }
        }
        walk(&self.inputs, "inputs")?;
        walk(&self.result, "result")?;
        for (name, r) in &self.residuals {
            if !r.value.is_finite() {
                return Err(format!("non-finite residual {name}"));
            }
        }
        Ok(())
    }

    /// Serializes as pretty JSON or as flat `key,value` CSV lines.
    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => serde_json::to_string_pretty(self).expect("report serializes"),
            OutputFormat::Csv => {
                let mut lines = vec!["key,value".to_string()];
                fn flatten(prefix: &str, v: &Value, out: &mut Vec<String>) {
                    match v {
                        Value::Object(map) => {
                            for (k, item) in map {
                                flatten(&format!("{prefix}.{k}"), item, out);
                            }
                        }
                        Value::Array(items) => {
                            for (i, item) in items.iter().enumerate() {
                                flatten(&format!("{prefix}[{i}]"), item, out);
                            }
                        }
                        other => out.push(format!("{prefix},{other}")),
                    }
                }
                flatten("inputs", &self.inputs, &mut lines);
                flatten("result", &self.result, &mut lines);
                for (name, r) in &self.residuals {
                    lines.push(format!("residual.{name}.value,{}", r.value));
                    lines.push(format!("residual.{name}.tolerance,{}", r.tolerance));
                    lines.push(format!("residual.{name}.pass,{}", r.pass));
                }
                for (name, v) in &self.flags {
                    lines.push(format!("flag.{name},{v}"));
                }
                lines.push(format!("timing_ms,{}", self.timing_ms));
                lines.join("\n")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}
