//! Report assembly: a versioned JSON summary plus a fixed-schema CSV table
//! per command. Output is byte-deterministic for a fixed config and seed
//! (sorted JSON maps, shortest-round-trip float formatting, no timestamps).

use std::path::Path;

use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    pub fn upper(name: &str, value: f64, threshold: f64) -> Self {
        Check {
            name: name.to_string(),
            passed: value.is_finite() && value <= threshold,
            value,
            threshold,
            detail: None,
        }
    }

    pub fn flag(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.to_string(),
            passed,
            value: if passed { 1.0 } else { 0.0 },
            threshold: 1.0,
            detail: Some(detail.into()),
        }
    }

}

#[derive(Debug, Serialize)]
pub struct Report {
    pub schema: u32,
    pub command: String,
    pub config_hash: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub tolerances: serde_json::Value,
    pub checks: Vec<Check>,
    pub results: serde_json::Value,
    pub passed: bool,
}

impl Report {
    pub fn new(
        command: &str,
        config_hash: &str,
        seed: Option<u64>,
        tolerances: serde_json::Value,
        checks: Vec<Check>,
        results: serde_json::Value,
    ) -> Self {
        let passed = checks.iter().all(|c| c.passed);
        Report {
            schema: 1,
            command: command.to_string(),
            config_hash: config_hash.to_string(),
            seed,
            tolerances,
            checks,
            results,
            passed,
        }
    }

    pub fn write(&self, out_dir: &Path, csv: &str) -> Result<(), String> {
        std::fs::create_dir_all(out_dir)
            .map_err(|e| format!("cannot create {}: {}", out_dir.display(), e))?;
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| format!("report serialization: {}", e))?;
        std::fs::write(out_dir.join("report.json"), json.as_bytes())
            .map_err(|e| format!("cannot write report.json: {}", e))?;
        std::fs::write(out_dir.join("table.csv"), csv.as_bytes())
            .map_err(|e| format!("cannot write table.csv: {}", e))?;
        Ok(())
    }

    pub fn print_summary(&self) {
        for check in &self.checks {
            println!(
                "{}: {} (value {}, threshold {})",
                if check.passed { "PASS" } else { "FAIL" },
                check.name,
                check.value,
                check.threshold
            );
        }
        println!(
            "{}: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.command
        );
    }
}

/// JSON object builder with deterministic (sorted) key order.
pub fn json_object(entries: Vec<(&str, serde_json::Value)>) -> serde_json::Value {
    let mut map = serde_json::Map::new();
    for (k, v) in entries {
        map.insert(k.to_string(), v);
    }
    serde_json::Value::Object(map)
}

pub fn json_f64(v: f64) -> serde_json::Value {
    serde_json::Number::from_f64(v)
        .map(serde_json::Value::Number)
        .unwrap_or(serde_json::Value::Null)
}

pub fn json_complex(v: num_complex::Complex64) -> serde_json::Value {
    serde_json::Value::Array(vec![json_f64(v.re), json_f64(v.im)])
}
