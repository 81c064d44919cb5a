//! CSV/JSON reporting. CSV bodies are the reproducibility contract: UTF-8,
//! stable header row, '.' decimal separator, 17 significant digits, and
//! byte-identical output for identical (config, seed) regardless of the
//! parallelism degree. Files are written atomically (temp + rename).

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Format a float with 17 significant digits, enough to round-trip f64.
pub fn fmt_f64(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        // Integral values print exactly; keeps CSVs readable.
        format!("{x}")
    } else {
        format!("{x:.16e}")
    }
}

#[derive(Debug, Clone, Default)]
pub struct CsvTable {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(headers: Vec<S>) -> Self {
        CsvTable { headers: headers.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push_row(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    /// The full CSV body, header row included.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.headers.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Outcome of one named assertion inside an experiment.
#[derive(Debug, Clone)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// One experiment's full report: config echo, CSV body, JSON summary.
#[derive(Debug, Clone)]
pub struct ReportEnvelope {
    pub experiment: String,
    pub tool_version: String,
    pub timestamp: String,
    pub config: BTreeMap<String, String>,
    pub csv: CsvTable,
    pub summary: serde_json::Value,
    pub assertions: Vec<Assertion>,
}

pub const SUMMARY_SCHEMA_VERSION: u32 = 1;

impl ReportEnvelope {
    pub fn new(experiment: &str, config: BTreeMap<String, String>, csv: CsvTable) -> Self {
        ReportEnvelope {
            experiment: experiment.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: unix_timestamp(),
            config,
            csv,
            summary: serde_json::Value::Null,
            assertions: Vec::new(),
        }
    }

    pub fn assert_true(&mut self, name: &str, passed: bool, detail: String) {
        self.assertions.push(Assertion { name: name.to_string(), passed, detail });
    }

    pub fn all_passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    /// JSON summary document; assertions appear exactly once each.
    pub fn summary_json(&self) -> serde_json::Value {
        let assertions: Vec<serde_json::Value> = self
            .assertions
            .iter()
            .map(|a| {
                serde_json::json!({
                    "name": a.name,
                    "passed": a.passed,
                    "detail": a.detail,
                })
            })
            .collect();
        serde_json::json!({
            "schema_version": SUMMARY_SCHEMA_VERSION,
            "experiment": self.experiment,
            "tool_version": self.tool_version,
            "timestamp": self.timestamp,
            "config": self.config,
            "rows": self.csv.rows.len(),
            "summary": self.summary,
            "assertions": assertions,
            "all_passed": self.all_passed(),
        })
    }

    /// Write `<name>.csv` and `<name>.json` under `dir`, atomically.
    pub fn write_atomic(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(dir)
            .map_err(|e| Error::ConfigInvalid(format!("create {dir:?}: {e}")))?;
        let csv_path = dir.join(format!("{}.csv", self.experiment));
        let json_path = dir.join(format!("{}.json", self.experiment));
        write_atomic(&csv_path, self.csv.render().as_bytes())?;
        let json = serde_json::to_string_pretty(&self.summary_json())
            .map_err(|e| Error::ConfigInvalid(format!("summary json: {e}")))?;
        write_atomic(&json_path, json.as_bytes())?;
        Ok((csv_path, json_path))
    }
}

fn unix_timestamp() -> String {
    use std::time::{SystemTime, UNIX_EPOCH};
    let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    format!("{secs}")
}

/// Write bytes to a temp file in the target directory, then rename over the
/// destination, so interrupted runs never leave partial reports.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let tmp = dir.join(format!(
        ".{}.tmp-{}",
        path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
        std::process::id()
    ));
    let io = |e: std::io::Error| Error::ConfigInvalid(format!("write {path:?}: {e}"));
    {
        let mut f = std::fs::File::create(&tmp).map_err(io)?;
        f.write_all(bytes).map_err(io)?;
        f.sync_all().map_err(io)?;
    }
    std::fs::rename(&tmp, path).map_err(io)?;
    Ok(())
}
