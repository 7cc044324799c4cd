//! Report assembly: JSON document plus a CSV table with a `#` header block.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use ballwalk_core::{Error, Result};
use serde::Serialize;
use serde_json::Value;

use crate::config::ExperimentConfig;

pub const VERSION: &str = concat!("ballwalk ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Comparison {
    /// `measured <= threshold`.
    AtMost,
    /// `measured >= threshold`.
    AtLeast,
}

#[derive(Debug, Clone, Serialize)]
pub struct Gate {
    pub name: String,
    pub measured: f64,
    pub comparison: Comparison,
    pub threshold: f64,
    pub pass: bool,
}

impl Gate {
    pub fn at_most(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            comparison: Comparison::AtMost,
            threshold,
            pass: measured <= threshold,
        }
    }

    pub fn at_least(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            comparison: Comparison::AtLeast,
            threshold,
            pass: measured >= threshold,
        }
    }

    fn line(&self) -> String {
        let op = match self.comparison {
            Comparison::AtMost => "<=",
            Comparison::AtLeast => ">=",
        };
        format!(
            "{} {} measured={:e} {op} threshold={:e}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.threshold
        )
    }
}

/// A CSV cell; `None` renders empty.
pub type Cell = Option<f64>;

pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

pub struct Report {
    pub command: &'static str,
    pub gates: Vec<Gate>,
    pub body: Value,
    pub table: Table,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.gates.iter().all(|g| g.pass)
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        for g in &self.gates {
            let _ = writeln!(s, "{}", g.line());
        }
        let _ = write!(
            s,
            "{}: {}",
            self.command,
            if self.passed() { "PASS" } else { "FAIL" }
        );
        s
    }

    fn json(&self, config: &ExperimentConfig) -> Result<String> {
        let doc = serde_json::json!({
            "version": VERSION,
            "command": self.command,
            "rng": ballwalk_core::walk::RNG_ALGORITHM,
            "config": config,
            "gates": self.gates,
            "pass": self.passed(),
            "report": self.body,
        });
        serde_json::to_string_pretty(&doc).map_err(|e| Error::Format(e.to_string()))
    }

    fn csv(&self, config: &ExperimentConfig) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# {VERSION} {}", self.command);
        let _ = writeln!(s, "# rng: {}", ballwalk_core::walk::RNG_ALGORITHM);
        for g in &self.gates {
            let _ = writeln!(s, "# gate: {}", g.line());
        }
        let _ = writeln!(s, "# config:");
        for line in config.to_toml().lines() {
            let _ = writeln!(s, "#   {line}");
        }
        let _ = writeln!(s, "{}", self.table.columns.join(","));
        for row in &self.table.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| c.map_or_else(String::new, |v| format!("{v:e}")))
                .collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }

    /// Writes `<command>.json` and `<command>.csv` under `dir`.
    pub fn write(&self, dir: &Path, config: &ExperimentConfig) -> Result<[PathBuf; 2]> {
        std::fs::create_dir_all(dir)?;
        let stem = self.command.replace('-', "_");
        let json = dir.join(format!("{stem}.json"));
        let csv = dir.join(format!("{stem}.csv"));
        std::fs::write(&json, self.json(config)?)?;
        std::fs::write(&csv, self.csv(config))?;
        Ok([json, csv])
    }
}

pub fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::Format(e.to_string()))
}
