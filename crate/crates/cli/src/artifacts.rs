//! Deterministic artifact writing.
//!
//! Every value is formatted with Rust's shortest-roundtrip float
//! rendering and '.' decimals, rows end with '\n', headers are
//! mandatory, and nothing time- or platform-dependent enters a file, so
//! a rerun with the same scenario and seed is byte-identical.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Check {
    pub id: String,
    /// Claim group the check verifies; drives report grouping.
    pub claim: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(
        id: &str,
        claim: &str,
        value: f64,
        bound: Option<f64>,
        pass: bool,
        detail: String,
    ) -> Self {
        Check {
            id: id.to_string(),
            claim: claim.to_string(),
            value,
            bound,
            pass,
            detail,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Summary {
    pub scenario: String,
    pub suite: String,
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl Summary {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// A CSV table under construction; values render through `Display`.
pub struct Csv {
    buf: String,
    columns: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut buf = String::new();
        buf.push_str(&header.join(","));
        buf.push('\n');
        Csv {
            buf,
            columns: header.len(),
        }
    }

    pub fn row(&mut self, cells: &[String]) {
        assert_eq!(cells.len(), self.columns, "csv row width");
        let _ = writeln!(self.buf, "{}", cells.join(","));
    }

    pub fn write(self, path: &Path) -> Result<()> {
        std::fs::write(path, self.buf)
            .with_context(|| format!("writing {}", path.display()))
    }
}

pub fn cell<T: std::fmt::Display>(v: T) -> String {
    v.to_string()
}

pub fn cell_opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .with_context(|| format!("serializing {}", path.display()))?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
