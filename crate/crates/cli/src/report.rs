//! Report emitters. Data sections never carry run metadata, so identical
//! configs give byte-identical files.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::RunConfig;

/// Top-level JSON report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub config: RunConfig,
    pub results: Value,
    pub diagnostics: Vec<String>,
    pub versions: BTreeMap<String, String>,
}

pub fn versions() -> BTreeMap<String, String> {
    BTreeMap::from([
        ("holling-bt".to_string(), holling_bt::VERSION.to_string()),
        (
            "holling-bt-cli".to_string(),
            env!("CARGO_PKG_VERSION").to_string(),
        ),
    ])
}

impl Report {
    pub fn new(
        command: &str,
        config: &RunConfig,
        results: Value,
        diagnostics: Vec<String>,
    ) -> Self {
        Report {
            command: command.to_string(),
            config: config.clone(),
            results,
            diagnostics,
            versions: versions(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => fmt17(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

/// One CSV file: header row plus data rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub file: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(file: impl Into<String>, header: Vec<&'static str>) -> Self {
        Table {
            file: file.into(),
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// CSV text preceded by `#` lines holding the command, the resolved
    /// config and the versions.
    pub fn to_csv(&self, command: &str, config: &RunConfig) -> String {
        let mut out = provenance(command, config, "# ");
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::render))
                .expect("in-memory write");
        }
        out.push_str(&String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8"));
        out
    }
}

/// Header lines carrying everything needed to rerun the command.
pub fn provenance(command: &str, config: &RunConfig, prefix: &str) -> String {
    let cfg = serde_json::to_string(config).expect("config serialises");
    let ver = serde_json::to_string(&versions()).expect("versions serialise");
    format!("{prefix}command: {command}\n{prefix}config: {cfg}\n{prefix}versions: {ver}\n")
}

/// 17 significant digits: enough to round-trip any `f64`.
pub fn fmt17(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

/// 10 significant digits for human-readable summaries.
pub fn fmt10(v: f64) -> String {
    if !v.is_finite() || v == 0.0 {
        return v.to_string();
    }
    let mag = v.abs().log10().floor() as i32;
    if (-4..10).contains(&mag) {
        format!("{v:.*}", (9 - mag) as usize)
    } else {
        format!("{v:.9e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [0.1715598183, 1.0 / 3.0, -2.82, 3.559954288e6, 1e-300, 0.0] {
            let s = fmt17(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
            let digits = s
                .split('e')
                .next()
                .unwrap()
                .chars()
                .filter(|c| c.is_ascii_digit())
                .count();
            assert_eq!(digits, 17, "{s}");
        }
    }

    #[test]
    fn ten_digit_summaries() {
        assert_eq!(fmt10(0.17155981839102543), "0.1715598184");
        assert_eq!(fmt10(0.030701492171582353), "0.03070149217");
        assert_eq!(fmt10(3559954.288123), "3559954.288");
        assert_eq!(fmt10(-0.5922764628123), "-0.5922764628");
    }
}
