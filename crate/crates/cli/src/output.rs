// Copyright 2026 The qntk-lab Developers
// SPDX-License-Identifier: Apache-2.0

//! Deterministic CSV and JSON artifacts.

use std::fs;
use std::io;
use std::path::Path;

use qntk_core::Observable;
use serde::Serialize;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Shortest decimal that parses back to the same `f64`.
pub fn num(x: f64) -> String {
    if x == 0.0 || !x.is_finite() || (1e-5..1e16).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// CSV text with a provenance comment line and a header row.
#[derive(Debug, Clone)]
pub struct Csv {
    text: String,
    columns: usize,
}

impl Csv {
    pub fn new(config_hash: &str, header: &[&str]) -> Self {
        let mut text = format!("# config_sha256={config_hash} tool=qntk {TOOL_VERSION}\n");
        text.push_str(&header.join(","));
        text.push('\n');
        Self { text, columns: header.len() }
    }

    pub fn row(&mut self, cells: &[String]) {
        debug_assert_eq!(cells.len(), self.columns);
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn write(&self, path: &Path) -> io::Result<()> {
        fs::write(path, &self.text)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TermRecord {
    pub coeff: f64,
    pub pauli: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservableRecord {
    pub qubits: usize,
    pub target: f64,
    pub terms: Vec<TermRecord>,
    pub trace: f64,
    pub trace_squared: f64,
}

impl From<&Observable> for ObservableRecord {
    fn from(o: &Observable) -> Self {
        Self {
            qubits: o.qubits(),
            target: o.target(),
            terms: o.terms().iter().map(|(c, p)| TermRecord { coeff: *c, pauli: p.to_string() }).collect(),
            trace: o.trace_moment(1),
            trace_squared: o.trace_moment(2),
        }
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    text.push('\n');
    fs::write(path, text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.0, 1.0, -2.5, 1e-7, 6.826666666666667, 1.0 / 3.0, 1e20, -3.2e-300, 123456.789] {
            let s = num(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(num(0.25), "0.25");
        assert_eq!(num(1e-7), "1e-7");
    }

    #[test]
    fn csv_layout() {
        let mut c = Csv::new("abc", &["a", "b"]);
        c.row(&[num(1.0), num(0.5)]);
        let lines: Vec<&str> = c.as_str().lines().collect();
        assert!(lines[0].starts_with("# config_sha256=abc tool=qntk "));
        assert_eq!(lines[1], "a,b");
        assert_eq!(lines[2], "1,0.5");
    }
}
