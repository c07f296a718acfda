// Copyright 2026 The capacitary Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Result bundle and its serialization: one CSV per table and a
//! `summary.txt` of `key = value` sections.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::config::ExperimentConfig;
use crate::{CliError, Command};

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => number(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<i64> for Cell {
    fn from(i: i64) -> Self {
        Cell::Int(i)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Text(b.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

/// Seventeen significant digits, enough to round-trip every `f64`.
/// Negative zero prints as zero.
pub fn number(x: f64) -> String {
    let x = x + 0.0;
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// CSV table written to `file` inside the output directory.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub file: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(file: impl Into<String>, header: &[&'static str]) -> Self {
        Self { file: file.into(), header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }
}

/// Named invariant compared against its tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// A failure contradicts a theorem rather than a numerical target.
    pub theorem_backed: bool,
}

/// Named `key = value` section of the summary.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub name: String,
    pub entries: Vec<(String, String)>,
}

impl Report {
    pub fn new(name: impl Into<String>) -> Self {
        Self { name: name.into(), entries: Vec::new() }
    }

    pub fn num(&mut self, key: impl Into<String>, value: f64) -> &mut Self {
        self.entries.push((key.into(), number(value)));
        self
    }

    pub fn text(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Self {
        self.entries.push((key.into(), value.to_string()));
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultBundle {
    pub out_dir: PathBuf,
    pub tables: Vec<Table>,
    pub reports: Vec<Report>,
    pub verdicts: Vec<Verdict>,
}

impl ResultBundle {
    /// `value ≤ tolerance`.
    pub fn below(&mut self, name: impl Into<String>, value: f64, tolerance: f64, theorem_backed: bool) {
        let passed = value <= tolerance;
        self.verdicts.push(Verdict { name: name.into(), value, tolerance, passed, theorem_backed });
    }

    /// `value ≥ −tolerance`.
    pub fn nonnegative(&mut self, name: impl Into<String>, value: f64, tolerance: f64, theorem_backed: bool) {
        let passed = value >= -tolerance;
        self.verdicts.push(Verdict { name: name.into(), value, tolerance, passed, theorem_backed });
    }

    pub fn holds(&mut self, name: impl Into<String>, ok: bool, theorem_backed: bool) {
        self.below(name, f64::from(u8::from(!ok)), 0.0, theorem_backed);
    }

    /// Appends an empty report section and returns it for filling.
    pub fn report(&mut self, name: impl Into<String>) -> &mut Report {
        self.reports.push(Report::new(name));
        self.reports.last_mut().expect("just pushed")
    }

    pub fn exit_code(&self) -> u8 {
        let failed = |theorem: bool| self.verdicts.iter().any(|v| !v.passed && v.theorem_backed == theorem);
        if failed(true) {
            2
        } else if failed(false) {
            3
        } else {
            0
        }
    }
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

/// Seconds since the epoch, or `SOURCE_DATE_EPOCH` when set.
fn timestamp() -> u64 {
    std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or_else(|| {
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
        })
}

pub fn summary(bundle: &ResultBundle, config: &ExperimentConfig, command: Command) -> String {
    let hex = config.experiment_hash();
    let mut s = String::new();
    let _ = writeln!(s, "[provenance]");
    let _ = writeln!(s, "version = {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, "command = {}", command.name());
    let _ = writeln!(s, "config_sha256 = {hex}");
    let _ = writeln!(s, "seed = {}", config.seed);
    let _ = writeln!(s, "timestamp_unix = {}", timestamp());
    for table in &bundle.tables {
        let _ = writeln!(s, "table = {}", table.file);
    }
    for report in &bundle.reports {
        let _ = writeln!(s, "\n[{}]", report.name);
        for (k, v) in &report.entries {
            let _ = writeln!(s, "{k} = {v}");
        }
    }
    let failed = bundle.verdicts.iter().filter(|v| !v.passed).count();
    let _ = writeln!(s, "\n[verdicts]");
    let _ = writeln!(s, "total = {}", bundle.verdicts.len());
    let _ = writeln!(s, "failed = {failed}");
    let _ = writeln!(s, "exit_code = {}", bundle.exit_code());
    for v in &bundle.verdicts {
        let _ = writeln!(
            s,
            "{} = {} value={} tolerance={}{}",
            v.name,
            if v.passed { "PASS" } else { "FAIL" },
            number(v.value),
            number(v.tolerance),
            if v.theorem_backed { " theorem" } else { "" }
        );
    }
    s
}

/// Writes every table and the summary into the output directory.
pub fn emit(bundle: &ResultBundle, config: &ExperimentConfig, command: Command) -> Result<(), CliError> {
    let dir = &bundle.out_dir;
    std::fs::create_dir_all(dir).map_err(io_error(dir))?;
    for table in &bundle.tables {
        let path = dir.join(&table.file);
        std::fs::write(&path, table.to_csv()).map_err(io_error(&path))?;
    }
    let path = dir.join("summary.txt");
    std::fs::write(&path, summary(bundle, config, command)).map_err(io_error(&path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip_with_seventeen_digits() {
        for x in [std::f64::consts::PI, 1.0 / 3.0, -2.5e-300, 0.0] {
            let s = number(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            assert_eq!(s.trim_start_matches('-').split('e').next().unwrap().len(), 18);
        }
    }

    #[test]
    fn exit_code_ranks_theorem_failures_first() {
        let mut b = ResultBundle::default();
        b.below("ok", 0.0, 1.0, true);
        assert_eq!(b.exit_code(), 0);
        b.below("target", 2.0, 1.0, false);
        assert_eq!(b.exit_code(), 3);
        b.nonnegative("theorem", -2.0, 1.0, true);
        assert_eq!(b.exit_code(), 2);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let mut t = Table::new("x.csv", &["a", "b"]);
        t.push(vec![1.0.into(), "flag".into()]);
        assert_eq!(t.to_csv(), "a,b\n1.0000000000000000e0,flag\n");
    }
}
