use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

use super::config::ExperimentConfig;
use crate::error::{Error, Result};

/// Outcome class of a run, mapped to the process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    /// A computed quantity missed its declared tolerance.
    CheckFailed,
    /// A computation raised an error; results so far are kept.
    NumericalFailure,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Pass => 0,
            Status::NumericalFailure => 3,
            Status::CheckFailed => 4,
        }
    }
}

/// Exit status for configuration and usage errors.
pub const EXIT_CONFIG: u8 = 2;
/// Exit status when report files cannot be written.
pub const EXIT_IO: u8 = 1;

/// One quantity compared against a threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    /// `"below"`: pass when `value < tolerance`; `"above"`: when `value > tolerance`.
    pub sense: &'static str,
    pub pass: bool,
}

/// A columnar table written as CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Table {
        Table {
            name: name.to_string(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: &[f64]) {
        self.rows.push(row.iter().map(|v| v.to_string()).collect());
    }

    pub fn push_cells(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Config(format!("csv: {e}"));
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::Config(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Machine-readable record of a run.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub kind: &'static str,
    pub config_hash: String,
    pub seed: u64,
    /// The effective configuration, knobs and tolerances included.
    pub config: ExperimentConfig,
    pub results: Map<String, Value>,
    pub checks: Vec<Check>,
    pub tables: Vec<String>,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub runtime_seconds: f64,
}

impl Report {
    pub fn new(cfg: &ExperimentConfig) -> Report {
        Report {
            tool: "fingap",
            version: env!("CARGO_PKG_VERSION"),
            kind: cfg.kind.name(),
            config_hash: cfg.hash(),
            seed: cfg.seed,
            config: cfg.clone(),
            results: Map::new(),
            checks: Vec::new(),
            tables: Vec::new(),
            status: Status::Pass,
            error: None,
            runtime_seconds: 0.0,
        }
    }

    pub fn put<T: Serialize>(&mut self, key: &str, v: T) {
        let v = serde_json::to_value(v).unwrap_or(Value::Null);
        self.results.insert(key.to_string(), v);
    }

    pub fn below(&mut self, name: &str, value: f64, tolerance: f64) {
        self.check(name, value, tolerance, "below", value < tolerance);
    }

    pub fn above(&mut self, name: &str, value: f64, tolerance: f64) {
        self.check(name, value, tolerance, "above", value > tolerance);
    }

    fn check(&mut self, name: &str, value: f64, tolerance: f64, sense: &'static str, pass: bool) {
        self.checks.push(Check {
            name: name.to_string(),
            value,
            tolerance,
            sense,
            pass,
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// A finished run: report plus tables.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Report,
    pub tables: Vec<Table>,
}

impl Outcome {
    pub fn status(&self) -> Status {
        self.report.status
    }

    /// Writes `<stem>.json` and `<stem>_<table>.csv` into `dir`; returns
    /// the paths written.
    pub fn write(&self, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let stem = self.report.config.stem();
        let mut paths = Vec::new();
        for t in &self.tables {
            let p = dir.join(format!("{stem}_{}.csv", t.name));
            let text = t
                .to_csv()
                .map_err(|e| std::io::Error::other(e.to_string()))?;
            std::fs::write(&p, text)?;
            paths.push(p);
        }
        let p = dir.join(format!("{stem}.json"));
        let json = serde_json::to_string_pretty(&self.report).map_err(std::io::Error::other)?;
        std::fs::write(&p, json + "\n")?;
        paths.push(p);
        Ok(paths)
    }
}
