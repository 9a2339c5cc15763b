//! Tables, row execution and output files.
//!
//! Floats in CSV output are written as `{:.16e}`: 17 significant digits in
//! scientific notation, enough to round-trip every `f64`. JSON output uses
//! serde_json's shortest round-trip representation. Both are deterministic,
//! so a fixed seed gives byte-identical result files. Non-finite values are
//! written as `nan`, `inf`, `-inf` in CSV and `null` in JSON.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use qtorus::algebra::QtElement;
use qtorus::error::Error;
use qtorus::random::split_seed;

use crate::config::{ConfigError, ExperimentConfig, Format};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    /// A library error caused by the requested parameters.
    #[error("invalid parameters: {0}")]
    Parameters(Error),
    #[error("cannot write {}: {source}", path.display())]
    Output { path: PathBuf, source: std::io::Error },
}

impl CliError {
    /// 2 for everything raised before or instead of a result.
    pub fn exit_code(&self) -> u8 {
        2
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

macro_rules! int_cell {
    ($($t:ty),*) => {$(
        impl From<$t> for Cell {
            fn from(v: $t) -> Self {
                Cell::Int(v as i64)
            }
        }
    )*};
}
int_cell!(u32, u64, usize, i64);

pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => format_float(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) => json!(v),
            Cell::Int(v) => json!(v),
            Cell::Bool(v) => json!(v),
            Cell::Text(s) => json!(s),
            Cell::Empty => Value::Null,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv)).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }

    /// Rows as objects keyed by column name.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let m: Map<String, Value> = self.header.iter().cloned().zip(row.iter().map(Cell::json)).collect();
                    Value::Object(m)
                })
                .collect(),
        )
    }
}

/// One asserted property of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, pass: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }

    /// `worst ≤ tol`, reported with both numbers.
    pub fn at_most(name: &str, worst: f64, tol: f64) -> Self {
        Check::new(name, worst <= tol, format!("max {} (limit {})", format_float(worst), format_float(tol)))
    }

    /// `worst ≥ floor`.
    pub fn at_least(name: &str, worst: f64, floor: f64) -> Self {
        Check::new(name, worst >= floor, format!("min {} (floor {})", format_float(worst), format_float(floor)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RowStatus {
    Ok,
    /// Over the compute budget; the run continues.
    Aborted,
    /// A numerical failure such as non-convergent quadrature.
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowMeta {
    pub index: usize,
    pub seed: u64,
    pub wall_seconds: f64,
    pub status: RowStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

pub struct Rows<T> {
    pub values: Vec<Option<T>>,
    pub meta: Vec<RowMeta>,
}

impl<T> Rows<T> {
    pub fn ok(&self) -> impl Iterator<Item = &T> {
        self.values.iter().flatten()
    }

    pub fn failed(&self) -> usize {
        self.meta.iter().filter(|m| m.status == RowStatus::Failed).count()
    }
}

/// Runs `count` rows on the work pool. Row `i` receives `split_seed(seed, i)`;
/// results come back in row order. Parameter errors abort the whole run,
/// budget errors abort only their row.
pub fn run_rows<T, F>(count: usize, seed: u64, f: F) -> Result<Rows<T>, CliError>
where
    T: Send,
    F: Fn(usize, u64) -> qtorus::error::Result<T> + Sync,
{
    let results: Vec<(qtorus::error::Result<T>, RowMeta)> = (0..count)
        .into_par_iter()
        .map(|i| {
            let row_seed = split_seed(seed, i as u64);
            let start = Instant::now();
            let out = f(i, row_seed);
            let meta = RowMeta {
                index: i,
                seed: row_seed,
                wall_seconds: start.elapsed().as_secs_f64(),
                status: RowStatus::Ok,
                message: None,
            };
            (out, meta)
        })
        .collect();
    let mut values = Vec::with_capacity(count);
    let mut meta = Vec::with_capacity(count);
    for (out, mut m) in results {
        match out {
            Ok(v) => values.push(Some(v)),
            Err(e) => {
                m.status = match e {
                    Error::Budget { .. } | Error::TooLarge { .. } => RowStatus::Aborted,
                    Error::Quadrature { .. } | Error::Tail { .. } | Error::PathMismatch { .. } | Error::NotHermitian { .. } => {
                        RowStatus::Failed
                    }
                    other => return Err(CliError::Parameters(other)),
                };
                m.message = Some(e.to_string());
                values.push(None);
            }
        }
        meta.push(m);
    }
    Ok(Rows { values, meta })
}

/// Hex SHA-256 of the element's JSON wire form.
pub fn input_hash(x: &QtElement) -> String {
    hex::encode(Sha256::digest(x.to_json().as_bytes()))
}

/// Everything a subcommand produced.
pub struct Report {
    pub command: &'static str,
    /// Resolved parameters, defaults included.
    pub parameters: Value,
    pub table: Table,
    /// Structured document used for JSON output in place of the table.
    pub document: Option<Value>,
    pub default_format: Format,
    pub checks: Vec<Check>,
    pub rows: Vec<RowMeta>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Adds the standing check that no row failed numerically.
    pub fn with_row_check(mut self) -> Self {
        let failed: Vec<String> = self
            .rows
            .iter()
            .filter(|m| m.status == RowStatus::Failed)
            .map(|m| format!("row {}: {}", m.index, m.message.as_deref().unwrap_or("")))
            .collect();
        let detail = if failed.is_empty() {
            format!("{} rows", self.rows.len())
        } else {
            failed.join("; ")
        };
        self.checks.push(Check::new("rows completed", failed.is_empty(), detail));
        self
    }

    fn body(&self, format: Format) -> Vec<u8> {
        match format {
            Format::Csv => self.table.to_csv(),
            Format::Json => {
                let doc = self.document.clone().unwrap_or_else(|| self.table.to_json());
                let mut text = serde_json::to_vec_pretty(&doc).expect("serializable");
                text.push(b'\n');
                text
            }
        }
    }

    pub fn manifest(&self, config: &ExperimentConfig, format: Format, output: &str, wall_seconds: f64) -> Value {
        json!({
            "command": self.command,
            "version": qtorus::VERSION,
            "config": config.echo(),
            "parameters": self.parameters,
            "format": format.extension(),
            "float_format": "csv: {:.16e} (17 significant digits); json: shortest round-trip",
            "output": output,
            "rows": self.rows,
            "checks": self.checks,
            "passed": self.passed(),
            "wall_seconds": wall_seconds,
        })
    }

    /// Writes `<command>.<ext>` and `manifest.json` into `out`, or the result
    /// body to stdout when `out` is `None`. Checks go to stderr either way.
    pub fn emit(&self, config: &ExperimentConfig, out: Option<&Path>, wall_seconds: f64) -> Result<(), CliError> {
        let format = config.format_or(self.default_format);
        let body = self.body(format);
        match out {
            Some(dir) => {
                let io = |path: &Path| {
                    let path = path.to_path_buf();
                    move |source| CliError::Output { path, source }
                };
                std::fs::create_dir_all(dir).map_err(io(dir))?;
                let name = format!("{}.{}", self.command, format.extension());
                let path = dir.join(&name);
                std::fs::write(&path, &body).map_err(io(&path))?;
                let manifest = self.manifest(config, format, &name, wall_seconds);
                let mpath = dir.join("manifest.json");
                let mut text = serde_json::to_vec_pretty(&manifest).expect("serializable");
                text.push(b'\n');
                std::fs::write(&mpath, text).map_err(io(&mpath))?;
            }
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(&body).map_err(|source| CliError::Output {
                    path: PathBuf::from("<stdout>"),
                    source,
                })?;
            }
        }
        for c in &self.checks {
            let verdict = if c.pass { "PASS" } else { "FAIL" };
            eprintln!("check {verdict} {}: {}", c.name, c.detail);
        }
        let aborted = self.rows.iter().filter(|m| m.status == RowStatus::Aborted).count();
        if aborted > 0 {
            eprintln!("{aborted} row(s) aborted over the compute budget");
        }
        Ok(())
    }
}
