//! Configuration, sweeps, lemma batteries and report emission behind the `cgo-stab` CLI.

mod commands;
mod config;
mod lemmas;
mod stability;

pub use commands::{run_cgo, run_forward, run_reconstruct};
pub use config::{gamma_limit, Config, PotentialSpec, DEFAULT_CONFIG};
pub use lemmas::{lemma1_grid, max_resolved_lambda, run_lemma_suite, Lemma};
pub use stability::{run_stability_sweep, NormVariant, StabilityReport, StabilityRow};

use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::DiskGrid;

/// Version tag written as the first line of every CSV.
pub const CSV_VERSION: &str = "v1";

/// One CSV cell. Floats are written in shortest round-trip form, so equal bits
/// give equal bytes.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    F(f64),
    I(i64),
    S(String),
    B(bool),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::F(x) => format!("{x:e}"),
            Cell::I(x) => x.to_string(),
            Cell::S(s) => s.clone(),
            Cell::B(b) => b.to_string(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::F(x)
    }
}
impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::I(x as i64)
    }
}
impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::B(b)
    }
}
impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::S(s.to_string())
    }
}
impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::S(s)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: vec![] }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width for table {}", self.name);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Float column by name; non-float cells come back as NaN.
    pub fn floats(&self, name: &str) -> Vec<f64> {
        let Some(k) = self.column(name) else { return vec![] };
        self.rows
            .iter()
            .map(|r| match &r[k] {
                Cell::F(x) => *x,
                Cell::I(x) => *x as f64,
                _ => f64::NAN,
            })
            .collect()
    }

    /// CSV text with the `# cgo-stab v1 <subcommand>` header line.
    pub fn to_csv(&self, subcommand: &str) -> Result<String> {
        let mut w = csv::Writer::from_writer(vec![]);
        let io = |e: csv::Error| Error::InvalidArgument(format!("csv: {e}"));
        w.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(io)?;
        }
        let body = w.into_inner().map_err(|e| Error::InvalidArgument(format!("csv: {e}")))?;
        let mut out = format!("# cgo-stab {CSV_VERSION} {subcommand}\n");
        out.push_str(&String::from_utf8(body).expect("csv output is utf-8"));
        Ok(out)
    }
}

/// A pass/fail verdict with the number it was decided on.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub threshold: f64,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, measured: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, measured, threshold, detail: detail.into() }
    }

    /// `measured ≤ threshold`.
    pub fn at_most(name: impl Into<String>, measured: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Self::new(name, measured <= threshold, measured, threshold, detail)
    }
}

/// Output of one subcommand: CSV tables, checks and JSON metadata.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub subcommand: String,
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
    pub metadata: BTreeMap<String, serde_json::Value>,
}

impl Report {
    pub fn new(subcommand: &str) -> Self {
        Self { subcommand: subcommand.into(), tables: vec![], checks: vec![], metadata: BTreeMap::new() }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn meta(&mut self, key: &str, value: impl Serialize) {
        self.metadata.insert(key.into(), serde_json::to_value(value).expect("metadata serializes"));
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Writes `<name>.csv` per table and `<subcommand>.json`; returns the paths.
    pub fn write(&self, dir: &Path, config: &Config, seed: u64) -> Result<Vec<std::path::PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = vec![];
        for t in &self.tables {
            let path = dir.join(format!("{}.csv", t.name));
            std::fs::write(&path, t.to_csv(&self.subcommand)?)?;
            written.push(path);
        }
        let json = serde_json::json!({
            "format": format!("cgo-stab {CSV_VERSION}"),
            "subcommand": self.subcommand,
            "seed": seed,
            "config": config.effective(),
            "passed": self.passed(),
            "checks": self.checks,
            "metadata": self.metadata,
            "tables": self.tables.iter().map(|t| &t.name).collect::<Vec<_>>(),
        });
        let path = dir.join(format!("{}.json", self.subcommand));
        std::fs::write(&path, serde_json::to_string_pretty(&json)? + "\n")?;
        written.push(path);
        Ok(written)
    }

    /// One line per check.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(s, "{tag} {}: {:.4e} vs {:.4e} {}", c.name, c.measured, c.threshold, c.detail);
        }
        s
    }
}

/// Grid columns attached to every emitted row.
pub(crate) fn grid_cells(grid: &DiskGrid) -> [Cell; 3] {
    [grid.radius().into(), grid.n_radial().into(), grid.n_angular().into()]
}

/// Runs `f` on a dedicated pool of `threads` workers (0: rayon's default).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_versioned_header() {
        let mut t = Table::new("demo", &["a", "b", "note"]);
        t.push(vec![0.1.into(), 3usize.into(), "x, y".into()]);
        let s = t.to_csv("verify").unwrap();
        assert_eq!(s, "# cgo-stab v1 verify\na,b,note\n1e-1,3,\"x, y\"\n");
        assert_eq!(t.floats("a"), vec![0.1]);
    }

    #[test]
    fn slope_of_power_law() {
        let x = [1.0, 2.0, 4.0, 8.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(-0.5)).collect();
        assert!((loglog_slope(&x, &y) + 0.5).abs() < 1e-12);
    }
}
