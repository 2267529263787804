use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;

use crate::error::CliError;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    /// value ≤ threshold
    Max,
    /// value ≥ threshold
    Min,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: Bound,
    pub threshold: f64,
    pub pass: bool,
}

/// Columnar series written as one CSV file.
#[derive(Debug, Clone)]
pub struct PlotData {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub schema: u32,
    pub experiment: String,
    pub params: BTreeMap<String, serde_json::Value>,
    pub checks: Vec<Check>,
    pub estimates: BTreeMap<String, f64>,
    pub pass: bool,
    #[serde(skip)]
    pub wall_time: Duration,
    #[serde(skip)]
    pub plots: Vec<PlotData>,
}

impl ExperimentReport {
    pub fn new(experiment: &str) -> Self {
        Self {
            schema: SCHEMA,
            experiment: experiment.to_string(),
            params: BTreeMap::new(),
            checks: Vec::new(),
            estimates: BTreeMap::new(),
            pass: true,
            wall_time: Duration::ZERO,
            plots: Vec::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.params.insert(key.to_string(), serde_json::to_value(value).unwrap_or(serde_json::Value::Null));
        self
    }

    pub fn estimate(&mut self, key: &str, value: f64) -> &mut Self {
        self.estimates.insert(key.to_string(), value);
        self
    }

    /// NaN never passes.
    pub fn check_max(&mut self, name: &str, value: f64, threshold: f64) -> &mut Self {
        self.push(name, value, Bound::Max, threshold, value <= threshold)
    }

    pub fn check_min(&mut self, name: &str, value: f64, threshold: f64) -> &mut Self {
        self.push(name, value, Bound::Min, threshold, value >= threshold)
    }

    /// Boolean check stored as 1/0 against a minimum of 1.
    pub fn check_true(&mut self, name: &str, ok: bool) -> &mut Self {
        self.check_min(name, if ok { 1.0 } else { 0.0 }, 1.0)
    }

    fn push(&mut self, name: &str, value: f64, bound: Bound, threshold: f64, pass: bool) -> &mut Self {
        self.checks.push(Check { name: name.to_string(), value, bound, threshold, pass });
        self.pass = self.checks.iter().all(|c| c.pass);
        self
    }

    pub fn plot(&mut self, name: &str, header: &[&str], rows: Vec<Vec<f64>>) -> &mut Self {
        self.plots.push(PlotData { name: name.to_string(), header: header.iter().map(|s| s.to_string()).collect(), rows });
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is plain data")
    }

    pub fn summary(&self) -> String {
        let failed: Vec<&str> = self.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
        let verdict = if self.pass { "PASS".to_string() } else { format!("FAIL ({})", failed.join(", ")) };
        format!("{}: {verdict} in {:.2}s", self.experiment, self.wall_time.as_secs_f64())
    }
}

/// One CSV per non-empty series, named `<experiment>_<series>.csv`; empty series are skipped with a warning.
pub fn emit_plotdata(report: &ExperimentReport, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for plot in &report.plots {
        if plot.rows.is_empty() {
            eprintln!("warning: series '{}' is empty, no file written", plot.name);
            continue;
        }
        let path = dir.join(format!("{}_{}.csv", report.experiment, plot.name));
        let mut w = csv::Writer::from_path(&path).map_err(|e| CliError::Io(e.into()))?;
        w.write_record(&plot.header).map_err(|e| CliError::Io(e.into()))?;
        for row in &plot.rows {
            w.write_record(row.iter().map(|x| format!("{x:.17e}"))).map_err(|e| CliError::Io(e.into()))?;
        }
        w.flush()?;
        written.push(path);
    }
    Ok(written)
}

pub fn write_report(report: &ExperimentReport, path: Option<&Path>) -> Result<(), CliError> {
    let json = report.to_json();
    match path {
        Some(p) => std::fs::write(p, json + "\n")?,
        None => {
            let mut out = std::io::stdout().lock();
            writeln!(out, "{json}")?;
        }
    }
    Ok(())
}
