//! Report rows and their JSON / CSV serializations.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimate::{Estimate, IdentityReport, Relation, Verdict};

use super::catalogue::anchor;
use super::config::SuiteName;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateOut {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl From<Estimate> for EstimateOut {
    fn from(e: Estimate) -> Self {
        let (ci_low, ci_high) = e.ci();
        EstimateOut {
            mean: e.mean,
            stderr: e.stderr,
            n: e.n,
            ci_low,
            ci_high,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub check_id: String,
    pub suite: SuiteName,
    pub anchor: String,
    pub inputs: String,
    pub left: EstimateOut,
    pub right: EstimateOut,
    pub difference: EstimateOut,
    pub relation: Relation,
    pub verdict: Verdict,
}

impl Row {
    pub fn new(check_id: &str, suite: SuiteName, inputs: impl Into<String>, r: &IdentityReport) -> Self {
        Row {
            check_id: check_id.to_string(),
            suite,
            anchor: anchor(check_id).unwrap_or("").to_string(),
            inputs: inputs.into(),
            left: r.left.into(),
            right: r.right.into(),
            difference: r.difference.into(),
            relation: r.relation,
            verdict: r.verdict,
        }
    }

    pub fn with_verdict(mut self, verdict: Verdict) -> Self {
        self.verdict = verdict;
        self
    }

    pub fn failed(&self) -> bool {
        self.verdict.is_failure()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub schema_version: u32,
    pub config_sha256: String,
    pub seed: u64,
    pub ci_level: f64,
    pub n_outer: usize,
    pub suites: Vec<SuiteName>,
    pub rows: Vec<Row>,
    pub failures: usize,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    pub fn failing_rows(&self) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(|r| r.failed())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record([
            "check_id", "suite", "inputs", "left", "right", "difference", "stderr", "ci_low",
            "ci_high", "relation", "verdict",
        ])
        .map_err(io)?;
        for r in &self.rows {
            w.write_record([
                r.check_id.clone(),
                r.suite.to_string(),
                r.inputs.clone(),
                num(r.left.mean),
                num(r.right.mean),
                num(r.difference.mean),
                num(r.difference.stderr),
                num(r.difference.ci_low),
                num(r.difference.ci_high),
                ser_name(&r.relation),
                ser_name(&r.verdict),
            ])
            .map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv is utf-8"))
    }

    /// Writes `report.json` and `report.csv` into `dir`, creating it.
    pub fn write(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        let io = |e: std::io::Error| Error::Io(format!("{}: {e}", dir.display()));
        std::fs::create_dir_all(dir).map_err(io)?;
        let json = dir.join("report.json");
        let csv = dir.join("report.csv");
        std::fs::write(&json, self.to_json() + "\n").map_err(io)?;
        std::fs::write(&csv, self.to_csv()?).map_err(io)?;
        Ok((json, csv))
    }
}

fn num(x: f64) -> String {
    format!("{x:.10e}")
}

fn ser_name<T: Serialize>(t: &T) -> String {
    serde_json::to_value(t)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}
