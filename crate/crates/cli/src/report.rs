//! Experiment reports: power-law fits, named checks, and serialization
//! to `report.json` plus `data.csv`.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use serde::Serialize;

/// Least-squares power-law fit `y = prefactor * x^exponent`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PowerFit {
    pub exponent: f64,
    pub prefactor: f64,
    /// Root-mean-square residual of `ln y` about the fitted line.
    pub residual: f64,
}

/// Fits `y = C * x^p` by linear least squares in log-log coordinates.
/// Requires at least three points with strictly positive coordinates.
pub fn fit_powerlaw(points: &[(f64, f64)]) -> Result<PowerFit> {
    if points.len() < 3 {
        bail!("power-law fit needs at least 3 points, got {}", points.len());
    }
    if points.iter().any(|&(x, y)| !(x > 0.0) || !(y > 0.0)) {
        bail!("power-law fit needs strictly positive coordinates");
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx < 1e-12 {
        bail!("power-law fit is degenerate: x values span no range");
    }
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let ss: f64 = logs
        .iter()
        .map(|p| (p.1 - (intercept + exponent * p.0)).powi(2))
        .sum();
    Ok(PowerFit {
        exponent,
        prefactor: intercept.exp(),
        residual: (ss / n).sqrt(),
    })
}

/// One named pass/fail assertion inside a report.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub tolerance: String,
    pub observed: String,
}

/// Accumulates the results of one experiment and writes them out.
#[derive(Debug)]
pub struct ExperimentReport {
    name: String,
    config: serde_json::Value,
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
    fit: Option<PowerFit>,
    named_fits: BTreeMap<String, PowerFit>,
    comparisons: BTreeMap<String, f64>,
    checks: Vec<Check>,
    started: Instant,
}

impl ExperimentReport {
    pub fn new(name: &str, config: serde_json::Value, columns: &[&str]) -> Self {
        ExperimentReport {
            name: name.to_string(),
            config,
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            fit: None,
            named_fits: BTreeMap::new(),
            comparisons: BTreeMap::new(),
            checks: Vec::new(),
            started: Instant::now(),
        }
    }

    /// Appends one data row; the length must match the column list.
    pub fn row(&mut self, values: &[f64]) {
        assert_eq!(
            values.len(),
            self.columns.len(),
            "report {} row width mismatch",
            self.name
        );
        self.rows.push(values.to_vec());
    }

    /// Records a named pass/fail check and returns whether it passed.
    pub fn check(&mut self, name: &str, passed: bool, tolerance: String, observed: String) -> bool {
        self.checks.push(Check {
            name: name.to_string(),
            passed,
            tolerance,
            observed,
        });
        passed
    }

    /// Sets the primary power-law fit shown in the report header.
    pub fn set_fit(&mut self, fit: PowerFit) {
        self.fit = Some(fit);
    }

    /// Records an additional named fit.
    pub fn add_fit(&mut self, name: &str, fit: PowerFit) {
        self.named_fits.insert(name.to_string(), fit);
    }

    /// Records a reference value reported alongside measurements
    /// (for comparison only; never asserted).
    pub fn compare(&mut self, name: &str, value: f64) {
        self.comparisons.insert(name.to_string(), value);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn verdict(&self) -> &'static str {
        if self.passed() {
            "PASS"
        } else {
            "FAIL"
        }
    }

    pub fn checks(&self) -> &[Check] {
        &self.checks
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn runtime_s(&self) -> f64 {
        self.started.elapsed().as_secs_f64()
    }

    /// Serializes the full report, including a `points` array that pairs
    /// each row with the column names.
    pub fn to_json(&self) -> serde_json::Value {
        let points: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: serde_json::Map<String, serde_json::Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| (c.clone(), serde_json::json!(v)))
                    .collect();
                serde_json::Value::Object(obj)
            })
            .collect();
        serde_json::json!({
            "name": self.name,
            "config": self.config,
            "points": points,
            "fit": self.fit,
            "named_fits": self.named_fits,
            "comparisons": self.comparisons,
            "checks": self.checks,
            "verdict": self.verdict(),
            "runtime_s": self.runtime_s(),
        })
    }

    /// Writes `report.json` and `data.csv` into `dir`, creating it.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("creating output dir {}", dir.display()))?;
        let json = serde_json::to_string_pretty(&self.to_json())?;
        std::fs::write(dir.join("report.json"), json + "\n")?;
        let mut csv = self.columns.join(",") + "\n";
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|v| format!("{v:.12e}")).collect();
            csv.push_str(&line.join(","));
            csv.push('\n');
        }
        std::fs::write(dir.join("data.csv"), csv)?;
        Ok(())
    }

    /// One-line console summary: verdict, check count, runtime.
    pub fn summary_line(&self) -> String {
        let failed: Vec<&str> = self
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect();
        let detail = if failed.is_empty() {
            format!("{} checks", self.checks.len())
        } else {
            format!("failed: {}", failed.join("; "))
        };
        format!(
            "{}: {} ({}, {:.1} s)",
            self.name,
            self.verdict(),
            detail,
            self.runtime_s()
        )
    }
}
