//! Structured results: norm breakdowns, ratio statistics and convergence
//! tables, with JSON/CSV export.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormComponent {
    pub name: String,
    pub value: f64,
    /// Set when the value only bounds the true component from above.
    pub upper_bound: bool,
}

/// A norm as the sum of named components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub total: f64,
    pub components: Vec<NormComponent>,
    /// Quadrature or truncation error estimate for `total`, when known.
    pub error_estimate: Option<f64>,
    pub grid_hash: String,
    pub flags: Vec<String>,
}

impl NormReport {
    pub fn new(grid_hash: impl Into<String>) -> Self {
        Self { total: 0.0, components: Vec::new(), error_estimate: None, grid_hash: grid_hash.into(), flags: Vec::new() }
    }

    pub fn push(&mut self, name: impl Into<String>, value: f64, upper_bound: bool) {
        self.total += value;
        self.components.push(NormComponent { name: name.into(), value, upper_bound });
    }

    pub fn flag(&mut self, flag: impl Into<String>) {
        self.flags.push(flag.into());
    }

    pub fn component(&self, name: &str) -> Option<f64> {
        self.components.iter().find(|c| c.name == name).map(|c| c.value)
    }

    /// One CSV row per component plus a `total` row.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let err = |e: csv::Error| Error::Io(e.to_string());
        wr.write_record(["component", "value", "upper_bound", "error_estimate", "grid_hash"]).map_err(err)?;
        let est = self.error_estimate.map_or(String::new(), |e| format!("{e:e}"));
        for c in &self.components {
            wr.write_record([c.name.clone(), format!("{:e}", c.value), c.upper_bound.to_string(), est.clone(), self.grid_hash.clone()])
                .map_err(err)?;
        }
        let any_upper = self.components.iter().any(|c| c.upper_bound);
        wr.write_record(["total".to_string(), format!("{:e}", self.total), any_upper.to_string(), est, self.grid_hash.clone()])
            .map_err(err)?;
        wr.flush()?;
        Ok(())
    }
}

/// `numerator / denominator` for one member of a battery.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioEntry {
    pub label: String,
    pub numerator: f64,
    pub denominator: f64,
    pub ratio: f64,
    /// Ratio of the scale-homogeneous parts (seminorms), when meaningful.
    pub homogeneous_ratio: Option<f64>,
    pub degenerate: bool,
}

impl RatioEntry {
    /// Ratio with 0/0 (or a vanishing denominator) flagged as degenerate
    /// and reported as 0.
    pub fn new(label: impl Into<String>, numerator: f64, denominator: f64) -> Self {
        let degenerate = !(denominator.abs() > 1e-300) || !denominator.is_finite();
        let ratio = if degenerate { 0.0 } else { numerator / denominator };
        Self { label: label.into(), numerator, denominator, ratio, homogeneous_ratio: None, degenerate }
    }

    pub fn with_homogeneous(mut self, ratio: Option<f64>) -> Self {
        self.homogeneous_ratio = ratio;
        self
    }
}

/// Battery of ratios with summary statistics over non-degenerate entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub entries: Vec<RatioEntry>,
    pub max: f64,
    pub min: f64,
    pub mean: f64,
    pub degenerate_count: usize,
}

impl RatioReport {
    pub fn from_entries(entries: Vec<RatioEntry>) -> Self {
        let good: Vec<f64> = entries.iter().filter(|e| !e.degenerate).map(|e| e.ratio).collect();
        let degenerate_count = entries.len() - good.len();
        let (max, min, mean) = if good.is_empty() {
            (0.0, 0.0, 0.0)
        } else {
            (
                good.iter().cloned().fold(f64::MIN, f64::max),
                good.iter().cloned().fold(f64::MAX, f64::min),
                good.iter().sum::<f64>() / good.len() as f64,
            )
        };
        Self { entries, max, min, mean, degenerate_count }
    }

    /// Relative change of the maximum ratio against a finer run.
    pub fn drift(&self, finer: &RatioReport) -> f64 {
        if finer.max == 0.0 {
            return if self.max == 0.0 { 0.0 } else { f64::INFINITY };
        }
        (self.max - finer.max).abs() / finer.max.abs()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let err = |e: csv::Error| Error::Io(e.to_string());
        wr.write_record(["label", "numerator", "denominator", "ratio", "homogeneous_ratio", "degenerate"]).map_err(err)?;
        for e in &self.entries {
            wr.write_record([
                e.label.clone(),
                format!("{:e}", e.numerator),
                format!("{:e}", e.denominator),
                format!("{:e}", e.ratio),
                e.homogeneous_ratio.map_or(String::new(), |h| format!("{h:e}")),
                e.degenerate.to_string(),
            ])
            .map_err(err)?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Errors against a mesh parameter and the fitted log-log slope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub parameter: String,
    pub steps: Vec<f64>,
    pub errors: Vec<f64>,
    pub slope: f64,
}

impl ConvergenceTable {
    pub fn new(parameter: impl Into<String>, steps: Vec<f64>, errors: Vec<f64>) -> Self {
        let slope = fit_slope(&steps, &errors);
        Self { parameter: parameter.into(), steps, errors, slope }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let err = |e: csv::Error| Error::Io(e.to_string());
        wr.write_record([self.parameter.as_str(), "error"]).map_err(err)?;
        for (h, e) in self.steps.iter().zip(&self.errors) {
            wr.write_record([format!("{h:e}"), format!("{e:e}")]).map_err(err)?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Least-squares slope of `log e` against `log h`.
pub fn fit_slope(h: &[f64], e: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = h.iter().zip(e).filter(|(h, e)| **h > 0.0 && **e > 0.0).map(|(h, e)| (h.ln(), e.ln())).collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
