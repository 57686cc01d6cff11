//! Scan containers: estimates over a list of times plus an optional
//! fitted log-log slope.

use serde::{Deserialize, Serialize};

/// One scan point: estimate of some t-dependent quantity with its Monte
/// Carlo standard error and sample count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub t: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub n: u64,
}

/// Weighted log-log regression of estimates against t.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    /// Fitted slope of `ln(estimate)` against `ln t`.
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    /// 95% confidence interval for the slope.
    pub ci95: (f64, f64),
    /// Weighted coefficient of determination.
    pub r_squared: f64,
    /// Points entering the fit (nonpositive estimates are dropped).
    pub n_used: usize,
}

/// A labelled series of scan rows, optionally carrying a slope fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub label: String,
    pub rows: Vec<ScanRow>,
    pub fit: Option<ExponentFit>,
}

impl ScanResult {
    pub fn new(label: impl Into<String>, rows: Vec<ScanRow>) -> Self {
        ScanResult { label: label.into(), rows, fit: None }
    }

    /// Render as CSV with header `t,estimate,stderr,n`.
    ///
    /// Floats use Rust's shortest round-trip formatting, so equal inputs
    /// always produce byte-identical output.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,estimate,stderr,n\n");
        for row in &self.rows {
            out.push_str(&format!("{},{},{},{}\n", row.t, row.estimate, row.stderr, row.n));
        }
        out
    }
}
