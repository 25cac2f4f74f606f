//! Statistics over ensembles of scalar observables: ECDF, normal and
//! Weibull maximum-likelihood fits, Kolmogorov-Smirnov tests, moment
//! summaries on the Pearson (β1, β2) plane and bootstrap clouds.
//!
//! Central moments use the population convention (divisor `n`) throughout.

mod bootstrap;
mod ecdf;
mod fit;
mod ks;
mod moments;
mod qq;

pub use bootstrap::{bootstrap_cloud, BootstrapCloud};
pub use ecdf::ecdf_eval;
pub use fit::{fit_normal, fit_weibull, Distribution, Family, FitResult};
pub use ks::{kolmogorov_survival, ks_statistic, ks_test, KsMode, KsModeKind, KsOutcome};
pub use moments::{moment_summary, weibull_locus, MomentSummary};
pub use qq::qq_points;

use crate::error::{Error, Result};

/// A labelled set of finite observations.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    values: Vec<f64>,
    label: String,
}

impl Sample {
    pub fn new(values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("sample contains non-finite value {bad}")));
        }
        Ok(Self {
            values,
            label: label.into(),
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub(crate) fn sorted_values(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.sort_by(f64::total_cmp);
        v
    }

    /// Reads a one-column CSV: a header line, then one value per line.
    pub fn read_csv(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut values = Vec::new();
        for (idx, line) in text.lines().enumerate().skip(1) {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let v: f64 = line
                .parse()
                .map_err(|_| Error::parse(path, idx + 1, format!("invalid value `{line}`")))?;
            if !v.is_finite() {
                return Err(Error::parse(path, idx + 1, format!("non-finite value `{line}`")));
            }
            values.push(v);
        }
        let label = path.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
        Self::new(values, label)
    }

    /// True when at least two values differ.
    pub fn has_spread(&self) -> bool {
        self.values.iter().any(|&v| v != self.values[0])
    }
}
