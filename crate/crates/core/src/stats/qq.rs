use super::fit::FitResult;
use super::Sample;
use crate::error::{Error, Result};

/// `(theoretical, empirical)` quantile pairs; order statistic `i` (1-based)
/// is matched with the fitted quantile at `(i - 0.5) / n`.
pub fn qq_points(sample: &Sample, fit: &FitResult) -> Result<Vec<(f64, f64)>> {
    if !fit.converged {
        return Err(Error::Domain("QQ points need a converged fit".into()));
    }
    if sample.len() < 2 {
        return Err(Error::DegenerateSample);
    }
    let n = sample.len() as f64;
    Ok(sample
        .sorted_values()
        .into_iter()
        .enumerate()
        .map(|(i, x)| (fit.law.quantile((i as f64 + 0.5) / n), x))
        .collect())
}
