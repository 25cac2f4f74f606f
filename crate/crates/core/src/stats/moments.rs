use statrs::function::gamma::gamma;

use super::Sample;
use crate::error::{Error, Result};

/// Population moments of a sample and its Pearson-plane coordinates.
///
/// `kurtosis` is the non-excess β2 = m4/m2² (3 for a normal law) and
/// `beta1` is the squared skewness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSummary {
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub kurtosis: f64,
    pub beta1: f64,
    pub beta2: f64,
}

impl MomentSummary {
    pub fn pearson_point(&self) -> (f64, f64) {
        (self.beta1, self.beta2)
    }

    fn from_central(mean: f64, m2: f64, m3: f64, m4: f64) -> Self {
        let skewness = m3 / m2.powf(1.5);
        let beta1 = skewness * skewness;
        // β2 ≥ β1 + 1 holds for every distribution, with equality for
        // two-point laws; rounding can land those a few ulps below.
        let beta2 = (m4 / (m2 * m2)).max(beta1 + 1.0);
        Self {
            mean,
            variance: m2,
            skewness,
            kurtosis: beta2,
            beta1,
            beta2,
        }
    }
}

pub fn moment_summary(sample: &Sample) -> Result<MomentSummary> {
    if sample.len() < 2 || !sample.has_spread() {
        return Err(Error::DegenerateSample);
    }
    Ok(summarize(sample.values()))
}

/// Moments of a slice known to hold at least two distinct values.
pub(crate) fn summarize(values: &[f64]) -> MomentSummary {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in values {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    MomentSummary::from_central(mean, m2 / n, m3 / n, m4 / n)
}

/// (β1, β2) of a Weibull law with shape `k`, from raw moments Γ(1 + r/k).
pub fn weibull_locus(k: f64) -> Result<(f64, f64)> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::Domain(format!("Weibull shape must be > 0, got {k}")));
    }
    let raw = |r: f64| gamma(1.0 + r / k);
    let (m1, m2, m3, m4) = (raw(1.0), raw(2.0), raw(3.0), raw(4.0));
    let var = m2 - m1 * m1;
    let mu3 = m3 - 3.0 * m1 * m2 + 2.0 * m1.powi(3);
    let mu4 = m4 - 4.0 * m1 * m3 + 6.0 * m1 * m1 * m2 - 3.0 * m1.powi(4);
    Ok((mu3 * mu3 / var.powi(3), mu4 / (var * var)))
}
