//! Grid search for log-normal parameters that reproduce a target mean and
//! standard deviation, optionally after snapping onto [`CPU_COUNTS`].
//!
//! Moments are computed exactly from the log-normal CDF, so the search is
//! deterministic and needs no sampling.

use statrs::distribution::{ContinuousCDF, Normal};

use super::{snap_cpus, LogNormalParams, CPU_COUNTS};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub params: LogNormalParams,
    pub mean: f64,
    pub sd: f64,
    /// Sum of squared relative errors in mean and sd.
    pub objective: f64,
}

/// Mean and standard deviation of the law, snapped onto the CPU set when `snap` is set.
pub fn snapped_moments(p: LogNormalParams, snap: bool) -> (f64, f64) {
    if !snap {
        let s2 = p.log_sigma * p.log_sigma;
        let mean = (p.log_mu + 0.5 * s2).exp();
        let var = (s2.exp() - 1.0) * (2.0 * p.log_mu + s2).exp();
        return (mean, var.sqrt());
    }
    if p.log_sigma == 0.0 {
        return (snap_cpus(p.log_mu.exp()) as f64, 0.0);
    }
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let mut lower_cdf = 0.0;
    let (mut m1, mut m2) = (0.0, 0.0);
    for (i, &c) in CPU_COUNTS.iter().enumerate() {
        let upper_cdf = match CPU_COUNTS.get(i + 1) {
            Some(&next) => {
                let edge = 0.5 * (c + next) as f64;
                unit.cdf((edge.ln() - p.log_mu) / p.log_sigma)
            }
            None => 1.0,
        };
        let mass = upper_cdf - lower_cdf;
        m1 += mass * c as f64;
        m2 += mass * (c as f64).powi(2);
        lower_cdf = upper_cdf;
    }
    (m1, (m2 - m1 * m1).max(0.0).sqrt())
}

fn objective(p: LogNormalParams, snap: bool, target_mean: f64, target_sd: f64) -> (f64, f64, f64) {
    let (mean, sd) = snapped_moments(p, snap);
    let obj = ((mean - target_mean) / target_mean).powi(2) + ((sd - target_sd) / target_sd).powi(2);
    (obj, mean, sd)
}

fn search(
    snap: bool,
    target_mean: f64,
    target_sd: f64,
    mu_range: (f64, f64),
    sigma_range: (f64, f64),
    step: f64,
) -> Calibration {
    let n_mu = ((mu_range.1 - mu_range.0) / step).round() as usize;
    let n_sigma = ((sigma_range.1 - sigma_range.0) / step).round() as usize;
    let mut best: Option<Calibration> = None;
    for i in 0..=n_mu {
        let log_mu = mu_range.0 + i as f64 * step;
        for j in 0..=n_sigma {
            let log_sigma = (sigma_range.0 + j as f64 * step).max(0.0);
            let params = LogNormalParams::new(log_mu, log_sigma);
            let (obj, mean, sd) = objective(params, snap, target_mean, target_sd);
            if best.map_or(true, |b| obj < b.objective) {
                best = Some(Calibration {
                    params,
                    mean,
                    sd,
                    objective: obj,
                });
            }
        }
    }
    best.expect("non-empty grid")
}

/// Finds `(log_mu, log_sigma)` whose law matches `target_mean ± target_sd`.
///
/// A coarse grid (step 0.01) is followed by two refinements around the
/// best cell (steps 5e-4 and 2.5e-5).
pub fn calibrate_lognormal(target_mean: f64, target_sd: f64, snap: bool) -> Result<Calibration> {
    if !(target_mean > 0.0 && target_sd > 0.0 && target_mean.is_finite() && target_sd.is_finite()) {
        return Err(Error::param("calibration targets must be positive and finite"));
    }
    let center = target_mean.ln();
    let mut best = search(snap, target_mean, target_sd, (center - 4.0, center + 2.0), (0.0, 3.0), 0.01);
    for (half_width, step) in [(0.01, 5e-4), (5e-4, 2.5e-5)] {
        let p = best.params;
        let refined = search(
            snap,
            target_mean,
            target_sd,
            (p.log_mu - half_width, p.log_mu + half_width),
            ((p.log_sigma - half_width).max(0.0), p.log_sigma + half_width),
            step,
        );
        if refined.objective <= best.objective {
            best = refined;
        }
    }
    Ok(best)
}
