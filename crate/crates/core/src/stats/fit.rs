//! Maximum-likelihood fits for the normal and two-parameter Weibull laws.

use rand::Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ContinuousCDF, Normal};

use super::Sample;
use crate::error::{Error, Result};

const WEIBULL_TOL: f64 = 1e-10;
const WEIBULL_MAX_ITER: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Normal,
    Weibull,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Normal => "normal",
            Family::Weibull => "weibull",
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Distribution {
    Normal { mean: f64, sd: f64 },
    /// CDF `1 - exp(-(x/scale)^shape)` for `x >= 0`.
    Weibull { shape: f64, scale: f64 },
}

impl Distribution {
    pub fn family(&self) -> Family {
        match self {
            Distribution::Normal { .. } => Family::Normal,
            Distribution::Weibull { .. } => Family::Weibull,
        }
    }

    pub fn params(&self) -> (f64, f64) {
        match *self {
            Distribution::Normal { mean, sd } => (mean, sd),
            Distribution::Weibull { shape, scale } => (shape, scale),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Distribution::Normal { mean, sd } => Normal::new(mean, sd).expect("valid normal").cdf(x),
            Distribution::Weibull { shape, scale } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-(x / scale).powf(shape)).exp_m1()
                }
            }
        }
    }

    /// Inverse CDF for `p` in (0, 1).
    pub fn quantile(&self, p: f64) -> f64 {
        match *self {
            Distribution::Normal { mean, sd } => mean + sd * standard_normal_quantile(p),
            Distribution::Weibull { shape, scale } => scale * (-(-p).ln_1p()).powf(1.0 / shape),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Distribution::Normal { mean, sd } => {
                let z: f64 = rng.sample(StandardNormal);
                mean + sd * z
            }
            Distribution::Weibull { shape, scale } => {
                // 1 - U lies in (0, 1], so the log is finite.
                let u: f64 = 1.0 - rng.gen::<f64>();
                scale * (-u.ln()).powf(1.0 / shape)
            }
        }
    }

    pub fn log_likelihood(&self, values: &[f64]) -> f64 {
        match *self {
            Distribution::Normal { mean, sd } => {
                let n = values.len() as f64;
                let ss: f64 = values.iter().map(|x| (x - mean).powi(2)).sum();
                -0.5 * n * (2.0 * std::f64::consts::PI * sd * sd).ln() - ss / (2.0 * sd * sd)
            }
            Distribution::Weibull { shape, scale } => values
                .iter()
                .map(|&x| {
                    if x <= 0.0 {
                        f64::NEG_INFINITY
                    } else {
                        shape.ln() - shape * scale.ln() + (shape - 1.0) * x.ln() - (x / scale).powf(shape)
                    }
                })
                .sum(),
        }
    }
}

/// statrs' inverse CDF polished by Newton steps against its (more accurate) CDF.
fn standard_normal_quantile(p: f64) -> f64 {
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let mut x = unit.inverse_cdf(p);
    for _ in 0..3 {
        let pdf = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        if !(pdf > 0.0) {
            break;
        }
        x -= (unit.cdf(x) - p) / pdf;
    }
    x
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub law: Distribution,
    pub log_likelihood: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl FitResult {
    pub fn family(&self) -> Family {
        self.law.family()
    }

    pub fn params(&self) -> (f64, f64) {
        self.law.params()
    }
}

fn require_spread(sample: &Sample) -> Result<()> {
    if sample.len() < 2 || !sample.has_spread() {
        return Err(Error::DegenerateSample);
    }
    Ok(())
}

/// Normal MLE: sample mean and population standard deviation.
pub fn fit_normal(sample: &Sample) -> Result<FitResult> {
    require_spread(sample)?;
    let values = sample.values();
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let law = Distribution::Normal { mean, sd: var.sqrt() };
    Ok(FitResult {
        law,
        log_likelihood: law.log_likelihood(values),
        converged: true,
        iterations: 0,
    })
}

/// Sums over the data for the Weibull profile-likelihood equation in the shape `k`.
struct ProfileSums<'a> {
    /// Data divided by its maximum, so `y^k` cannot overflow.
    scaled: &'a [f64],
    logs: &'a [f64],
    mean_log: f64,
}

impl ProfileSums<'_> {
    /// `g(k) = Σ y^k ln y / Σ y^k - 1/k - mean(ln y)` and its derivative.
    /// `g` is strictly increasing, with its root at the MLE shape.
    fn eval(&self, k: f64) -> (f64, f64) {
        let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
        for (&y, &ly) in self.scaled.iter().zip(self.logs) {
            let yk = y.powf(k);
            s0 += yk;
            s1 += yk * ly;
            s2 += yk * ly * ly;
        }
        let ratio = s1 / s0;
        let g = ratio - 1.0 / k - self.mean_log;
        let dg = (s2 / s0 - ratio * ratio) + 1.0 / (k * k);
        (g, dg)
    }
}

/// Two-parameter Weibull MLE.
///
/// The shape solves the profile-likelihood equation by Newton iteration
/// inside a bisection bracket, starting from the coefficient-of-variation
/// heuristic `k0 = CV^-1.086`; the scale then follows in closed form.
/// When the iteration budget runs out the best iterate is returned with
/// `converged = false`.
pub fn fit_weibull(sample: &Sample) -> Result<FitResult> {
    let values = sample.values();
    if let Some(bad) = values.iter().find(|&&x| x <= 0.0) {
        return Err(Error::Domain(format!("Weibull fit needs positive values, got {bad}")));
    }
    require_spread(sample)?;

    let n = values.len() as f64;
    let max = values.iter().cloned().fold(f64::MIN, f64::max);
    let scaled: Vec<f64> = values.iter().map(|x| x / max).collect();
    let logs: Vec<f64> = scaled.iter().map(|y| y.ln()).collect();
    let sums = ProfileSums {
        scaled: &scaled,
        logs: &logs,
        mean_log: logs.iter().sum::<f64>() / n,
    };

    let mean = values.iter().sum::<f64>() / n;
    let sd = (values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
    let k0 = (sd / mean).powf(-1.086).clamp(0.02, 50.0);

    // Bracket the root; g is increasing in k.
    let (mut lo, mut hi) = (k0, k0);
    while sums.eval(lo).0 > 0.0 && lo > 1e-6 {
        lo *= 0.5;
    }
    while sums.eval(hi).0 < 0.0 && hi < 1e6 {
        hi *= 2.0;
    }

    let mut k = k0;
    let mut converged = false;
    let mut iterations = 0;
    for iter in 1..=WEIBULL_MAX_ITER {
        iterations = iter;
        let (g, dg) = sums.eval(k);
        if g == 0.0 {
            converged = true;
            break;
        }
        if g < 0.0 {
            lo = k;
        } else {
            hi = k;
        }
        let newton = k - g / dg;
        let next = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let step = (next - k).abs();
        k = next;
        if step <= WEIBULL_TOL * k.max(1.0) {
            converged = true;
            break;
        }
    }

    let mean_yk = scaled.iter().map(|y| y.powf(k)).sum::<f64>() / n;
    let scale = max * mean_yk.powf(1.0 / k);
    let law = Distribution::Weibull { shape: k, scale };
    Ok(FitResult {
        law,
        log_likelihood: law.log_likelihood(values),
        converged: converged && k.is_finite() && scale.is_finite() && scale > 0.0,
        iterations,
    })
}
