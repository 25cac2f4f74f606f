//! One-sample Kolmogorov-Smirnov test against a fitted law.
//!
//! The asymptotic p-value ignores that the law's parameters were estimated
//! from the same data and is therefore conservative (the Lilliefors
//! effect). The parametric-bootstrap mode simulates the null distribution
//! of the statistic including the re-fit and is the calibrated choice.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::fit::{fit_normal, fit_weibull, Distribution, Family, FitResult};
use super::Sample;
use crate::error::{Error, Result};

const SERIES_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KsMode {
    Asymptotic,
    ParametricBootstrap { resamples: usize, seed: u64 },
}

impl KsMode {
    pub const DEFAULT_RESAMPLES: usize = 999;

    pub fn bootstrap(seed: u64) -> Self {
        KsMode::ParametricBootstrap {
            resamples: Self::DEFAULT_RESAMPLES,
            seed,
        }
    }

    pub fn kind(&self) -> KsModeKind {
        match self {
            KsMode::Asymptotic => KsModeKind::Asymptotic,
            KsMode::ParametricBootstrap { .. } => KsModeKind::ParametricBootstrap,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KsModeKind {
    Asymptotic,
    ParametricBootstrap,
}

impl KsModeKind {
    pub fn name(self) -> &'static str {
        match self {
            KsModeKind::Asymptotic => "asymptotic",
            KsModeKind::ParametricBootstrap => "parametric_bootstrap",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsOutcome {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
    pub mode: KsModeKind,
}

/// `sup |F_n - F|` over the sorted sample, checking both sides of every step.
pub fn ks_statistic(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            let above = (i + 1) as f64 / n - f;
            let below = f - i as f64 / n;
            above.max(below)
        })
        .fold(0.0, f64::max)
        .clamp(0.0, 1.0)
}

/// Kolmogorov survival function `Q(λ) = 2 Σ_{j≥1} (-1)^{j-1} exp(-2 j² λ²)`.
///
/// For small λ the alternating series converges slowly, so the equivalent
/// theta-function form `1 - √(2π)/λ Σ_{k≥1} exp(-(2k-1)² π² / (8 λ²))` is
/// used instead. Both are truncated once a term drops below 1e-12.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let q = if lambda < 1.18 {
        let pi2 = std::f64::consts::PI.powi(2);
        let mut sum = 0.0;
        for k in 1.. {
            let odd = (2 * k - 1) as f64;
            let term = (-odd * odd * pi2 / (8.0 * lambda * lambda)).exp();
            sum += term;
            if term < SERIES_EPS {
                break;
            }
        }
        1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * sum
    } else {
        let mut sum = 0.0;
        let mut sign = 1.0;
        for j in 1.. {
            let term = (-2.0 * (j * j) as f64 * lambda * lambda).exp();
            sum += sign * term;
            sign = -sign;
            if term < SERIES_EPS {
                break;
            }
        }
        2.0 * sum
    };
    q.clamp(0.0, 1.0)
}

fn asymptotic_p(d: f64, n: usize) -> f64 {
    let sqrt_n = (n as f64).sqrt();
    kolmogorov_survival((sqrt_n + 0.12 + 0.11 / sqrt_n) * d)
}

fn refit(family: Family, sample: &Sample) -> Result<FitResult> {
    match family {
        Family::Normal => fit_normal(sample),
        Family::Weibull => fit_weibull(sample),
    }
}

pub fn ks_test(sample: &Sample, fit: &FitResult, mode: KsMode) -> Result<KsOutcome> {
    if sample.is_empty() {
        return Err(Error::Domain("KS test on an empty sample".into()));
    }
    if !fit.converged {
        return Err(Error::Domain("KS test needs a converged fit".into()));
    }
    let n = sample.len();
    let law = fit.law;
    let d = ks_statistic(&sample.sorted_values(), |x| law.cdf(x));
    let p_value = match mode {
        KsMode::Asymptotic => asymptotic_p(d, n),
        KsMode::ParametricBootstrap { resamples, seed } => {
            if resamples == 0 {
                return Err(Error::param("parametric bootstrap needs at least one resample"));
            }
            let exceed = bootstrap_statistics(law, n, resamples, seed)
                .into_iter()
                .filter(|&db| db >= d)
                .count();
            (1 + exceed) as f64 / (resamples + 1) as f64
        }
    };
    Ok(KsOutcome {
        statistic: d,
        p_value,
        n,
        mode: mode.kind(),
    })
}

/// KS statistics of samples drawn from `law` and re-fitted within its family.
fn bootstrap_statistics(law: Distribution, n: usize, resamples: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let family = law.family();
    let mut stats = Vec::with_capacity(resamples);
    while stats.len() < resamples {
        let draw: Vec<f64> = (0..n).map(|_| law.sample(&mut rng)).collect();
        let Ok(resample) = Sample::new(draw, "") else { continue };
        let Ok(fit) = refit(family, &resample) else { continue };
        if !fit.converged {
            continue;
        }
        let refit_law = fit.law;
        stats.push(ks_statistic(&resample.sorted_values(), |x| refit_law.cdf(x)));
    }
    stats
}
