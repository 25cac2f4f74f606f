use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::moments::summarize;
use super::Sample;
use crate::error::{Error, Result};

/// Pearson-plane points of with-replacement resamples.
#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapCloud {
    /// `(β1, β2)` per resample.
    pub points: Vec<(f64, f64)>,
    /// Mean of each resample, in the same order as `points`.
    pub resample_means: Vec<f64>,
    pub n_resamples: usize,
    pub seed: u64,
    /// Resamples discarded and redrawn because all their values coincided.
    pub redrawn: usize,
}

pub fn bootstrap_cloud(sample: &Sample, n_resamples: usize, seed: u64) -> Result<BootstrapCloud> {
    if sample.len() < 2 || !sample.has_spread() {
        return Err(Error::DegenerateSample);
    }
    if n_resamples == 0 {
        return Err(Error::param("n_resamples must be >= 1"));
    }
    let values = sample.values();
    let n = values.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n_resamples);
    let mut resample_means = Vec::with_capacity(n_resamples);
    let mut redrawn = 0;
    let mut buf = vec![0.0; n];
    while points.len() < n_resamples {
        for slot in buf.iter_mut() {
            *slot = values[rng.gen_range(0..n)];
        }
        if buf.iter().all(|&v| v == buf[0]) {
            redrawn += 1;
            continue;
        }
        let m = summarize(&buf);
        points.push(m.pearson_point());
        resample_means.push(m.mean);
    }
    Ok(BootstrapCloud {
        points,
        resample_means,
        n_resamples,
        seed,
        redrawn,
    })
}
