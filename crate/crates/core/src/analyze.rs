//! Ensemble analysis of one observable at one strain checkpoint.
//!
//! The values of every job file in a sweep directory form a [`Sample`],
//! which is fitted by both families, KS-tested in both modes, placed on
//! the Pearson plane with a bootstrap cloud and summarized by a verdict:
//! the family with the larger parametric-bootstrap KS p-value, or
//! `indistinguishable` when both pass at 0.05 and lie within a factor 2.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::md::{read_records_csv, DefectRecord};
use crate::output::StagedOutputs;
use crate::stats::{
    bootstrap_cloud, fit_normal, fit_weibull, ks_test, moment_summary, qq_points, BootstrapCloud, Family, FitResult,
    KsMode, KsModeKind, KsOutcome, MomentSummary, Sample,
};
use crate::sweep::parse_job_file_name;

/// Checkpoints closer than this are the same strain.
pub const STRAIN_MATCH_TOL: f64 = 1e-9;
pub const SIGNIFICANCE: f64 = 0.05;
/// Ratio of p-values below which two passing fits count as a tie.
pub const TIE_FACTOR: f64 = 2.0;

pub const FITS_FILE: &str = "fits.csv";
pub const MOMENTS_FILE: &str = "moments.csv";
pub const CLOUD_FILE: &str = "cloud.csv";
pub const QQ_FILE: &str = "qq.csv";
pub const SAMPLE_FILE: &str = "sample.csv";
pub const VERDICT_FILE: &str = "verdict.csv";

pub const FITS_HEADER: &str = "label,family,param1,param2,loglik,ks_d,ks_p,mode";
pub const MOMENTS_HEADER: &str = "label,n,mean,variance,skewness,kurtosis,beta1,beta2";
pub const CLOUD_HEADER: &str = "beta1,beta2";
pub const QQ_HEADER: &str = "family,theoretical,empirical";
pub const SAMPLE_HEADER: &str = "job_id,value";
pub const VERDICT_HEADER: &str = "label,strain,observable,n,verdict,p_normal,p_weibull,mode";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observable {
    CHcp,
    CUnk,
    SigmaTop,
}

impl Observable {
    pub fn name(self) -> &'static str {
        match self {
            Observable::CHcp => "c_hcp",
            Observable::CUnk => "c_unk",
            Observable::SigmaTop => "sigma_top",
        }
    }

    pub fn of(self, r: &DefectRecord) -> f64 {
        match self {
            Observable::CHcp => r.c_hcp,
            Observable::CUnk => r.c_unk,
            Observable::SigmaTop => r.sigma_top,
        }
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "c_hcp" => Ok(Observable::CHcp),
            "c_unk" => Ok(Observable::CUnk),
            "sigma_top" => Ok(Observable::SigmaTop),
            other => Err(Error::param(format!(
                "unknown observable `{other}` (expected c_hcp, c_unk or sigma_top)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyzeOptions {
    /// Parametric-bootstrap resamples per KS test.
    pub ks_resamples: usize,
    /// Resamples in the Pearson-plane bootstrap cloud.
    pub bootstrap_resamples: usize,
    pub seed: u64,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        Self {
            ks_resamples: KsMode::DEFAULT_RESAMPLES,
            bootstrap_resamples: 1000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Normal,
    Weibull,
    Indistinguishable,
    Degenerate,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Normal => "normal",
            Verdict::Weibull => "weibull",
            Verdict::Indistinguishable => "indistinguishable",
            Verdict::Degenerate => "degenerate",
        }
    }

    /// Classification from the two KS p-values; `None` means the Weibull
    /// family could not be fitted (nonpositive values or no convergence).
    pub fn from_p_values(p_normal: f64, p_weibull: Option<f64>) -> Self {
        let Some(p_weibull) = p_weibull else {
            return Verdict::Normal;
        };
        let (lo, hi) = if p_normal <= p_weibull {
            (p_normal, p_weibull)
        } else {
            (p_weibull, p_normal)
        };
        if lo == hi || (lo > SIGNIFICANCE && hi <= TIE_FACTOR * lo) {
            Verdict::Indistinguishable
        } else if p_normal > p_weibull {
            Verdict::Normal
        } else {
            Verdict::Weibull
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyFit {
    pub fit: FitResult,
    pub asymptotic: KsOutcome,
    pub bootstrap: KsOutcome,
    pub qq: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub label: String,
    /// `None` when the sample did not come from a sweep.
    pub strain: Option<f64>,
    pub observable: Option<Observable>,
    /// `(job_id, value)` in job order.
    pub values: Vec<(usize, f64)>,
    pub verdict: Verdict,
    /// Both stay `None` for a degenerate sample.
    pub normal: Option<FamilyFit>,
    pub weibull: Option<FamilyFit>,
    pub moments: Option<MomentSummary>,
    pub cloud: Option<BootstrapCloud>,
}

impl Analysis {
    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn p_normal(&self) -> Option<f64> {
        self.normal.as_ref().map(|f| f.bootstrap.p_value)
    }

    pub fn p_weibull(&self) -> Option<f64> {
        self.weibull.as_ref().map(|f| f.bootstrap.p_value)
    }
}

fn family_fit(sample: &Sample, fit: FitResult, resamples: usize, seed: u64) -> Result<FamilyFit> {
    Ok(FamilyFit {
        asymptotic: ks_test(sample, &fit, KsMode::Asymptotic)?,
        bootstrap: ks_test(sample, &fit, KsMode::ParametricBootstrap { resamples, seed })?,
        qq: qq_points(sample, &fit)?,
        fit,
    })
}

/// Runs the statistics on `(job_id, value)` pairs extracted at `strain`.
pub fn analyze_values(
    values: Vec<(usize, f64)>,
    strain: f64,
    observable: Observable,
    options: &AnalyzeOptions,
) -> Result<Analysis> {
    let label = format!("{observable}@{strain}");
    analyze_labelled(values, label, Some(strain), Some(observable), options)
}

/// Analyzes a standalone sample; values are numbered by position.
pub fn analyze_sample(sample: &Sample, options: &AnalyzeOptions) -> Result<Analysis> {
    let values = sample.values().iter().copied().enumerate().collect();
    analyze_labelled(values, sample.label().to_string(), None, None, options)
}

fn analyze_labelled(
    values: Vec<(usize, f64)>,
    label: String,
    strain: Option<f64>,
    observable: Option<Observable>,
    options: &AnalyzeOptions,
) -> Result<Analysis> {
    if values.len() < 2 {
        return Err(Error::param(format!("ensemble analysis needs >= 2 values, got {}", values.len())));
    }
    if options.ks_resamples == 0 || options.bootstrap_resamples == 0 {
        return Err(Error::param("resample counts must be >= 1"));
    }
    let sample = Sample::new(values.iter().map(|&(_, v)| v).collect(), label.clone())?;
    let mut analysis = Analysis {
        label,
        strain,
        observable,
        values,
        verdict: Verdict::Degenerate,
        normal: None,
        weibull: None,
        moments: None,
        cloud: None,
    };
    if !sample.has_spread() {
        return Ok(analysis);
    }

    // Distinct streams per consumer of randomness.
    let seed = options.seed;
    let normal = family_fit(&sample, fit_normal(&sample)?, options.ks_resamples, seed)?;
    let weibull = match fit_weibull(&sample) {
        Ok(fit) if fit.converged => Some(family_fit(
            &sample,
            fit,
            options.ks_resamples,
            seed.wrapping_add(1),
        )?),
        Ok(_) | Err(Error::Domain(_)) => None,
        Err(e) => return Err(e),
    };
    analysis.verdict = Verdict::from_p_values(normal.bootstrap.p_value, weibull.as_ref().map(|w| w.bootstrap.p_value));
    analysis.normal = Some(normal);
    analysis.weibull = weibull;
    analysis.moments = Some(moment_summary(&sample)?);
    analysis.cloud = Some(bootstrap_cloud(&sample, options.bootstrap_resamples, seed.wrapping_add(2))?);
    Ok(analysis)
}

/// Job files of a sweep directory, sorted by job id.
pub fn job_files(input_dir: &Path) -> Result<Vec<(usize, PathBuf)>> {
    let entries = std::fs::read_dir(input_dir).map_err(|e| Error::io(input_dir, e))?;
    let mut jobs = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(input_dir, e))?;
        let name = entry.file_name();
        if let Some(id) = name.to_str().and_then(parse_job_file_name) {
            jobs.push((id, entry.path()));
        }
    }
    jobs.sort();
    Ok(jobs)
}

/// Observable at `strain` from each job file, in job order.
pub fn extract_values(input_dir: &Path, strain: f64, observable: Observable) -> Result<Vec<(usize, f64)>> {
    let mut out = Vec::new();
    for (id, path) in job_files(input_dir)? {
        let records = read_records_csv(&path)?;
        let Some(r) = records.iter().find(|r| (r.strain - strain).abs() <= STRAIN_MATCH_TOL) else {
            return Err(Error::MissingCheckpoint {
                requested: strain,
                available: records.iter().map(|r| r.strain).collect(),
            });
        };
        out.push((id, observable.of(r)));
    }
    Ok(out)
}

/// Reads the sweep in `input_dir`, analyzes it and atomically writes the
/// report files into `out_dir`. A degenerate sample yields only the
/// sample and verdict files.
pub fn analyze_ensemble(
    input_dir: &Path,
    strain: f64,
    observable: Observable,
    options: &AnalyzeOptions,
    out_dir: &Path,
) -> Result<Analysis> {
    let values = extract_values(input_dir, strain, observable)?;
    let analysis = analyze_values(values, strain, observable, options)?;
    write_report(&analysis, out_dir)?;
    Ok(analysis)
}

pub fn write_report(a: &Analysis, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let mut staged = StagedOutputs::new(out_dir)?;
    staged.write(SAMPLE_FILE, |w| {
        writeln!(w, "{SAMPLE_HEADER}")?;
        for (id, v) in &a.values {
            writeln!(w, "{id},{v}")?;
        }
        Ok(())
    })?;
    if let Some(normal) = &a.normal {
        let fams: Vec<&FamilyFit> = std::iter::once(normal).chain(a.weibull.as_ref()).collect();
        staged.write(FITS_FILE, |w| {
            writeln!(w, "{FITS_HEADER}")?;
            for f in &fams {
                let (p1, p2) = f.fit.params();
                for ks in [&f.asymptotic, &f.bootstrap] {
                    writeln!(
                        w,
                        "{},{},{p1},{p2},{},{},{},{}",
                        crate::csvfmt::field(&a.label),
                        f.fit.family(),
                        f.fit.log_likelihood,
                        ks.statistic,
                        ks.p_value,
                        ks.mode.name()
                    )?;
                }
            }
            Ok(())
        })?;
        staged.write(QQ_FILE, |w| {
            writeln!(w, "{QQ_HEADER}")?;
            for f in &fams {
                for (t, e) in &f.qq {
                    writeln!(w, "{},{t},{e}", f.fit.family())?;
                }
            }
            Ok(())
        })?;
    }
    if let Some(m) = &a.moments {
        staged.write(MOMENTS_FILE, |w| {
            writeln!(w, "{MOMENTS_HEADER}")?;
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                crate::csvfmt::field(&a.label),
                a.n(),
                m.mean,
                m.variance,
                m.skewness,
                m.kurtosis,
                m.beta1,
                m.beta2
            )
        })?;
    }
    if let Some(cloud) = &a.cloud {
        staged.write(CLOUD_FILE, |w| {
            writeln!(w, "{CLOUD_HEADER}")?;
            for (b1, b2) in &cloud.points {
                writeln!(w, "{b1},{b2}")?;
            }
            Ok(())
        })?;
    }
    staged.write(VERDICT_FILE, |w| {
        let p = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        let observable = a.observable.map(Observable::name).unwrap_or_default();
        writeln!(w, "{VERDICT_HEADER}")?;
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            crate::csvfmt::field(&a.label),
            p(a.strain),
            observable,
            a.n(),
            a.verdict,
            p(a.p_normal()),
            p(a.p_weibull()),
            KsModeKind::ParametricBootstrap.name()
        )
    })?;
    staged.commit()
}

/// Family preferred by a verdict, if any.
pub fn preferred_family(v: Verdict) -> Option<Family> {
    match v {
        Verdict::Normal => Some(Family::Normal),
        Verdict::Weibull => Some(Family::Weibull),
        _ => None,
    }
}
