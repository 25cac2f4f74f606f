//! Ensemble sweeps of MD tensile jobs on a local worker pool.
//!
//! Realization `i` runs with seed `base_seed + i` and writes
//! `job_{i:05}.csv`. A failing job is recorded in the ledger and never
//! stops the others. Every file is staged and moved into the output
//! directory only after all jobs have finished.

use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use crate::config::KvConfig;
use crate::csvfmt;
use crate::error::{Error, Result};
use crate::md::{run_tensile, write_records_csv, MdParams};
use crate::output::StagedOutputs;

pub const LEDGER_FILE: &str = "ledger.csv";
pub const SUMMARY_FILE: &str = "sweep_summary.csv";
pub const LEDGER_HEADER: &str = "job_id,seed,status,wall_time_s,records,error";
pub const SUMMARY_HEADER: &str = "n_jobs,n_ok,n_failed,parallelism,t_seq_est_s,t_wall_s,realized_speedup";

pub fn job_file_name(id: usize) -> String {
    format!("job_{id:05}.csv")
}

/// Job id from a file name written by [`job_file_name`].
pub fn parse_job_file_name(name: &str) -> Option<usize> {
    let digits = name.strip_prefix("job_")?.strip_suffix(".csv")?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// Crystal size in FCC cells along x, y (tensile axis), z.
    pub cells: [usize; 3],
    /// MD settings shared by every realization; the seed is replaced per job.
    pub md: MdParams,
    pub n_realizations: usize,
    pub base_seed: u64,
    pub parallelism: usize,
    pub output_dir: PathBuf,
}

const SPEC_KEYS: &[&str] = &[
    "nx",
    "ny",
    "nz",
    "dt",
    "temperature",
    "strain_rate",
    "target_strain",
    "checkpoint_dstrain",
    "equilibration_steps",
    "cna_cutoff",
    "grip_planes",
    "n_realizations",
    "base_seed",
    "parallelism",
];

impl SweepSpec {
    pub fn new(output_dir: impl Into<PathBuf>) -> Self {
        Self {
            cells: [4, 6, 4],
            md: MdParams::default(),
            n_realizations: 100,
            base_seed: 1,
            parallelism: std::thread::available_parallelism().map_or(1, |n| n.get()),
            output_dir: output_dir.into(),
        }
    }

    /// Overrides defaults with the keys of a sweep configuration file.
    pub fn apply_config(&mut self, cfg: &KvConfig) -> Result<()> {
        cfg.check_known(SPEC_KEYS)?;
        for (axis, key) in ["nx", "ny", "nz"].into_iter().enumerate() {
            if let Some(v) = cfg.get::<usize>(key)? {
                self.cells[axis] = v;
            }
        }
        let md = &mut self.md;
        for (key, slot) in [
            ("dt", &mut md.dt),
            ("temperature", &mut md.temperature),
            ("strain_rate", &mut md.strain_rate),
            ("target_strain", &mut md.target_strain),
            ("checkpoint_dstrain", &mut md.checkpoint_dstrain),
            ("cna_cutoff", &mut md.cna_cutoff),
        ] {
            if let Some(v) = cfg.get::<f64>(key)? {
                *slot = v;
            }
        }
        if let Some(v) = cfg.get::<usize>("equilibration_steps")? {
            md.equilibration_steps = v;
        }
        if let Some(v) = cfg.get::<usize>("grip_planes")? {
            md.grip_planes = Some(v);
        }
        if let Some(v) = cfg.get::<usize>("n_realizations")? {
            self.n_realizations = v;
        }
        if let Some(v) = cfg.get::<u64>("base_seed")? {
            self.base_seed = v;
        }
        if let Some(v) = cfg.get::<usize>("parallelism")? {
            self.parallelism = v;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_realizations == 0 {
            return Err(Error::param("n_realizations must be >= 1"));
        }
        if self.parallelism == 0 {
            return Err(Error::param("parallelism must be >= 1"));
        }
        if self.cells.iter().any(|&c| c < 2) {
            return Err(Error::param(format!("crystal needs >= 2 cells per axis, got {:?}", self.cells)));
        }
        if self.base_seed.checked_add(self.n_realizations as u64).is_none() {
            return Err(Error::param("base_seed + n_realizations overflows"));
        }
        self.md.validate()
    }

    pub fn seed_of(&self, job_id: usize) -> u64 {
        self.base_seed + job_id as u64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum JobStatus {
    Ok { records: usize },
    Failed { error: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct JobEntry {
    pub id: usize,
    pub seed: u64,
    pub wall_time_s: f64,
    pub status: JobStatus,
}

impl JobEntry {
    pub fn is_ok(&self) -> bool {
        matches!(self.status, JobStatus::Ok { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepLedger {
    pub jobs: Vec<JobEntry>,
    pub parallelism: usize,
    /// Sum of per-job wall times: what one worker would have needed.
    pub t_seq_est_s: f64,
    /// Wall time from the first job start to the last job end.
    pub t_wall_s: f64,
    pub realized_speedup: f64,
}

impl SweepLedger {
    pub fn n_ok(&self) -> usize {
        self.jobs.iter().filter(|j| j.is_ok()).count()
    }

    pub fn n_failed(&self) -> usize {
        self.jobs.len() - self.n_ok()
    }

    pub fn write_ledger_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{LEDGER_HEADER}")?;
        for j in &self.jobs {
            let (status, records, error) = match &j.status {
                JobStatus::Ok { records } => ("ok", records.to_string(), String::new()),
                JobStatus::Failed { error } => ("failed", String::new(), error.clone()),
            };
            writeln!(
                out,
                "{},{},{},{:.6},{},{}",
                j.id,
                j.seed,
                status,
                j.wall_time_s,
                records,
                csvfmt::field(&error)
            )?;
        }
        Ok(())
    }

    pub fn write_summary_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{SUMMARY_HEADER}")?;
        writeln!(
            out,
            "{},{},{},{},{:.6},{:.6},{:.4}",
            self.jobs.len(),
            self.n_ok(),
            self.n_failed(),
            self.parallelism,
            self.t_seq_est_s,
            self.t_wall_s,
            self.realized_speedup
        )
    }
}

fn run_job(spec: &SweepSpec, id: usize, path: &Path) -> Result<usize> {
    let params = MdParams {
        seed: spec.seed_of(id),
        ..spec.md.clone()
    };
    let records = run_tensile(&params, spec.cells)?;
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_records_csv(&records, std::io::BufWriter::new(file)).map_err(|e| Error::io(path, e))?;
    Ok(records.len())
}

/// Runs every realization through a pool of `spec.parallelism` workers and
/// commits job files, ledger and summary to `spec.output_dir`.
///
/// Returns the ledger even when jobs failed; callers decide what an
/// all-failed sweep means.
pub fn sweep_run(spec: &SweepSpec) -> Result<SweepLedger> {
    spec.validate()?;
    let mut staged = StagedOutputs::new(&spec.output_dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.parallelism)
        .build()
        .map_err(|e| Error::Sweep(format!("cannot start worker pool: {e}")))?;

    let staged_ref = &staged;
    let sweep_start = Instant::now();
    let results: Vec<(JobEntry, Option<String>)> = pool.install(|| {
        (0..spec.n_realizations)
            .into_par_iter()
            .map(|id| {
                let name = job_file_name(id);
                let path = staged_ref.staged_path(&name);
                let start = Instant::now();
                let outcome = catch_unwind(AssertUnwindSafe(|| run_job(spec, id, &path)));
                let wall_time_s = start.elapsed().as_secs_f64();
                let status = match outcome {
                    Ok(Ok(records)) => JobStatus::Ok { records },
                    Ok(Err(e)) => JobStatus::Failed { error: e.to_string() },
                    Err(_) => JobStatus::Failed {
                        error: "worker panicked".into(),
                    },
                };
                let file = matches!(status, JobStatus::Ok { .. }).then_some(name);
                let entry = JobEntry {
                    id,
                    seed: spec.seed_of(id),
                    wall_time_s,
                    status,
                };
                (entry, file)
            })
            .collect()
    });
    let t_wall_s = sweep_start.elapsed().as_secs_f64();

    let mut jobs = Vec::with_capacity(results.len());
    for (entry, file) in results {
        if let Some(name) = file {
            staged.register(name);
        } else {
            // A failed job may have left a partial file behind.
            let _ = std::fs::remove_file(staged.staged_path(&job_file_name(entry.id)));
        }
        jobs.push(entry);
    }
    let t_seq_est_s: f64 = jobs.iter().map(|j| j.wall_time_s).sum();
    let ledger = SweepLedger {
        jobs,
        parallelism: spec.parallelism,
        t_seq_est_s,
        t_wall_s,
        realized_speedup: if t_wall_s > 0.0 { t_seq_est_s / t_wall_s } else { 1.0 },
    };
    staged.write(LEDGER_FILE, |w| ledger.write_ledger_csv(w))?;
    staged.write(SUMMARY_FILE, |w| ledger.write_summary_csv(w))?;
    staged.commit()?;
    Ok(ledger)
}
