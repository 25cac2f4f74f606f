//! Scenario files.
//!
//! ```text
//! [population]
//! preset = lammps          # or any host-parameter key, or `csv = hosts.csv`
//! seed = 1
//!
//! [simulation]
//! seed = 42
//! horizon_days = 365
//! dispatch_latency_s = 0
//! reference_gflops = 2.514
//! report_delay_logmu = 7.0     # optional, together with report_delay_logsigma
//!
//! [tasks]
//! # name | t_job_ref minutes | n_jobs | shared|dedicated
//! S=16x16x16, V=1 | 15 | 210 | shared
//! ```

use std::path::{Path, PathBuf};

use super::{PolicyConfig, ReferenceHost, TaskMode, TaskSpec, SECONDS_PER_DAY};
use crate::config::KvConfig;
use crate::error::{Error, Result};
use crate::hosts::{params_from_config, read_population_csv, sample_hosts, HostPopulation, LogNormalParams, PopulationParams};

#[derive(Debug, Clone, PartialEq)]
pub enum PopulationSource {
    Sampled(PopulationParams),
    Csv(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub population: PopulationSource,
    pub seed: u64,
    pub policy: PolicyConfig,
    pub tasks: Vec<TaskSpec>,
}

impl Scenario {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        parse_scenario(&text, path)
    }

    pub fn population(&self) -> Result<HostPopulation> {
        match &self.population {
            PopulationSource::Sampled(params) => sample_hosts(params),
            PopulationSource::Csv(path) => read_population_csv(path),
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Population,
    Simulation,
    Tasks,
}

type Entries = Vec<(usize, String, String)>;

/// Parses scenario text; relative CSV paths resolve against `path`'s directory.
pub fn parse_scenario(text: &str, path: &Path) -> Result<Scenario> {
    let mut section = Section::None;
    let mut population: Entries = Vec::new();
    let mut simulation: Entries = Vec::new();
    let mut tasks = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line.starts_with('[') {
            section = match line {
                "[population]" => Section::Population,
                "[simulation]" => Section::Simulation,
                "[tasks]" => Section::Tasks,
                other => return Err(Error::parse(path, line_no, format!("unknown section `{other}`"))),
            };
            continue;
        }
        match section {
            Section::None => return Err(Error::parse(path, line_no, "content before the first section")),
            Section::Population | Section::Simulation => {
                let line = line.split('#').next().unwrap_or("").trim();
                let Some((k, v)) = line.split_once('=') else {
                    return Err(Error::parse(path, line_no, format!("expected `key = value`, got `{line}`")));
                };
                let entry = (line_no, k.trim().to_string(), v.trim().to_string());
                if section == Section::Population {
                    population.push(entry);
                } else {
                    simulation.push(entry);
                }
            }
            Section::Tasks => tasks.push(parse_task(line, line_no, path)?),
        }
    }
    if tasks.is_empty() {
        return Err(Error::parse(path, text.lines().count().max(1), "scenario defines no tasks"));
    }
    for (i, t) in tasks.iter().enumerate() {
        if tasks[..i].iter().any(|o: &TaskSpec| o.name == t.name) {
            return Err(Error::parse(path, 0, format!("duplicate task name `{}`", t.name)));
        }
    }

    let population = parse_population(population, path)?;
    let (seed, policy) = parse_simulation(simulation, path)?;
    Ok(Scenario {
        population,
        seed,
        policy,
        tasks,
    })
}

fn parse_task(line: &str, line_no: usize, path: &Path) -> Result<TaskSpec> {
    let fields: Vec<&str> = line.split('|').map(str::trim).collect();
    let [name, minutes, n_jobs, mode] = fields[..] else {
        return Err(Error::parse(
            path,
            line_no,
            format!("expected `name | minutes | n_jobs | mode`, got `{line}`"),
        ));
    };
    let err = |msg: String| Error::parse(path, line_no, msg);
    if name.is_empty() {
        return Err(err("empty task name".into()));
    }
    let minutes: f64 = minutes.parse().map_err(|_| err(format!("invalid minutes `{minutes}`")))?;
    let n_jobs: usize = n_jobs.parse().map_err(|_| err(format!("invalid n_jobs `{n_jobs}`")))?;
    let mode: TaskMode = mode.parse().map_err(err)?;
    let task = TaskSpec::new(name, minutes * 60.0, n_jobs, mode);
    task.validate().map_err(|e| err(e.to_string()))?;
    Ok(task)
}

fn parse_population(entries: Entries, path: &Path) -> Result<PopulationSource> {
    let first_line = entries.first().map_or(0, |e| e.0);
    let cfg = KvConfig::from_entries(path, entries)?;
    if let Some(csv) = cfg.get_str("csv") {
        cfg.check_known(&["csv"])?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        return Ok(PopulationSource::Csv(base.join(csv)));
    }
    params_from_config(&cfg)
        .map(PopulationSource::Sampled)
        .map_err(|e| match e {
            Error::Parameter(msg) => Error::parse(path, first_line, msg),
            other => other,
        })
}

fn parse_simulation(entries: Entries, path: &Path) -> Result<(u64, PolicyConfig)> {
    let first_line = entries.first().map_or(0, |e| e.0);
    let cfg = KvConfig::from_entries(path, entries)?;
    cfg.check_known(&[
        "seed",
        "horizon_days",
        "dispatch_latency_s",
        "reference_gflops",
        "report_delay_logmu",
        "report_delay_logsigma",
    ])?;
    let mut policy = PolicyConfig::default();
    let seed = cfg.get::<u64>("seed")?.unwrap_or(0);
    if let Some(days) = cfg.get::<f64>("horizon_days")? {
        policy.horizon_s = days * SECONDS_PER_DAY;
    }
    if let Some(latency) = cfg.get::<f64>("dispatch_latency_s")? {
        policy.dispatch_latency_s = latency;
    }
    if let Some(gflops) = cfg.get::<f64>("reference_gflops")? {
        policy.reference = ReferenceHost { gflops };
    }
    match (cfg.get::<f64>("report_delay_logmu")?, cfg.get::<f64>("report_delay_logsigma")?) {
        (Some(mu), Some(sigma)) => policy.report_delay_s = Some(LogNormalParams::new(mu, sigma)),
        (None, None) => {}
        _ => {
            return Err(Error::parse(
                path,
                first_line,
                "report_delay_logmu and report_delay_logsigma must be given together",
            ))
        }
    }
    let valid = policy.horizon_s > 0.0
        && policy.dispatch_latency_s >= 0.0
        && policy.reference.gflops > 0.0
        && policy.report_delay_s.map_or(true, |d| d.log_sigma >= 0.0);
    if !valid {
        return Err(Error::parse(path, first_line, "simulation parameters out of range"));
    }
    Ok((seed, policy))
}
