use std::io::Write;
use std::path::Path;

use super::{Churn, HostPopulation, HostSpec, LogNormalParams, PopulationParams};
use crate::config::KvConfig;
use crate::error::{Error, Result};

pub const POPULATION_HEADER: &str = "id,gflops,n_cpus,ram_gb,hdd_gb,on_rate,off_rate";

pub fn write_population_csv<W: Write>(pop: &HostPopulation, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{POPULATION_HEADER}")?;
    for h in &pop.hosts {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            h.id, h.gflops, h.n_cpus, h.ram_gb, h.hdd_gb, h.on_rate, h.off_rate
        )?;
    }
    Ok(())
}

pub fn read_population_csv(path: impl AsRef<Path>) -> Result<HostPopulation> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == POPULATION_HEADER => {}
        Some((_, header)) => {
            return Err(Error::parse(
                path,
                1,
                format!("expected header `{POPULATION_HEADER}`, got `{}`", header.trim()),
            ))
        }
        None => return Err(Error::parse(path, 1, "empty population file")),
    }
    let mut hosts = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 7 {
            return Err(Error::parse(path, line_no, format!("expected 7 fields, got {}", fields.len())));
        }
        let bad = |name: &str| Error::parse(path, line_no, format!("invalid {name} `{line}`"));
        let host = HostSpec {
            id: fields[0].parse().map_err(|_| bad("id"))?,
            gflops: fields[1].parse().map_err(|_| bad("gflops"))?,
            n_cpus: fields[2].parse().map_err(|_| bad("n_cpus"))?,
            ram_gb: fields[3].parse().map_err(|_| bad("ram_gb"))?,
            hdd_gb: fields[4].parse().map_err(|_| bad("hdd_gb"))?,
            on_rate: fields[5].parse().map_err(|_| bad("on_rate"))?,
            off_rate: fields[6].parse().map_err(|_| bad("off_rate"))?,
        };
        host.validate()
            .map_err(|e| Error::parse(path, line_no, e.to_string()))?;
        hosts.push(host);
    }
    Ok(HostPopulation { hosts })
}

const PARAM_KEYS: &[&str] = &[
    "preset",
    "n_hosts",
    "gflops_mean",
    "gflops_sd",
    "gflops_floor",
    "cpu_logmu",
    "cpu_logsigma",
    "ram_logmu",
    "ram_logsigma",
    "hdd_logmu",
    "hdd_logsigma",
    "on_rate",
    "off_rate",
    "seed",
];

/// Builds parameters from a config file. `preset = registered | lammps`
/// picks the base values (default `registered`); other keys override them.
pub fn params_from_config(cfg: &KvConfig) -> Result<PopulationParams> {
    cfg.check_known(PARAM_KEYS)?;
    let mut p = match cfg.get_str("preset") {
        None | Some("registered") => PopulationParams::registered(),
        Some("lammps") => PopulationParams::used_in_lammps(),
        Some(other) => return Err(Error::param(format!("unknown preset `{other}`"))),
    };
    if let Some(n) = cfg.get::<i64>("n_hosts")? {
        if n < 0 {
            return Err(Error::param(format!("n_hosts must be >= 0, got {n}")));
        }
        p.n_hosts = n as usize;
    }
    let set = |key: &str, slot: &mut f64| -> Result<()> {
        if let Some(v) = cfg.get::<f64>(key)? {
            *slot = v;
        }
        Ok(())
    };
    set("gflops_mean", &mut p.gflops_mean)?;
    set("gflops_sd", &mut p.gflops_sd)?;
    set("gflops_floor", &mut p.gflops_floor)?;
    let LogNormalParams { log_mu, log_sigma } = &mut p.cpus;
    set("cpu_logmu", log_mu)?;
    set("cpu_logsigma", log_sigma)?;
    let LogNormalParams { log_mu, log_sigma } = &mut p.ram;
    set("ram_logmu", log_mu)?;
    set("ram_logsigma", log_sigma)?;
    let LogNormalParams { log_mu, log_sigma } = &mut p.hdd;
    set("hdd_logmu", log_mu)?;
    set("hdd_logsigma", log_sigma)?;
    let Churn { on_rate, off_rate } = &mut p.churn;
    set("on_rate", on_rate)?;
    set("off_rate", off_rate)?;
    if let Some(seed) = cfg.get::<u64>("seed")? {
        p.seed = seed;
    }
    p.validate()?;
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hosts::sample_hosts;

    #[test]
    fn csv_round_trip_is_exact() {
        let params = PopulationParams {
            n_hosts: 50,
            ..PopulationParams::used_in_lammps()
        };
        let pop = sample_hosts(&params).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("hosts.csv");
        write_population_csv(&pop, std::fs::File::create(&path).unwrap()).unwrap();
        assert_eq!(read_population_csv(&path).unwrap(), pop);
    }

    #[test]
    fn bad_rows_report_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("hosts.csv");
        std::fs::write(&path, format!("{POPULATION_HEADER}\n0,2.5,4,4,100,0,0\n1,2.5,3,4,100,0,0\n")).unwrap();
        let err = read_population_csv(&path).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn config_overrides_preset() {
        let cfg = KvConfig::parse("preset = lammps\nn_hosts = 10\ngflops_sd = 0.5\nseed = 9\n", "p.conf").unwrap();
        let p = params_from_config(&cfg).unwrap();
        assert_eq!(p.n_hosts, 10);
        assert_eq!(p.gflops_mean, 2.3);
        assert_eq!(p.gflops_sd, 0.5);
        assert_eq!(p.seed, 9);

        let cfg = KvConfig::parse("n_hosts = -3\n", "p.conf").unwrap();
        assert!(matches!(params_from_config(&cfg), Err(Error::Parameter(_))));
        let cfg = KvConfig::parse("cpu_logsigma = -1\n", "p.conf").unwrap();
        assert!(matches!(params_from_config(&cfg), Err(Error::Parameter(_))));
        let cfg = KvConfig::parse("gflopz = 1\n", "p.conf").unwrap();
        assert!(matches!(params_from_config(&cfg), Err(Error::Parse { .. })));
    }
}
