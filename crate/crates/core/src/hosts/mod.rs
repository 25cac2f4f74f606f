//! Synthetic volunteer-host populations.
//!
//! Host performance is drawn from a normal law truncated below at a floor,
//! while CPU count, RAM and disk size follow log-normal laws, the signature
//! of multiplicative (Gibrat) growth. CPU counts are snapped onto the
//! discrete set of core counts seen in practice.

mod calibrate;
mod io;

pub use calibrate::{calibrate_lognormal, snapped_moments, Calibration};
pub use io::{params_from_config, read_population_csv, write_population_csv, POPULATION_HEADER};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Core counts a host may report.
pub const CPU_COUNTS: [u32; 10] = [1, 2, 4, 6, 8, 16, 32, 48, 64, 128];

#[derive(Debug, Clone, PartialEq)]
pub struct HostSpec {
    pub id: u32,
    /// Performance in GFLOP/s.
    pub gflops: f64,
    pub n_cpus: u32,
    pub ram_gb: f64,
    pub hdd_gb: f64,
    /// Attach rate while detached, per hour.
    pub on_rate: f64,
    /// Detach rate while attached, per hour.
    pub off_rate: f64,
}

impl HostSpec {
    /// An always-available host with the given performance and core count.
    pub fn dedicated(id: u32, gflops: f64, n_cpus: u32) -> Self {
        Self {
            id,
            gflops,
            n_cpus,
            ram_gb: 4.0,
            hdd_gb: 250.0,
            on_rate: 0.0,
            off_rate: 0.0,
        }
    }

    /// Long-run fraction of time the host is attached.
    pub fn availability(&self) -> f64 {
        let total = self.on_rate + self.off_rate;
        if total == 0.0 {
            1.0
        } else {
            self.on_rate / total
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gflops > 0.0 && self.ram_gb > 0.0 && self.hdd_gb > 0.0) {
            return Err(Error::param(format!(
                "host {}: gflops, ram_gb and hdd_gb must be positive",
                self.id
            )));
        }
        if !CPU_COUNTS.contains(&self.n_cpus) {
            return Err(Error::param(format!(
                "host {}: n_cpus={} is not one of {CPU_COUNTS:?}",
                self.id, self.n_cpus
            )));
        }
        if !(self.on_rate >= 0.0 && self.off_rate >= 0.0) {
            return Err(Error::param(format!("host {}: churn rates must be >= 0", self.id)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct HostPopulation {
    pub hosts: Vec<HostSpec>,
}

impl HostPopulation {
    pub fn new(hosts: Vec<HostSpec>) -> Self {
        Self { hosts }
    }

    pub fn len(&self) -> usize {
        self.hosts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hosts.is_empty()
    }
}

/// Parameters of a log-normal law: `ln X ~ N(log_mu, log_sigma²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogNormalParams {
    pub log_mu: f64,
    pub log_sigma: f64,
}

impl LogNormalParams {
    pub const fn new(log_mu: f64, log_sigma: f64) -> Self {
        Self { log_mu, log_sigma }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        (self.log_mu + self.log_sigma * z).exp()
    }
}

/// Two-state attach/detach process with exponential holding times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Churn {
    pub on_rate: f64,
    pub off_rate: f64,
}

impl Churn {
    pub const NONE: Churn = Churn {
        on_rate: 0.0,
        off_rate: 0.0,
    };

    /// Hosts stay attached 4 h and detached about 33 h on average
    /// (availability ~0.11). Tuned so the bundled MD campaign scenario's total
    /// speedup lands in [20, 60]; the real fleet's churn was never recorded.
    pub const DEFAULT: Churn = Churn {
        on_rate: 0.03,
        off_rate: 0.25,
    };
}

// Output of `calibrate_lognormal` for the registered and MD-application host
// tables (examples/calibrate_hosts.rs); `shipped_calibrations_match_search`
// re-runs the search.
const REGISTERED_CPUS: LogNormalParams = LogNormalParams::new(1.0614650226995168, 0.9137000000000001);
const REGISTERED_RAM: LogNormalParams = LogNormalParams::new(1.1688429875485544, 1.208525);
const REGISTERED_HDD: LogNormalParams = LogNormalParams::new(4.985976084895221, 1.061225);
const LAMMPS_CPUS: LogNormalParams = LogNormalParams::new(1.3120325263969208, 1.1115000000000002);
const LAMMPS_RAM: LogNormalParams = LogNormalParams::new(2.2418637222397813, 1.030275);
const LAMMPS_HDD: LogNormalParams = LogNormalParams::new(4.746832530717469, 1.0957000000000001);

#[derive(Debug, Clone, PartialEq)]
pub struct PopulationParams {
    pub n_hosts: usize,
    pub gflops_mean: f64,
    pub gflops_sd: f64,
    pub gflops_floor: f64,
    pub cpus: LogNormalParams,
    pub ram: LogNormalParams,
    pub hdd: LogNormalParams,
    pub churn: Churn,
    pub seed: u64,
}

impl Default for PopulationParams {
    fn default() -> Self {
        Self::registered()
    }
}

impl PopulationParams {
    /// All hosts registered with the project: 4161 hosts, 2.25 ± 0.76 GFLOP/s,
    /// 4.30 ± 4.95 CPUs, 6.68 ± 12.15 GB RAM, 257 ± 371 GB disk.
    pub fn registered() -> Self {
        Self {
            n_hosts: 4161,
            gflops_mean: 2.25,
            gflops_sd: 0.76,
            gflops_floor: 0.1,
            cpus: REGISTERED_CPUS,
            ram: REGISTERED_RAM,
            hdd: REGISTERED_HDD,
            churn: Churn::DEFAULT,
            seed: 1,
        }
    }

    /// The 189 hosts that ran the MD application: 2.3 ± 0.7 GFLOP/s,
    /// 6.7 ± 10 CPUs, 16 ± 22 GB RAM, 210 ± 320 GB disk.
    pub fn used_in_lammps() -> Self {
        Self {
            n_hosts: 189,
            gflops_mean: 2.3,
            gflops_sd: 0.7,
            gflops_floor: 0.1,
            cpus: LAMMPS_CPUS,
            ram: LAMMPS_RAM,
            hdd: LAMMPS_HDD,
            churn: Churn::DEFAULT,
            seed: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let sigmas = [
            ("gflops_sd", self.gflops_sd),
            ("cpu_logsigma", self.cpus.log_sigma),
            ("ram_logsigma", self.ram.log_sigma),
            ("hdd_logsigma", self.hdd.log_sigma),
        ];
        for (name, v) in sigmas {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::param(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        let mus = [
            ("gflops_mean", self.gflops_mean),
            ("cpu_logmu", self.cpus.log_mu),
            ("ram_logmu", self.ram.log_mu),
            ("hdd_logmu", self.hdd.log_mu),
        ];
        for (name, v) in mus {
            if !v.is_finite() {
                return Err(Error::param(format!("{name} must be finite, got {v}")));
            }
        }
        if !(self.gflops_floor > 0.0 && self.gflops_floor.is_finite()) {
            return Err(Error::param("gflops_floor must be > 0"));
        }
        // Rejection sampling needs a non-negligible mass above the floor.
        let mass_above = if self.gflops_sd == 0.0 {
            if self.gflops_mean >= self.gflops_floor {
                1.0
            } else {
                0.0
            }
        } else {
            let z = (self.gflops_mean - self.gflops_floor) / self.gflops_sd;
            Normal::new(0.0, 1.0).expect("unit normal").cdf(z)
        };
        if mass_above < 1e-6 {
            return Err(Error::param(format!(
                "gflops_floor {} leaves no probability mass above it",
                self.gflops_floor
            )));
        }
        if !(self.churn.on_rate >= 0.0 && self.churn.off_rate >= 0.0) {
            return Err(Error::param("churn rates must be >= 0"));
        }
        Ok(())
    }
}

/// One host's attributes before CPU snapping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawHostDraw {
    pub gflops: f64,
    pub cpus: f64,
    pub ram_gb: f64,
    pub hdd_gb: f64,
}

/// Draws the continuous attributes of every host in order.
pub fn draw_raw_attributes(params: &PopulationParams) -> Result<Vec<RawHostDraw>> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let draws = (0..params.n_hosts)
        .map(|_| {
            let gflops = draw_truncated_normal(&mut rng, params.gflops_mean, params.gflops_sd, params.gflops_floor);
            RawHostDraw {
                gflops,
                cpus: params.cpus.draw(&mut rng),
                ram_gb: params.ram.draw(&mut rng),
                hdd_gb: params.hdd.draw(&mut rng),
            }
        })
        .collect();
    Ok(draws)
}

/// Samples a host population. Identical parameters, seed included, give a
/// bit-identical population.
pub fn sample_hosts(params: &PopulationParams) -> Result<HostPopulation> {
    let hosts = draw_raw_attributes(params)?
        .into_iter()
        .enumerate()
        .map(|(i, raw)| HostSpec {
            id: i as u32,
            gflops: raw.gflops,
            n_cpus: snap_cpus(raw.cpus),
            ram_gb: raw.ram_gb,
            hdd_gb: raw.hdd_gb,
            on_rate: params.churn.on_rate,
            off_rate: params.churn.off_rate,
        })
        .collect();
    Ok(HostPopulation { hosts })
}

fn draw_truncated_normal<R: Rng + ?Sized>(rng: &mut R, mean: f64, sd: f64, floor: f64) -> f64 {
    loop {
        let z: f64 = rng.sample(StandardNormal);
        let x = mean + sd * z;
        if x >= floor {
            return x;
        }
    }
}

/// Nearest member of [`CPU_COUNTS`]; exact midpoints go to the smaller value.
pub fn snap_cpus(x: f64) -> u32 {
    let mut best = CPU_COUNTS[0];
    let mut best_dist = f64::INFINITY;
    for &c in &CPU_COUNTS {
        let d = (x - c as f64).abs();
        if d < best_dist {
            best = c;
            best_dist = d;
        }
    }
    best
}

/// A multiplicative growth path: `v[t+1] = v[t] * f_t`, `ln f_t ~ N(logmu, logsigma²)`.
/// The returned path has `n_steps + 1` entries starting at `initial`.
pub fn gibrat_trajectory<R: Rng + ?Sized>(
    initial: f64,
    n_steps: usize,
    factor_logmu: f64,
    factor_logsigma: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if !(initial > 0.0 && initial.is_finite()) {
        return Err(Error::param(format!("initial value must be > 0, got {initial}")));
    }
    if !(factor_logsigma >= 0.0) || !factor_logmu.is_finite() {
        return Err(Error::param("factor_logsigma must be >= 0 and factor_logmu finite"));
    }
    let factor = LogNormalParams::new(factor_logmu, factor_logsigma);
    let mut path = Vec::with_capacity(n_steps + 1);
    let mut value = initial;
    path.push(value);
    for _ in 0..n_steps {
        value *= factor.draw(rng);
        path.push(value);
    }
    Ok(path)
}

/// Mean, standard deviation (divisor `n`), min and max of one attribute.
/// With `count == 0` every statistic is NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttributeSummary {
    pub mean: f64,
    pub sd: f64,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl AttributeSummary {
    pub fn from_values(values: impl IntoIterator<Item = f64> + Clone) -> Self {
        let (count, sum, min, max) = values.clone().into_iter().fold(
            (0usize, 0.0, f64::INFINITY, f64::NEG_INFINITY),
            |(n, s, lo, hi), v| (n + 1, s + v, lo.min(v), hi.max(v)),
        );
        if count == 0 {
            return Self {
                mean: f64::NAN,
                sd: f64::NAN,
                min: f64::NAN,
                max: f64::NAN,
                count: 0,
            };
        }
        let mean = sum / count as f64;
        let var = values.into_iter().map(|v| (v - mean).powi(2)).sum::<f64>() / count as f64;
        Self {
            // Rounding can put a constant column's mean one ulp outside [min, max].
            mean: mean.clamp(min, max),
            sd: var.sqrt(),
            min,
            max,
            count,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopulationSummary {
    pub gflops: AttributeSummary,
    pub n_cpus: AttributeSummary,
    pub ram_gb: AttributeSummary,
    pub hdd_gb: AttributeSummary,
}

pub fn population_summary(pop: &HostPopulation) -> PopulationSummary {
    let hosts = &pop.hosts;
    PopulationSummary {
        gflops: AttributeSummary::from_values(hosts.iter().map(|h| h.gflops)),
        n_cpus: AttributeSummary::from_values(hosts.iter().map(|h| h.n_cpus as f64)),
        ram_gb: AttributeSummary::from_values(hosts.iter().map(|h| h.ram_gb)),
        hdd_gb: AttributeSummary::from_values(hosts.iter().map(|h| h.hdd_gb)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{moment_summary, Sample};

    fn log_skewness(values: impl Iterator<Item = f64>) -> f64 {
        let sample = Sample::new(values.map(f64::ln).collect(), "log").unwrap();
        moment_summary(&sample).unwrap().skewness
    }

    #[test]
    fn shipped_calibrations_match_search() {
        let cases = [
            (REGISTERED_CPUS, 4.30, 4.95, true),
            (REGISTERED_RAM, 6.68, 12.15, false),
            (REGISTERED_HDD, 257.0, 371.0, false),
            (LAMMPS_CPUS, 6.7, 10.0, true),
            (LAMMPS_RAM, 16.0, 22.0, false),
            (LAMMPS_HDD, 210.0, 320.0, false),
        ];
        for (shipped, mean, sd, snap) in cases {
            let cal = calibrate_lognormal(mean, sd, snap).unwrap();
            assert!((cal.params.log_mu - shipped.log_mu).abs() < 1e-12, "{cal:?}");
            assert!((cal.params.log_sigma - shipped.log_sigma).abs() < 1e-12, "{cal:?}");
            assert!((cal.mean / mean - 1.0).abs() < 1e-3 && (cal.sd / sd - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn empty_population() {
        let params = PopulationParams {
            n_hosts: 0,
            ..PopulationParams::registered()
        };
        let pop = sample_hosts(&params).unwrap();
        assert!(pop.is_empty());
        let summary = population_summary(&pop);
        assert_eq!(summary.gflops.count, 0);
        assert!(summary.gflops.mean.is_nan());
    }

    #[test]
    fn registered_gflops_mean_within_three_standard_errors() {
        let pop = sample_hosts(&PopulationParams::registered()).unwrap();
        assert_eq!(pop.len(), 4161);
        let s = population_summary(&pop);
        assert!((s.gflops.mean - 2.25).abs() < 0.036, "mean {}", s.gflops.mean);
    }

    #[test]
    fn degenerate_cpu_lognormal_snaps_to_constant() {
        let params = PopulationParams {
            n_hosts: 500,
            cpus: LogNormalParams::new(4f64.ln(), 0.0),
            ..PopulationParams::registered()
        };
        let pop = sample_hosts(&params).unwrap();
        assert!(pop.hosts.iter().all(|h| h.n_cpus == 4));
    }

    #[test]
    fn invalid_params_are_rejected() {
        let mut p = PopulationParams::registered();
        p.gflops_sd = -0.1;
        assert!(matches!(sample_hosts(&p), Err(Error::Parameter(_))));
        let mut p = PopulationParams::registered();
        p.ram.log_sigma = -1.0;
        assert!(matches!(sample_hosts(&p), Err(Error::Parameter(_))));
        let mut p = PopulationParams::registered();
        p.gflops_floor = 50.0;
        assert!(matches!(sample_hosts(&p), Err(Error::Parameter(_))));
    }

    #[test]
    fn snapping_prefers_nearest_then_smaller() {
        assert_eq!(snap_cpus(0.01), 1);
        assert_eq!(snap_cpus(1.5), 1);
        assert_eq!(snap_cpus(1.51), 2);
        assert_eq!(snap_cpus(5.0), 4);
        assert_eq!(snap_cpus(12.0), 8);
        assert_eq!(snap_cpus(12.01), 16);
        assert_eq!(snap_cpus(1e6), 128);
    }

    #[test]
    fn sampled_hosts_respect_invariants() {
        let params = PopulationParams {
            n_hosts: 2000,
            gflops_mean: 0.5,
            gflops_sd: 1.0,
            gflops_floor: 0.1,
            seed: 99,
            ..PopulationParams::registered()
        };
        let pop = sample_hosts(&params).unwrap();
        for h in &pop.hosts {
            assert!(h.gflops >= 0.1);
            h.validate().unwrap();
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let p = PopulationParams::used_in_lammps();
        assert_eq!(sample_hosts(&p).unwrap(), sample_hosts(&p).unwrap());
        let other = PopulationParams { seed: 2, ..p.clone() };
        assert_ne!(sample_hosts(&p).unwrap(), sample_hosts(&other).unwrap());
    }

    #[test]
    fn lammps_population_mean_matches_table() {
        let pop = sample_hosts(&PopulationParams::used_in_lammps()).unwrap();
        assert_eq!(pop.len(), 189);
        let s = population_summary(&pop);
        assert!((2.0..=2.6).contains(&s.gflops.mean), "{}", s.gflops.mean);
    }

    #[test]
    fn two_point_summary() {
        let pop = HostPopulation::new(vec![HostSpec::dedicated(0, 2.0, 1), HostSpec::dedicated(1, 4.0, 2)]);
        let s = population_summary(&pop);
        assert_eq!(s.gflops.mean, 3.0);
        assert_eq!(s.gflops.sd, 1.0);
        assert_eq!(s.n_cpus.min, 1.0);
        assert_eq!(s.n_cpus.max, 2.0);

        let single = HostPopulation::new(vec![HostSpec::dedicated(0, 2.5, 4)]);
        assert_eq!(population_summary(&single).gflops.sd, 0.0);
    }

    #[test]
    fn pre_snap_draws_are_log_symmetric() {
        let params = PopulationParams {
            n_hosts: 10_000,
            seed: 11,
            ..PopulationParams::registered()
        };
        let raw = draw_raw_attributes(&params).unwrap();
        for (name, skew) in [
            ("cpus", log_skewness(raw.iter().map(|r| r.cpus))),
            ("ram", log_skewness(raw.iter().map(|r| r.ram_gb))),
            ("hdd", log_skewness(raw.iter().map(|r| r.hdd_gb))),
        ] {
            assert!(skew.abs() < 0.1, "{name}: {skew}");
        }
    }

    #[test]
    fn gibrat_unit_factor_is_constant() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let path = gibrat_trajectory(4.0, 5, 0.0, 0.0, &mut rng).unwrap();
        assert_eq!(path, vec![4.0; 6]);
    }

    #[test]
    fn gibrat_doubling() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let path = gibrat_trajectory(1.0, 3, 2f64.ln(), 0.0, &mut rng).unwrap();
        let expected = [1.0, 2.0, 4.0, 8.0];
        for (got, want) in path.iter().zip(expected) {
            assert!((got - want).abs() < 1e-12 * want, "{path:?}");
        }
    }

    #[test]
    fn gibrat_zero_sigma_is_exactly_geometric() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let path = gibrat_trajectory(3.0, 20, 0.05, 0.0, &mut rng).unwrap();
        let f = 0.05f64.exp();
        let mut v = 3.0;
        for p in &path {
            assert_eq!(*p, v);
            v *= f;
        }
    }

    #[test]
    fn gibrat_rejects_nonpositive_start() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(gibrat_trajectory(0.0, 3, 0.0, 0.1, &mut rng).is_err());
        assert!(gibrat_trajectory(-1.0, 3, 0.0, 0.1, &mut rng).is_err());
    }

    #[test]
    fn gibrat_log_final_values_are_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let finals: Vec<f64> = (0..10_000)
            .map(|_| *gibrat_trajectory(1.0, 50, 0.0, 0.1, &mut rng).unwrap().last().unwrap())
            .collect();
        let skew = log_skewness(finals.into_iter());
        assert!(skew.abs() < 0.1, "{skew}");
    }
}
