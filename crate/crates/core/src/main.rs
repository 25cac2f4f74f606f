use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gridsweep::analyze::{analyze_ensemble, analyze_sample, write_report, AnalyzeOptions, Observable};
use gridsweep::config::KvConfig;
use gridsweep::gridsim::{run_scenario, speedup_report, write_regimes_csv, write_speedup_csv, write_trace_csv, Scenario};
use gridsweep::hosts::{
    calibrate_lognormal, params_from_config, population_summary, read_population_csv, sample_hosts,
    write_population_csv, AttributeSummary, PopulationParams,
};
use gridsweep::output::StagedOutputs;
use gridsweep::stats::Sample;
use gridsweep::sweep::{sweep_run, SweepSpec};
use gridsweep::Error;

/// Desktop-grid parameter sweep toolkit.
#[derive(Parser)]
#[command(name = "gridsweep", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Volunteer-host populations.
    #[command(subcommand)]
    Hosts(HostsCmd),
    /// Grid simulation.
    #[command(subcommand)]
    Sim(SimCmd),
    /// Local MD ensemble sweeps.
    #[command(subcommand)]
    Sweep(SweepCmd),
    /// Statistical analysis of one observable across a sweep.
    Analyze(AnalyzeArgs),
}

#[derive(Subcommand)]
enum HostsCmd {
    /// Draw a host population and write hosts.csv.
    Sample(HostsSampleArgs),
    /// Summarize a population CSV (or a freshly sampled one) into host_summary.csv.
    Summary(HostsSummaryArgs),
    /// Fit log-normal parameters to a target mean and sd; writes calibration.csv.
    Calibrate(CalibrateArgs),
}

#[derive(Args)]
struct Common {
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct HostsSampleArgs {
    #[command(flatten)]
    common: Common,
    /// Overrides the number of hosts.
    #[arg(long)]
    n_hosts: Option<usize>,
}

#[derive(Args)]
struct HostsSummaryArgs {
    #[command(flatten)]
    common: Common,
    /// Population CSV to summarize; without it a population is sampled from --config.
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    mean: f64,
    #[arg(long)]
    sd: f64,
    /// Match the moments after snapping onto the CPU-count set.
    #[arg(long)]
    snap: bool,
}

#[derive(Subcommand)]
enum SimCmd {
    /// Run a scenario; writes trace.csv, speedup.csv and regimes.csv.
    Run(SimRunArgs),
}

#[derive(Args)]
struct SimRunArgs {
    /// Scenario file.
    #[arg(long, alias = "scenario")]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Overrides the scenario's simulation seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum SweepCmd {
    /// Run an ensemble of MD tensile jobs on the local worker pool.
    Run(SweepRunArgs),
}

#[derive(Args)]
struct SweepRunArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    n_realizations: Option<usize>,
    #[arg(long)]
    parallelism: Option<usize>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    common: Common,
    /// Sweep output directory holding job_*.csv files, or a one-column
    /// sample CSV (header, then one value per line).
    #[arg(long)]
    input: PathBuf,
    /// Strain checkpoint to analyze (sweep directories only).
    #[arg(long)]
    strain: Option<f64>,
    /// c_hcp, c_unk or sigma_top.
    #[arg(long)]
    observable: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// 2 for bad input (usage, parameters, parse errors), 1 for runtime failures.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parameter(_) | Error::Parse { .. } => 2,
        _ => 1,
    }
}

fn load_config(path: &Option<PathBuf>) -> gridsweep::Result<Option<KvConfig>> {
    path.as_ref().map(KvConfig::load).transpose()
}

fn host_params(common: &Common) -> gridsweep::Result<PopulationParams> {
    let mut params = match load_config(&common.config)? {
        Some(cfg) => params_from_config(&cfg)?,
        None => PopulationParams::registered(),
    };
    if let Some(seed) = common.seed {
        params.seed = seed;
    }
    Ok(params)
}

fn run(command: Command) -> gridsweep::Result<()> {
    match command {
        Command::Hosts(HostsCmd::Sample(args)) => {
            let mut params = host_params(&args.common)?;
            if let Some(n) = args.n_hosts {
                params.n_hosts = n;
            }
            let pop = sample_hosts(&params)?;
            let mut staged = StagedOutputs::new(&args.common.out)?;
            staged.write("hosts.csv", |w| write_population_csv(&pop, w))?;
            report_written(staged.commit()?);
        }
        Command::Hosts(HostsCmd::Summary(args)) => {
            let pop = match &args.input {
                Some(path) => read_population_csv(path)?,
                None => sample_hosts(&host_params(&args.common)?)?,
            };
            let s = population_summary(&pop);
            let rows: [(&str, AttributeSummary); 4] =
                [("gflops", s.gflops), ("n_cpus", s.n_cpus), ("ram_gb", s.ram_gb), ("hdd_gb", s.hdd_gb)];
            let mut staged = StagedOutputs::new(&args.common.out)?;
            staged.write("host_summary.csv", |w| {
                writeln!(w, "attribute,count,mean,sd,min,max")?;
                for (name, a) in &rows {
                    writeln!(w, "{name},{},{},{},{},{}", a.count, a.mean, a.sd, a.min, a.max)?;
                }
                Ok(())
            })?;
            for (name, a) in &rows {
                println!("{name:>7}: {:.3} ± {:.3}  [{:.3}, {:.3}]", a.mean, a.sd, a.min, a.max);
            }
            report_written(staged.commit()?);
        }
        Command::Hosts(HostsCmd::Calibrate(args)) => {
            let cal = calibrate_lognormal(args.mean, args.sd, args.snap)?;
            let mut staged = StagedOutputs::new(&args.out)?;
            staged.write("calibration.csv", |w| {
                writeln!(w, "target_mean,target_sd,snap,log_mu,log_sigma,mean,sd,objective")?;
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{}",
                    args.mean, args.sd, args.snap, cal.params.log_mu, cal.params.log_sigma, cal.mean, cal.sd, cal.objective
                )
            })?;
            println!(
                "log_mu = {}, log_sigma = {} -> {:.4} ± {:.4}",
                cal.params.log_mu, cal.params.log_sigma, cal.mean, cal.sd
            );
            report_written(staged.commit()?);
        }
        Command::Sim(SimCmd::Run(args)) => {
            let scenario = Scenario::load(&args.config)?;
            let pop = scenario.population()?;
            let seed = args.seed.unwrap_or(scenario.seed);
            let trace = run_scenario(&scenario.tasks, &pop, seed, &scenario.policy)?;
            let rows = speedup_report(&trace)?;
            let mut staged = StagedOutputs::new(&args.out)?;
            staged.write("trace.csv", |w| write_trace_csv(&trace, w))?;
            staged.write("speedup.csv", |w| write_speedup_csv(&rows, w))?;
            let mut regimes = Vec::new();
            write_regimes_csv(&trace, &mut regimes)?;
            staged.write("regimes.csv", |w| w.write_all(&regimes))?;
            for r in &rows {
                println!("{:<22} {:>9.2} d {:>8.2} d  x{:.2}", r.label, r.t_seq_days, r.t_dg_days, r.speedup);
            }
            report_written(staged.commit()?);
        }
        Command::Sweep(SweepCmd::Run(args)) => {
            let mut spec = SweepSpec::new(&args.common.out);
            if let Some(cfg) = load_config(&args.common.config)? {
                spec.apply_config(&cfg)?;
            }
            if let Some(seed) = args.common.seed {
                spec.base_seed = seed;
            }
            if let Some(n) = args.n_realizations {
                spec.n_realizations = n;
            }
            if let Some(p) = args.parallelism {
                spec.parallelism = p;
            }
            let ledger = sweep_run(&spec)?;
            println!(
                "{} ok, {} failed; {:.1} s wall, {:.1} s sequential estimate, speedup {:.2} on {} workers",
                ledger.n_ok(),
                ledger.n_failed(),
                ledger.t_wall_s,
                ledger.t_seq_est_s,
                ledger.realized_speedup,
                ledger.parallelism
            );
            if ledger.n_ok() == 0 {
                return Err(Error::Sweep(format!("all {} jobs failed; see ledger.csv", ledger.jobs.len())));
            }
        }
        Command::Analyze(args) => {
            let cfg = load_config(&args.common.config)?;
            let mut options = AnalyzeOptions::default();
            let mut strain = None;
            let mut observable = Observable::CUnk;
            if let Some(cfg) = &cfg {
                cfg.check_known(&["strain", "observable", "ks_resamples", "bootstrap_resamples", "seed"])?;
                strain = cfg.get::<f64>("strain")?;
                if let Some(o) = cfg.get_str("observable") {
                    observable = o.parse()?;
                }
                if let Some(n) = cfg.get::<usize>("ks_resamples")? {
                    options.ks_resamples = n;
                }
                if let Some(n) = cfg.get::<usize>("bootstrap_resamples")? {
                    options.bootstrap_resamples = n;
                }
                if let Some(s) = cfg.get::<u64>("seed")? {
                    options.seed = s;
                }
            }
            if let Some(s) = args.strain {
                strain = Some(s);
            }
            if let Some(o) = &args.observable {
                observable = o.parse()?;
            }
            if let Some(s) = args.common.seed {
                options.seed = s;
            }
            let a = if args.input.is_file() {
                let a = analyze_sample(&Sample::read_csv(&args.input)?, &options)?;
                write_report(&a, &args.common.out)?;
                a
            } else {
                let strain = strain.ok_or_else(|| Error::Parameter("--strain is required".into()))?;
                analyze_ensemble(&args.input, strain, observable, &options, &args.common.out)?
            };
            let p = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.4}"));
            println!(
                "{} (n = {}): {}  [p_normal {}, p_weibull {}]",
                a.label,
                a.n(),
                a.verdict,
                p(a.p_normal()),
                p(a.p_weibull())
            );
            eprintln!("wrote reports to {}", args.common.out.display());
        }
    }
    Ok(())
}

fn report_written(paths: Vec<PathBuf>) {
    for p in paths {
        eprintln!("wrote {}", p.display());
    }
}
