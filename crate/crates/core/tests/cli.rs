use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_gridsweep");
const CAMPAIGN: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/md_campaign.scenario");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&run(&[])), 2);
    assert_eq!(code(&run(&["sim", "run", "--out", "x"])), 2);
    assert_eq!(code(&run(&["hosts", "sample", "--out", "x", "--seed", "minus-one"])), 2);
}

#[test]
fn malformed_scenario_exits_2_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("bad.scenario");
    std::fs::write(&scenario, "[tasks]\nS=1 | 15 | many | shared\n").unwrap();
    let out = dir.path().join("out");
    let o = run(&["sim", "run", "--config", s(&scenario), "--out", s(&out)]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.scenario:2"));
    assert!(!out.exists());
}

#[test]
fn trivial_scenario_gives_unit_speedup() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("one.scenario");
    std::fs::write(
        &scenario,
        "[population]\npreset = lammps\nn_hosts = 1\ngflops_sd = 0\ngflops_mean = 2.514\non_rate = 0\noff_rate = 0\n\n[tasks]\nsolo | 60 | 1 | shared\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    assert_eq!(code(&run(&["sim", "run", "--config", s(&scenario), "--out", s(&out)])), 0);
    let speedup = read(&out.join("speedup.csv"));
    let rows: Vec<&str> = speedup.lines().collect();
    assert_eq!(rows[0], "task,t_job,n_job,t_seq_days,t_dg_days,speedup");
    assert!(rows[1].starts_with("solo,01:00,1,") && rows[1].ends_with(",1.0000"), "{speedup}");
}

#[test]
fn campaign_report_layout_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        assert_eq!(code(&run(&["sim", "run", "--config", CAMPAIGN, "--out", s(out)])), 0);
    }
    let speedup = read(&a.join("speedup.csv"));
    let labels: Vec<&str> = speedup.lines().skip(1).map(|l| l.rsplitn(6, ',').last().unwrap()).collect();
    assert_eq!(labels.len(), 10);
    assert_eq!(labels[7], "Subtotal");
    assert_eq!(labels[9], "TOTAL");
    for f in ["trace.csv", "speedup.csv", "regimes.csv"] {
        assert_eq!(read(&a.join(f)), read(&b.join(f)), "{f}");
    }
    let c = dir.path().join("c");
    assert_eq!(code(&run(&["sim", "run", "--config", CAMPAIGN, "--seed", "9", "--out", s(&c)])), 0);
    assert_ne!(read(&a.join("trace.csv")), read(&c.join("trace.csv")));
}

#[test]
fn hosts_commands() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("hosts.cfg");
    std::fs::write(&cfg, "preset = lammps\n").unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = run(&["hosts", "sample", "--config", s(&cfg), "--seed", "3", "--out", s(out)]);
        assert_eq!(code(&o), 0);
    }
    let hosts = read(&a.join("hosts.csv"));
    assert_eq!(hosts, read(&b.join("hosts.csv")));
    assert_eq!(hosts.lines().count(), 190);

    let sum = dir.path().join("sum");
    let o = run(&["hosts", "summary", "--input", s(&a.join("hosts.csv")), "--out", s(&sum)]);
    assert_eq!(code(&o), 0);
    let summary = read(&sum.join("host_summary.csv"));
    assert!(summary.starts_with("attribute,count,mean,sd,min,max\ngflops,189,"), "{summary}");

    let bad = dir.path().join("bad.cfg");
    std::fs::write(&bad, "preset = lammps\nn_hostz = 4\n").unwrap();
    assert_eq!(code(&run(&["hosts", "sample", "--config", s(&bad), "--out", s(&dir.path().join("c"))])), 2);

    let cal = dir.path().join("cal");
    let o = run(&["hosts", "calibrate", "--mean", "6.68", "--sd", "12.15", "--out", s(&cal)]);
    assert_eq!(code(&o), 0);
    assert!(read(&cal.join("calibration.csv")).lines().nth(1).unwrap().starts_with("6.68,12.15,false,"));
}

/// Ledger without the wall-time column.
fn ledger_sans_time(path: &Path) -> String {
    read(path)
        .lines()
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            [&f[..3], &f[4..]].concat().join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn sweep_and_analyze_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.cfg");
    std::fs::write(&cfg, "nx = 2\nny = 4\nnz = 2\ntarget_strain = 0.03\nequilibration_steps = 20\nn_realizations = 5\n").unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for (out, p) in [(&a, "1"), (&b, "2")] {
        let o = run(&["sweep", "run", "--config", s(&cfg), "--seed", "11", "--parallelism", p, "--out", s(out)]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    for i in 0..5 {
        let f = format!("job_{i:05}.csv");
        assert_eq!(read(&a.join(&f)), read(&b.join(&f)), "{f}");
    }
    assert_eq!(ledger_sans_time(&a.join("ledger.csv")), ledger_sans_time(&b.join("ledger.csv")));
    assert!(read(&a.join("ledger.csv")).lines().nth(1).unwrap().starts_with("0,11,ok,"));

    let (ra, rb) = (dir.path().join("ra"), dir.path().join("rb"));
    for (input, out) in [(&a, &ra), (&b, &rb)] {
        let o = run(&[
            "analyze", "--input", s(input), "--strain", "0.03", "--observable", "sigma_top", "--seed", "4", "--out", s(out),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["fits.csv", "moments.csv", "cloud.csv", "qq.csv", "sample.csv", "verdict.csv"] {
        assert_eq!(read(&ra.join(f)), read(&rb.join(f)), "{f}");
    }

    let missing = run(&["analyze", "--input", s(&a), "--strain", "0.5", "--out", s(&dir.path().join("m"))]);
    assert_eq!(code(&missing), 1);
    assert!(String::from_utf8_lossy(&missing.stderr).contains("available checkpoints"));
    assert!(!dir.path().join("m").join("verdict.csv").exists());
    let unknown = run(&["analyze", "--input", s(&a), "--strain", "0.01", "--observable", "c_bcc", "--out", s(&ra)]);
    assert_eq!(code(&unknown), 2);
}

#[test]
fn analyze_accepts_a_sample_csv() {
    let dir = tempfile::tempdir().unwrap();
    let sample = dir.path().join("widths.csv");
    let mut text = String::from("value\n");
    for i in 1..=30 {
        text += &format!("{}\n", (i as f64 / 31.0).sqrt());
    }
    std::fs::write(&sample, text).unwrap();
    let out = dir.path().join("out");
    let o = run(&["analyze", "--input", s(&sample), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(read(&out.join("verdict.csv")).lines().nth(1).unwrap().starts_with("widths,,,30,"));
}

#[test]
fn all_failed_sweep_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.cfg");
    std::fs::write(
        &cfg,
        "nx = 2\nny = 4\nnz = 2\ndt = 0.2\nstrain_rate = 50\ntemperature = 5\nequilibration_steps = 0\ntarget_strain = 1\nn_realizations = 2\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = run(&["sweep", "run", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(code(&o), 1, "{}", String::from_utf8_lossy(&o.stdout));
    assert!(read(&out.join("ledger.csv")).contains(",failed,"));
}
