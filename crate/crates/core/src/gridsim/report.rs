use std::io::Write;

use super::{segment_regimes, subtotal_speedup, total_speedup, SimTrace, TaskMode, SECONDS_PER_DAY};
use crate::csvfmt::field;
use crate::error::Result;

pub const TRACE_HEADER: &str = "time_s,kind,job_id,task,host_id";
pub const SPEEDUP_HEADER: &str = "task,t_job,n_job,t_seq_days,t_dg_days,speedup";
pub const REGIMES_HEADER: &str = "task,t_start_s,t_initial_end_s,t_active_end_s,t_end_s,peak_in_flight,\
completions_initial,completions_active,completions_final,rate_initial_per_h,rate_active_per_h,rate_final_per_h,degenerate";

/// One row of the speedup table.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeedupRow {
    pub label: String,
    /// Reference job runtime; `None` on aggregate rows.
    pub t_job_ref_s: Option<f64>,
    pub n_jobs: usize,
    pub t_seq_days: f64,
    pub t_dg_days: f64,
    pub speedup: f64,
}

/// Shared task rows, `Subtotal`, dedicated task rows, `TOTAL`.
pub fn speedup_report(trace: &SimTrace) -> Result<Vec<SpeedupRow>> {
    let task_row = |mode: TaskMode| {
        trace
            .tasks
            .iter()
            .filter(move |t| t.spec.mode == mode)
            .map(|t| -> Result<SpeedupRow> {
                let speedup = super::task_speedup(trace, &t.spec.name)?;
                let t_dg = t.t_dg_s().expect("checked by task_speedup");
                Ok(SpeedupRow {
                    label: t.spec.name.clone(),
                    t_job_ref_s: Some(t.spec.t_job_ref_s),
                    n_jobs: t.spec.n_jobs,
                    t_seq_days: t.spec.t_seq_s() / SECONDS_PER_DAY,
                    t_dg_days: t_dg / SECONDS_PER_DAY,
                    speedup,
                })
            })
    };
    let aggregate_row = |label: &str, agg: super::TotalSpeedup| SpeedupRow {
        label: label.to_string(),
        t_job_ref_s: None,
        n_jobs: agg.n_jobs,
        t_seq_days: agg.t_seq_s / SECONDS_PER_DAY,
        t_dg_days: agg.t_dg_s / SECONDS_PER_DAY,
        speedup: agg.speedup,
    };

    let mut rows = Vec::new();
    for row in task_row(TaskMode::Shared) {
        rows.push(row?);
    }
    let has_shared = !rows.is_empty();
    if has_shared {
        rows.push(aggregate_row("Subtotal", subtotal_speedup(trace)?));
    }
    for row in task_row(TaskMode::Dedicated) {
        rows.push(row?);
    }
    rows.push(aggregate_row("TOTAL", total_speedup(trace)?));
    Ok(rows)
}

fn hours_minutes(seconds: f64) -> String {
    let minutes = (seconds / 60.0).round() as u64;
    format!("{:02}:{:02}", minutes / 60, minutes % 60)
}

pub fn write_speedup_csv<W: Write>(rows: &[SpeedupRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{SPEEDUP_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{:.4},{:.4},{:.4}",
            field(&r.label),
            r.t_job_ref_s.map(hours_minutes).unwrap_or_default(),
            r.n_jobs,
            r.t_seq_days,
            r.t_dg_days,
            r.speedup
        )?;
    }
    Ok(())
}

pub fn write_trace_csv<W: Write>(trace: &SimTrace, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{TRACE_HEADER}")?;
    for e in &trace.events {
        let job = e.job_id.map(|j| j.to_string()).unwrap_or_default();
        let task = e.task.map(|t| trace.tasks[t].spec.name.as_str()).unwrap_or("");
        writeln!(out, "{},{},{},{},{}", e.time_s, e.kind.name(), job, field(task), e.host_id)?;
    }
    Ok(())
}

pub fn write_regimes_csv<W: Write>(trace: &SimTrace, mut out: W) -> Result<()> {
    let io = |e| crate::error::Error::io("regimes.csv", e);
    writeln!(out, "{REGIMES_HEADER}").map_err(io)?;
    for t in &trace.tasks {
        let r = segment_regimes(trace, &t.spec.name)?;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{:.6},{:.6},{:.6},{}",
            field(&t.spec.name),
            r.t_start_s,
            r.t_initial_end_s,
            r.t_active_end_s,
            r.t_end_s,
            r.peak_in_flight,
            r.completions[0],
            r.completions[1],
            r.completions[2],
            r.rates_per_hour[0],
            r.rates_per_hour[1],
            r.rates_per_hour[2],
            r.degenerate
        )
        .map_err(io)?;
    }
    Ok(())
}
