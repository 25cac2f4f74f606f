//! Discrete-event simulation of a desktop-grid master.
//!
//! Hosts pull work whenever they are attached and have a free CPU slot.
//! Jobs of all shared tasks sit in per-task FIFO queues served round-robin;
//! dedicated tasks run one after another once every shared job has
//! completed. A host that detaches loses its running jobs, which go back
//! to the front of their queue and restart from zero elsewhere.

mod engine;
mod regimes;
mod report;
mod scenario;

pub use engine::run_scenario;
pub use regimes::{segment_regimes, RegimeSegmentation};
pub use report::{speedup_report, write_regimes_csv, write_speedup_csv, write_trace_csv, SpeedupRow, TRACE_HEADER};
pub use scenario::{parse_scenario, PopulationSource, Scenario};

use crate::error::{Error, Result};
use crate::hosts::{HostSpec, LogNormalParams};

pub const SECONDS_PER_HOUR: f64 = 3600.0;
pub const SECONDS_PER_DAY: f64 = 86_400.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TaskMode {
    /// Competes with the other shared tasks for every host.
    Shared,
    /// Runs alone after all shared tasks have finished.
    Dedicated,
}

impl TaskMode {
    pub fn name(self) -> &'static str {
        match self {
            TaskMode::Shared => "shared",
            TaskMode::Dedicated => "dedicated",
        }
    }
}

impl std::str::FromStr for TaskMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "shared" => Ok(TaskMode::Shared),
            "dedicated" => Ok(TaskMode::Dedicated),
            other => Err(format!("unknown task mode `{other}` (expected shared|dedicated)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskSpec {
    pub name: String,
    /// Runtime of one job on the reference host, seconds.
    pub t_job_ref_s: f64,
    pub n_jobs: usize,
    pub mode: TaskMode,
}

impl TaskSpec {
    pub fn new(name: impl Into<String>, t_job_ref_s: f64, n_jobs: usize, mode: TaskMode) -> Self {
        Self {
            name: name.into(),
            t_job_ref_s,
            n_jobs,
            mode,
        }
    }

    /// Time to run every job back to back on the reference host.
    pub fn t_seq_s(&self) -> f64 {
        self.n_jobs as f64 * self.t_job_ref_s
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_jobs < 1 {
            return Err(Error::param(format!("task `{}`: n_jobs must be >= 1", self.name)));
        }
        if !(self.t_job_ref_s > 0.0 && self.t_job_ref_s.is_finite()) {
            return Err(Error::param(format!("task `{}`: t_job_ref must be > 0", self.name)));
        }
        Ok(())
    }
}

/// The machine on which job runtimes are quoted: one 2.7 GHz core at 2514 MFLOP/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceHost {
    pub gflops: f64,
}

impl Default for ReferenceHost {
    fn default() -> Self {
        Self { gflops: 2.514 }
    }
}

/// Runtime of one job of `task` on `host`, scaling linearly with FLOP rate.
pub fn scaled_runtime(task: &TaskSpec, host: &HostSpec, reference: &ReferenceHost) -> f64 {
    task.t_job_ref_s * reference.gflops / host.gflops
}

/// `T_seq / T_dg` from raw durations.
pub fn speedup_from_durations(t_seq: f64, t_dg: f64) -> f64 {
    t_seq / t_dg
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyConfig {
    pub reference: ReferenceHost,
    /// Simulated time after which unfinished work is a stall, seconds.
    pub horizon_s: f64,
    /// Fixed delay between dispatch and job start, seconds.
    pub dispatch_latency_s: f64,
    /// Per-result log-normal delay (seconds) between finishing and the
    /// master receiving the result. `None` reports instantly.
    pub report_delay_s: Option<LogNormalParams>,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        Self {
            reference: ReferenceHost::default(),
            horizon_s: 365.0 * SECONDS_PER_DAY,
            dispatch_latency_s: 0.0,
            report_delay_s: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    Dispatch,
    Complete,
    /// A running job lost to a detaching host, back in its queue.
    Requeue,
    HostUp,
    HostDown,
}

impl EventKind {
    pub fn name(self) -> &'static str {
        match self {
            EventKind::Dispatch => "dispatch",
            EventKind::Complete => "complete",
            EventKind::Requeue => "requeue",
            EventKind::HostUp => "host_up",
            EventKind::HostDown => "host_down",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEvent {
    pub time_s: f64,
    pub kind: EventKind,
    /// Global job id; `None` for host events.
    pub job_id: Option<usize>,
    /// Index into [`SimTrace::tasks`]; `None` for host events.
    pub task: Option<usize>,
    pub host_id: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskOutcome {
    pub spec: TaskSpec,
    pub dispatched: usize,
    pub requeued: usize,
    pub completed: usize,
    pub first_dispatch_s: Option<f64>,
    pub last_complete_s: Option<f64>,
}

impl TaskOutcome {
    pub fn is_complete(&self) -> bool {
        self.completed == self.spec.n_jobs
    }

    /// Makespan from first dispatch to last completion.
    pub fn t_dg_s(&self) -> Option<f64> {
        match (self.first_dispatch_s, self.last_complete_s) {
            (Some(a), Some(b)) if self.is_complete() => Some(b - a),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub events: Vec<TraceEvent>,
    pub tasks: Vec<TaskOutcome>,
    pub reference: ReferenceHost,
}

impl SimTrace {
    pub fn task_index(&self, name: &str) -> Result<usize> {
        self.tasks
            .iter()
            .position(|t| t.spec.name == name)
            .ok_or_else(|| Error::UnknownTask(name.to_string()))
    }

    pub fn end_time_s(&self) -> f64 {
        self.events.last().map_or(0.0, |e| e.time_s)
    }

    fn completed_outcome(&self, name: &str) -> Result<&TaskOutcome> {
        let task = &self.tasks[self.task_index(name)?];
        if !task.is_complete() {
            return Err(Error::IncompleteTask {
                task: name.to_string(),
                completed: task.completed,
                total: task.spec.n_jobs,
            });
        }
        Ok(task)
    }
}

/// `T_seq / T_dg` of one task.
pub fn task_speedup(trace: &SimTrace, task_name: &str) -> Result<f64> {
    let task = trace.completed_outcome(task_name)?;
    let t_dg = task.t_dg_s().expect("complete task has a makespan");
    Ok(speedup_from_durations(task.spec.t_seq_s(), t_dg))
}

/// Aggregate speedup of a whole scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TotalSpeedup {
    pub n_jobs: usize,
    pub t_seq_s: f64,
    /// Shared tasks run concurrently, so their block takes the longest of
    /// their makespans; dedicated tasks run alone and add up.
    pub t_dg_s: f64,
    pub speedup: f64,
}

/// Speedup over the shared tasks only, with `T_dg` the largest shared makespan.
pub fn subtotal_speedup(trace: &SimTrace) -> Result<TotalSpeedup> {
    aggregate(trace, |mode| mode == TaskMode::Shared)
}

pub fn total_speedup(trace: &SimTrace) -> Result<TotalSpeedup> {
    aggregate(trace, |_| true)
}

fn aggregate(trace: &SimTrace, include: impl Fn(TaskMode) -> bool) -> Result<TotalSpeedup> {
    let (mut n_jobs, mut t_seq, mut shared_block, mut dedicated) = (0, 0.0, 0.0f64, 0.0);
    for task in trace.tasks.iter().filter(|t| include(t.spec.mode)) {
        let task = trace.completed_outcome(&task.spec.name)?;
        let t_dg = task.t_dg_s().expect("complete task has a makespan");
        n_jobs += task.spec.n_jobs;
        t_seq += task.spec.t_seq_s();
        match task.spec.mode {
            TaskMode::Shared => shared_block = shared_block.max(t_dg),
            TaskMode::Dedicated => dedicated += t_dg,
        }
    }
    let t_dg = shared_block + dedicated;
    Ok(TotalSpeedup {
        n_jobs,
        t_seq_s: t_seq,
        t_dg_s: t_dg,
        speedup: speedup_from_durations(t_seq, t_dg),
    })
}
