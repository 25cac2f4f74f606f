use super::{EventKind, SimTrace};
use crate::error::{Error, Result};

/// Three completion regimes of one task.
///
/// * initial: from the first dispatch until the in-flight job count first
///   reaches its peak;
/// * active: until the last dispatch;
/// * final: until the last completion, with in-flight jobs draining.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeSegmentation {
    pub t_start_s: f64,
    pub t_initial_end_s: f64,
    pub t_active_end_s: f64,
    pub t_end_s: f64,
    pub peak_in_flight: usize,
    /// Completions in the initial, active and final stage.
    pub completions: [usize; 3],
    /// Completions per hour in each stage; 0 for an empty stage.
    pub rates_per_hour: [f64; 3],
    /// The active stage has zero length (e.g. a single job).
    pub degenerate: bool,
}

impl RegimeSegmentation {
    pub fn active_rate_is_maximal(&self) -> bool {
        let [initial, active, last] = self.rates_per_hour;
        active > initial && active > last
    }
}

pub fn segment_regimes(trace: &SimTrace, task_name: &str) -> Result<RegimeSegmentation> {
    let task = trace.task_index(task_name)?;
    let outcome = &trace.tasks[task];
    if !outcome.is_complete() {
        return Err(Error::IncompleteTask {
            task: task_name.to_string(),
            completed: outcome.completed,
            total: outcome.spec.n_jobs,
        });
    }
    let events = trace.events.iter().filter(|e| e.task == Some(task));

    let mut in_flight = 0usize;
    let mut peak = 0usize;
    let mut t_peak = f64::NAN;
    let mut t_last_dispatch = f64::NAN;
    let mut completion_times = Vec::with_capacity(outcome.spec.n_jobs);
    for e in events {
        match e.kind {
            EventKind::Dispatch => {
                in_flight += 1;
                t_last_dispatch = e.time_s;
                if in_flight > peak {
                    peak = in_flight;
                    t_peak = e.time_s;
                }
            }
            EventKind::Complete => {
                in_flight -= 1;
                completion_times.push(e.time_s);
            }
            EventKind::Requeue => in_flight -= 1,
            EventKind::HostUp | EventKind::HostDown => {}
        }
    }

    let t_start = outcome.first_dispatch_s.expect("complete task was dispatched");
    let t_end = outcome.last_complete_s.expect("complete task finished");
    let bounds = [t_start, t_peak, t_last_dispatch, t_end];
    let mut completions = [0usize; 3];
    for &t in &completion_times {
        let stage = if t <= t_peak {
            0
        } else if t <= t_last_dispatch {
            1
        } else {
            2
        };
        completions[stage] += 1;
    }
    let mut rates = [0.0; 3];
    for stage in 0..3 {
        let hours = (bounds[stage + 1] - bounds[stage]) / super::SECONDS_PER_HOUR;
        if hours > 0.0 {
            rates[stage] = completions[stage] as f64 / hours;
        }
    }
    Ok(RegimeSegmentation {
        t_start_s: t_start,
        t_initial_end_s: t_peak,
        t_active_end_s: t_last_dispatch,
        t_end_s: t_end,
        peak_in_flight: peak,
        completions,
        rates_per_hour: rates,
        degenerate: t_peak == t_last_dispatch,
    })
}
