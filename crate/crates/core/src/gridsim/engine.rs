use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp, StandardNormal};

use super::{
    scaled_runtime, EventKind, PolicyConfig, SimTrace, TaskMode, TaskOutcome, TaskSpec, TraceEvent,
    SECONDS_PER_HOUR,
};
use crate::error::{Error, Result};
use crate::hosts::{HostPopulation, HostSpec};

#[derive(Debug, Clone, Copy)]
enum Pending {
    Toggle { host: usize },
    Finish { host: usize, job: usize, attempt: u32 },
    Report { host: usize, job: usize },
}

#[derive(Debug)]
struct Scheduled {
    time: f64,
    seq: u64,
    what: Pending,
}

impl PartialEq for Scheduled {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Scheduled {}

impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scheduled {
    // Reversed: BinaryHeap is a max-heap and we pop the earliest event.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum JobState {
    Queued,
    Running { host: usize },
    Reporting,
    Done,
}

struct Job {
    task: usize,
    state: JobState,
    attempt: u32,
}

struct HostState {
    spec: HostSpec,
    up: bool,
    running: Vec<usize>,
    rng: ChaCha8Rng,
}

impl HostState {
    fn holding_time_s(&mut self, rate_per_hour: f64) -> Option<f64> {
        if rate_per_hour <= 0.0 {
            return None;
        }
        let hours: f64 = self.rng.sample(Exp::new(rate_per_hour).expect("positive rate"));
        Some(hours * SECONDS_PER_HOUR)
    }
}

/// Deterministic per-host stream derived from the scenario seed.
fn host_rng(seed: u64, host_index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(host_index as u64 + 1);
    rng
}

struct Engine<'a> {
    policy: &'a PolicyConfig,
    tasks: Vec<TaskOutcome>,
    jobs: Vec<Job>,
    hosts: Vec<HostState>,
    queues: Vec<VecDeque<usize>>,
    shared: Vec<usize>,
    dedicated: Vec<usize>,
    rr_cursor: usize,
    /// One entry per free CPU slot on an attached host, in request order.
    idle_slots: VecDeque<usize>,
    heap: BinaryHeap<Scheduled>,
    seq: u64,
    now: f64,
    events: Vec<TraceEvent>,
    remaining: usize,
    shared_remaining: usize,
}

impl<'a> Engine<'a> {
    fn new(tasks: &[TaskSpec], pop: &HostPopulation, seed: u64, policy: &'a PolicyConfig) -> Self {
        let mut jobs = Vec::new();
        let mut queues = Vec::with_capacity(tasks.len());
        for (t, spec) in tasks.iter().enumerate() {
            let ids: VecDeque<usize> = (jobs.len()..jobs.len() + spec.n_jobs).collect();
            jobs.extend((0..spec.n_jobs).map(|_| Job {
                task: t,
                state: JobState::Queued,
                attempt: 0,
            }));
            queues.push(ids);
        }
        let shared: Vec<usize> = (0..tasks.len()).filter(|&t| tasks[t].mode == TaskMode::Shared).collect();
        let dedicated: Vec<usize> = (0..tasks.len()).filter(|&t| tasks[t].mode == TaskMode::Dedicated).collect();
        let shared_remaining = shared.iter().map(|&t| tasks[t].n_jobs).sum();
        let hosts = pop
            .hosts
            .iter()
            .enumerate()
            .map(|(i, spec)| HostState {
                spec: spec.clone(),
                up: false,
                running: Vec::new(),
                rng: host_rng(seed, i),
            })
            .collect();
        Self {
            policy,
            tasks: tasks
                .iter()
                .map(|spec| TaskOutcome {
                    spec: spec.clone(),
                    dispatched: 0,
                    requeued: 0,
                    completed: 0,
                    first_dispatch_s: None,
                    last_complete_s: None,
                })
                .collect(),
            remaining: jobs.len(),
            jobs,
            hosts,
            queues,
            shared,
            dedicated,
            rr_cursor: 0,
            idle_slots: VecDeque::new(),
            heap: BinaryHeap::new(),
            seq: 0,
            now: 0.0,
            events: Vec::new(),
            shared_remaining,
        }
    }

    fn schedule(&mut self, time: f64, what: Pending) {
        self.heap.push(Scheduled {
            time,
            seq: self.seq,
            what,
        });
        self.seq += 1;
    }

    fn record(&mut self, kind: EventKind, job: Option<usize>, host: usize) {
        self.events.push(TraceEvent {
            time_s: self.now,
            kind,
            job_id: job,
            task: job.map(|j| self.jobs[j].task),
            host_id: self.hosts[host].spec.id,
        });
    }

    /// Initial attach state from the stationary law of each host's on/off process.
    fn init_hosts(&mut self) {
        for h in 0..self.hosts.len() {
            let host = &mut self.hosts[h];
            let p_up = host.spec.availability();
            host.up = p_up >= 1.0 || host.rng.gen::<f64>() < p_up;
            let rate = if host.up { host.spec.off_rate } else { host.spec.on_rate };
            if let Some(dt) = host.holding_time_s(rate) {
                self.schedule(dt, Pending::Toggle { host: h });
            }
            if self.hosts[h].up {
                for _ in 0..self.hosts[h].spec.n_cpus {
                    self.idle_slots.push_back(h);
                }
            }
        }
    }

    fn next_job(&mut self) -> Option<usize> {
        let n_shared = self.shared.len();
        for offset in 0..n_shared {
            let slot = (self.rr_cursor + offset) % n_shared;
            let task = self.shared[slot];
            if let Some(job) = self.queues[task].pop_front() {
                self.rr_cursor = (slot + 1) % n_shared;
                return Some(job);
            }
        }
        if self.shared_remaining > 0 {
            return None;
        }
        let current = *self.dedicated.iter().find(|&&t| !self.tasks[t].is_complete())?;
        self.queues[current].pop_front()
    }

    fn dispatch_pass(&mut self) {
        while !self.idle_slots.is_empty() {
            let Some(job) = self.next_job() else { break };
            let host = self.idle_slots.pop_front().expect("non-empty");
            self.dispatch(job, host);
        }
    }

    fn dispatch(&mut self, job: usize, host: usize) {
        let task = self.jobs[job].task;
        self.jobs[job].state = JobState::Running { host };
        self.jobs[job].attempt += 1;
        self.hosts[host].running.push(job);
        let outcome = &mut self.tasks[task];
        outcome.dispatched += 1;
        outcome.first_dispatch_s.get_or_insert(self.now);
        let runtime = scaled_runtime(&outcome.spec, &self.hosts[host].spec, &self.policy.reference);
        let finish = self.now + self.policy.dispatch_latency_s + runtime;
        let attempt = self.jobs[job].attempt;
        self.record(EventKind::Dispatch, Some(job), host);
        self.schedule(finish, Pending::Finish { host, job, attempt });
    }

    fn complete(&mut self, job: usize, host: usize) {
        let task = self.jobs[job].task;
        self.jobs[job].state = JobState::Done;
        let outcome = &mut self.tasks[task];
        outcome.completed += 1;
        outcome.last_complete_s = Some(self.now);
        if outcome.spec.mode == TaskMode::Shared {
            self.shared_remaining -= 1;
        }
        self.remaining -= 1;
        self.record(EventKind::Complete, Some(job), host);
    }

    fn handle(&mut self, what: Pending) {
        match what {
            Pending::Toggle { host } => self.toggle(host),
            Pending::Finish { host, job, attempt } => {
                let current = &self.jobs[job];
                if current.attempt != attempt || current.state != (JobState::Running { host }) {
                    return;
                }
                let state = &mut self.hosts[host];
                state.running.retain(|&j| j != job);
                self.idle_slots.push_back(host);
                match self.policy.report_delay_s {
                    None => self.complete(job, host),
                    Some(delay) => {
                        self.jobs[job].state = JobState::Reporting;
                        let z: f64 = self.hosts[host].rng.sample(StandardNormal);
                        let dt = (delay.log_mu + delay.log_sigma * z).exp();
                        self.schedule(self.now + dt, Pending::Report { host, job });
                    }
                }
            }
            Pending::Report { host, job } => self.complete(job, host),
        }
    }

    fn toggle(&mut self, host: usize) {
        let going_up = !self.hosts[host].up;
        self.hosts[host].up = going_up;
        if going_up {
            self.record(EventKind::HostUp, None, host);
            for _ in 0..self.hosts[host].spec.n_cpus {
                self.idle_slots.push_back(host);
            }
        } else {
            self.record(EventKind::HostDown, None, host);
            self.idle_slots.retain(|&h| h != host);
            let lost = std::mem::take(&mut self.hosts[host].running);
            // Restore original queue order: the earliest-dispatched job ends up first.
            for &job in lost.iter().rev() {
                let task = self.jobs[job].task;
                self.jobs[job].state = JobState::Queued;
                self.tasks[task].requeued += 1;
                self.queues[task].push_front(job);
            }
            for &job in &lost {
                self.record(EventKind::Requeue, Some(job), host);
            }
        }
        let spec = &self.hosts[host].spec;
        let rate = if going_up { spec.off_rate } else { spec.on_rate };
        if let Some(dt) = self.hosts[host].holding_time_s(rate) {
            self.schedule(self.now + dt, Pending::Toggle { host });
        }
    }

    fn run(mut self) -> Result<SimTrace> {
        self.init_hosts();
        self.dispatch_pass();
        while self.remaining > 0 {
            let Some(next) = self.heap.pop() else {
                return Err(Error::Stall {
                    time_s: self.now,
                    pending: self.remaining,
                });
            };
            if next.time > self.policy.horizon_s {
                return Err(Error::Stall {
                    time_s: self.policy.horizon_s,
                    pending: self.remaining,
                });
            }
            self.now = next.time;
            self.handle(next.what);
            self.dispatch_pass();
        }
        Ok(SimTrace {
            events: self.events,
            tasks: self.tasks,
            reference: self.policy.reference,
        })
    }
}

/// Runs `tasks` on `pop` until every job has completed.
///
/// The same inputs and seed always give the same trace. Host churn draws
/// from one random stream per host, so adding tasks does not perturb the
/// attach/detach history.
pub fn run_scenario(tasks: &[TaskSpec], pop: &HostPopulation, seed: u64, policy: &PolicyConfig) -> Result<SimTrace> {
    if pop.is_empty() {
        return Err(Error::param("host population is empty"));
    }
    if tasks.is_empty() {
        return Err(Error::param("scenario has no tasks"));
    }
    for task in tasks {
        task.validate()?;
        if tasks.iter().filter(|t| t.name == task.name).count() > 1 {
            return Err(Error::param(format!("duplicate task name `{}`", task.name)));
        }
    }
    for host in &pop.hosts {
        host.validate()?;
    }
    if !(policy.dispatch_latency_s >= 0.0) || !(policy.reference.gflops > 0.0) {
        return Err(Error::param("dispatch latency must be >= 0 and reference gflops > 0"));
    }
    Engine::new(tasks, pop, seed, policy).run()
}
