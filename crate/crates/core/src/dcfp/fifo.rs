//! Event-driven FIFO GI/GI/c simulation.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

/// Detailed FIFO state just before an arrival epoch.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DetailedState {
    /// Customers in system.
    pub q0: usize,
    /// Customers in service.
    pub l0: usize,
    /// Remaining service times of the customers in service, ascending.
    pub residuals: Vec<f64>,
    /// Customers waiting, `q0 − l0`.
    pub waiting: usize,
}

/// Output of [`fifo_run`].
#[derive(Debug, Clone, PartialEq)]
pub struct FifoRun {
    pub state: DetailedState,
    /// Sorted workload vector at `until`.
    pub workload: Vec<f64>,
    /// `(customers in system, total work)` found by each arrival.
    pub found: Vec<(usize, f64)>,
    /// Waiting time of each arrival.
    pub delays: Vec<f64>,
}

#[derive(PartialEq)]
struct Time(f64);

impl Eq for Time {}

impl Ord for Time {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&o.0)
    }
}

impl PartialOrd for Time {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}

/// Run a FIFO queue with `c` servers from time `start`, where the servers
/// listed in `residuals` are busy for that long and the rest idle, through
/// `arrivals` given as `(time, service)` in time order, and report the state
/// at `until−` (departures at `until` have already happened).
pub fn fifo_run(c: usize, start: f64, residuals: &[f64], arrivals: &[(f64, f64)], until: f64) -> FifoRun {
    assert!(residuals.len() <= c);
    let mut free = vec![start; c];
    // (start, finish) of every customer, initial ones included
    let mut spans: Vec<(f64, f64)> = Vec::with_capacity(arrivals.len() + residuals.len());
    let mut in_system = BinaryHeap::new();
    for (k, &r) in residuals.iter().enumerate() {
        free[k] = start + r;
        spans.push((start, start + r));
        in_system.push(Reverse(Time(start + r)));
    }
    let mut found = Vec::with_capacity(arrivals.len());
    let mut delays = Vec::with_capacity(arrivals.len());
    for &(t, s) in arrivals {
        while in_system.peek().is_some_and(|Reverse(Time(f))| *f <= t) {
            in_system.pop();
        }
        let work: f64 = free.iter().map(|&f| (f - t).max(0.0)).sum();
        found.push((in_system.len(), work));
        // lowest index among the earliest-free servers
        let (k, &f) = free.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap();
        let begin = f.max(t);
        free[k] = begin + s;
        spans.push((begin, begin + s));
        delays.push(begin - t);
        in_system.push(Reverse(Time(begin + s)));
    }
    let mut state = DetailedState::default();
    for &(b, f) in &spans {
        if f > until {
            state.q0 += 1;
            if b <= until {
                state.residuals.push(f - until);
            }
        }
    }
    state.residuals.sort_by(f64::total_cmp);
    state.l0 = state.residuals.len();
    state.waiting = state.q0 - state.l0;
    let mut workload: Vec<f64> = free.iter().map(|&f| (f - until).max(0.0)).collect();
    workload.sort_by(f64::total_cmp);
    FifoRun { state, workload, found, delays }
}
