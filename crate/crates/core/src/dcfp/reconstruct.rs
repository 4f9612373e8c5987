//! Forward replay of the RA system over recorded randomness, logging
//! service initiations in time order.

use std::cmp::Ordering;
use std::collections::VecDeque;

use super::Scenario;

/// Where a node's replay starts: it serves the arrivals `−depth, …` routed to it,
/// and its server is free from `busy_until` on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeStart {
    pub depth: usize,
    pub busy_until: f64,
}

impl NodeStart {
    /// Empty node just before arrival `−depth`.
    pub fn idle(scn: &Scenario, depth: usize) -> Self {
        Self { depth, busy_until: scn.time(depth) }
    }
}

/// One service initiation in the RA replay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Initiation {
    pub time: f64,
    /// Arrival index of the customer: `−j` for backward arrivals, `k ≥ 0` forward.
    pub arrival: i64,
    pub node: usize,
    pub service: f64,
    /// The customer waited, so the initiation was triggered by a departure.
    pub queued: bool,
}

impl Initiation {
    // departures come before arrivals at equal times, then lower node first
    fn order(&self, other: &Self) -> Ordering {
        self.time
            .total_cmp(&other.time)
            .then((!self.queued).cmp(&!other.queued))
            .then(self.node.cmp(&other.node))
    }
}

/// Result of [`reconstruct_ra_forward`].
#[derive(Debug, Clone, PartialEq)]
pub struct InitiationLog {
    /// Boundary depth `κ`: initiations are logged after arrival `−κ`.
    pub window: usize,
    /// Customers that arrived before `−κ` and were still waiting when it arrived.
    pub waiting: usize,
    /// Total service of those waiting customers.
    pub waiting_work: f64,
    /// Per-node RA workload found by arrival `−κ` (at time 0 when `κ = 0`).
    pub workload: Vec<f64>,
    /// Initiations after the boundary, in time order.
    pub initiations: Vec<Initiation>,
    /// `(customers in system, total work)` found by arrivals `−κ, …, −1`.
    pub found: Vec<(usize, f64)>,
    /// Forward arrivals consumed by the replay.
    pub forward_used: usize,
}

impl InitiationLog {
    /// Services for arrivals `−κ, …, −1` in FIFO order: the initiations right
    /// after those of the customers already waiting at the boundary.
    pub fn services(&self) -> Vec<f64> {
        self.initiations[self.waiting..self.waiting + self.window].iter().map(|x| x.service).collect()
    }

    /// Total RA work at the boundary when the `k`-th initiated service is
    /// counted as arriving with the `k`-th customer: the services of customers
    /// still waiting are replaced by the first initiations after the boundary.
    pub fn initiation_work(&self) -> f64 {
        let head: f64 = self.initiations[..self.waiting].iter().map(|x| x.service).sum();
        self.workload.iter().sum::<f64>() - self.waiting_work + head
    }
}

struct Node {
    free: f64,
    finishes: VecDeque<f64>,
}

impl Node {
    /// Serve one customer arriving at `t`; returns its start time.
    fn serve(&mut self, t: f64, s: f64) -> f64 {
        let start = self.free.max(t);
        self.free = start + s;
        self.finishes.push_back(self.free);
        start
    }

    fn found(&mut self, t: f64) -> (usize, f64) {
        while self.finishes.front().is_some_and(|&f| f <= t) {
            self.finishes.pop_front();
        }
        (self.finishes.len(), (self.free - t).max(0.0))
    }
}

/// Replay the RA system from per-node starting points and log initiations after
/// arrival `−window`, extending forward past time 0 until the first
/// `waiting + window` of them are settled.
pub fn reconstruct_ra_forward(scn: &mut Scenario, starts: &[NodeStart], window: usize) -> InitiationLog {
    let c = scn.servers();
    assert_eq!(starts.len(), c);
    let depth = starts.iter().map(|s| s.depth).max().unwrap_or(0);
    assert!(scn.depth() >= depth, "scenario shorter than the replay depth");
    assert!(starts.iter().all(|s| s.depth >= window), "a node starts after the boundary");

    let mut nodes: Vec<Node> =
        starts.iter().map(|s| Node { free: s.busy_until, finishes: VecDeque::new() }).collect();
    let boundary = scn.time(window);
    let mut log = InitiationLog {
        window,
        waiting: 0,
        waiting_work: 0.0,
        workload: Vec::new(),
        initiations: Vec::new(),
        found: Vec::with_capacity(window),
        forward_used: 0,
    };

    for j in (1..=depth).rev() {
        let t = scn.time(j);
        if j <= window {
            let mut q = 0;
            let mut v = 0.0;
            for node in nodes.iter_mut() {
                let (qi, vi) = node.found(t);
                q += qi;
                v += vi;
                if j == window {
                    log.workload.push(vi);
                }
            }
            log.found.push((q, v));
        }
        let i = scn.u(j);
        if j > starts[i].depth {
            continue;
        }
        let s = scn.s(j);
        let start = nodes[i].serve(t, s);
        let init = Initiation { time: start, arrival: -(j as i64), node: i, service: s, queued: start > t };
        if j <= window {
            log.initiations.push(init);
        } else if start > boundary {
            log.waiting += 1;
            log.waiting_work += s;
            log.initiations.push(init);
        }
    }
    if window == 0 {
        log.workload = nodes.iter().map(|n| n.free.max(0.0)).collect();
    }

    let need = log.waiting + window;
    if need == 0 {
        return log;
    }
    let mut k = 0;
    let mut t_next = 0.0;
    loop {
        log.initiations.sort_by(Initiation::order);
        if log.initiations.len() >= need && log.initiations[need - 1].time < t_next {
            break;
        }
        let (gap, s, i) = scn.forward(k);
        let start = nodes[i].serve(t_next, s);
        log.initiations.push(Initiation { time: start, arrival: k as i64, node: i, service: s, queued: start > t_next });
        k += 1;
        t_next += gap;
    }
    log.forward_used = k;
    log
}
