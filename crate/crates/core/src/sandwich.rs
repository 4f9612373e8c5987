//! Sandwiching sampler: upper and lower FIFO bound processes started at an
//! inspection depth `κ`, run forward until they meet; `κ` doubles otherwise.

use crate::dcfp::{
    fifo_run, kw_step_in_place, prepare, reconstruct_ra_forward, Backward, DetailedState, NodeStart, SamplerOptions,
};
use crate::distributions::ModelSpec;
use crate::error::{Error, Result};
use crate::rng::StreamKey;
use crate::walk::WalkStats;

/// Largest inspection depth tried before giving up.
pub const MAX_KAPPA: usize = 1 << 24;

/// Upper and lower bounding workload vectors, both sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundPair {
    pub upper: Vec<f64>,
    pub lower: Vec<f64>,
}

impl BoundPair {
    pub fn new(upper: &[f64]) -> Self {
        let mut upper = upper.to_vec();
        upper.sort_by(f64::total_cmp);
        Self { lower: vec![0.0; upper.len()], upper }
    }

    pub fn coalesced(&self) -> bool {
        self.upper == self.lower
    }

    /// Drain both vectors by `dt`.
    pub fn drain(&mut self, dt: f64) {
        for x in self.upper.iter_mut().chain(self.lower.iter_mut()) {
            *x = (*x - dt).max(0.0);
        }
    }

    /// Time until the vectors meet while draining, if they only differ by coordinates that can hit zero.
    fn meeting_time(&self) -> f64 {
        self.upper
            .iter()
            .zip(&self.lower)
            .filter(|(u, l)| u > l)
            .map(|(u, _)| *u)
            .fold(0.0, f64::max)
    }
}

/// One arrival: both bounds take the same service `s`, then drain `t`.
pub fn bound_step(pair: &BoundPair, s: f64, t: f64) -> BoundPair {
    let mut p = pair.clone();
    kw_step_in_place(&mut p.upper, s, t);
    kw_step_in_place(&mut p.lower, s, t);
    p
}

/// Bounds found by each arrival `−κ, …, −1` and at time 0, for one inspection depth.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub kappa: usize,
    /// `found[k]` is the pair seen by arrival `−(κ − k)`; the last entry is at time 0.
    pub found: Vec<BoundPair>,
}

impl Trajectory {
    /// Pair seen by arrival `−j` (`j = 0` is time 0).
    pub fn at(&self, j: usize) -> &BoundPair {
        &self.found[self.kappa - j]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SandwichSample {
    /// FIFO workload vector found by arrival 0.
    pub w: Vec<f64>,
    pub state: DetailedState,
    /// Time since the last arrival before 0.
    pub age: f64,
    pub kappa_final: usize,
    /// Meeting time of the bounds (≤ 0).
    pub tau: f64,
    pub coalesced: bool,
    pub doublings: usize,
    pub backward_arrivals: usize,
    /// Forward arrivals drawn past time 0 to settle the initiation order.
    pub forward_arrivals: usize,
    pub stats: WalkStats,
    /// Bound paths of every depth tried, when requested.
    pub trajectories: Vec<Trajectory>,
}

/// Coordinatewise upper bound for a sorted FIFO workload vector whose total
/// is at most `total` and with at most `busy` servers busy: the `k`-th
/// smallest coordinate is shared with `c − k` at least as large.
pub fn upper_start(c: usize, total: f64, busy: usize) -> Vec<f64> {
    let idle = c - busy.min(c);
    (0..c).map(|k| if k < idle { 0.0 } else { total / (c - k) as f64 }).collect()
}

struct Attempt {
    meet: Option<(usize, f64, Vec<f64>)>,
    trajectory: Trajectory,
}

// Run the bounds from −κ to 0. `checks` holds upper bounds valid at shallower
// depths; the upper path is clipped to them on the way. `meet` is (arrival −j
// whose interval holds the meeting, time, vector); j = κ + 1 means the start.
fn attempt(
    kappa: usize,
    start: &[f64],
    checks: &[(usize, Vec<f64>)],
    services: &[f64],
    gaps: &[f64],
    times: &[f64],
    full: bool,
) -> Attempt {
    let mut pair = BoundPair::new(start);
    let mut traj = Trajectory { kappa, found: Vec::new() };
    let mut meet = None;
    if pair.coalesced() {
        meet = Some((kappa + 1, times[kappa], pair.upper.clone()));
    }
    for k in 0..kappa {
        let j = kappa - k;
        if let Some((_, b)) = checks.iter().find(|(d, _)| *d == j) {
            for (u, x) in pair.upper.iter_mut().zip(b) {
                *u = u.min(*x);
            }
            if meet.is_none() && pair.coalesced() {
                meet = Some((j + 1, times[j], pair.upper.clone()));
            }
        }
        traj.found.push(pair.clone());
        if meet.is_some() && !full {
            break;
        }
        pair.upper[0] += services[k];
        pair.lower[0] += services[k];
        pair.upper.sort_by(f64::total_cmp);
        pair.lower.sort_by(f64::total_cmp);
        if meet.is_none() {
            let off = pair.meeting_time();
            if off <= gaps[j - 1] {
                let mut v = pair.upper.clone();
                v.iter_mut().for_each(|x| *x = (*x - off).max(0.0));
                meet = Some((j, times[j] + off, v));
            }
        }
        pair.drain(gaps[j - 1]);
    }
    if traj.found.len() == kappa {
        traj.found.push(pair);
    }
    Attempt { meet, trajectory: traj }
}

/// Sandwich sampler with inspection depths `κ₀, 2κ₀, …`. With `record`, the
/// bound paths of every depth are kept (and run through to time 0).
///
/// Both bounds use the initiation-ordered services of the stationary RA
/// system. The upper start at `−κ` comes from the RA customer count and the
/// RA work counted in initiation order, which dominate their FIFO
/// counterparts; the RA workload vector itself does not dominate the sorted
/// FIFO vector coordinatewise.
pub fn sample_stationary_sandwich(
    model: &ModelSpec,
    opts: &SamplerOptions,
    key: &StreamKey,
    record: bool,
) -> Result<SandwichSample> {
    if opts.kappa0 == 0 {
        return Err(Error::Config("kappa0 must be at least 1".into()));
    }
    let c = model.servers;
    let ctx = prepare(model, opts)?;
    let mut bw = Backward::new(model, &ctx, key, opts.budget);
    let mut kappa = opts.kappa0;
    let mut trajectories = Vec::new();
    let mut checks: Vec<(usize, Vec<f64>)> = Vec::new();
    let mut doublings = 0;
    loop {
        let resets = bw.resets(kappa)?;
        let scn = bw.scenario_mut();
        let starts: Vec<NodeStart> = resets.iter().map(|&d| NodeStart::idle(scn, d)).collect();
        let log = reconstruct_ra_forward(scn, &starts, kappa);
        let start = upper_start(c, log.initiation_work(), log.found[0].0);
        let services = log.services();
        let scn = bw.scenario();
        let gaps = scn.backward_t();
        let times: Vec<f64> = (0..=kappa).map(|j| scn.time(j)).collect();
        let at = attempt(kappa, &start, &checks, &services, gaps, &times, record);
        checks.push((kappa, start));
        if record {
            trajectories.push(at.trajectory);
        }
        if let Some((j, tau, v)) = at.meet {
            // nobody waits at the meeting time: the positive coordinates are the residuals
            let residuals: Vec<f64> = v.iter().copied().filter(|&x| x > 0.0).collect();
            let later = j - 1;
            let arrivals: Vec<(f64, f64)> =
                (1..=later).rev().map(|j| (scn.time(j), services[kappa - j])).collect();
            let run = fifo_run(c, tau, &residuals, &arrivals, 0.0);
            return Ok(SandwichSample {
                w: run.workload,
                state: run.state,
                age: scn.t(1),
                kappa_final: kappa,
                tau,
                coalesced: true,
                doublings,
                backward_arrivals: bw.horizon(),
                forward_arrivals: log.forward_used,
                stats: bw.stats(),
                trajectories,
            });
        }
        if kappa >= MAX_KAPPA {
            return Err(Error::BudgetExceeded(kappa as u64));
        }
        kappa *= 2;
        doublings += 1;
    }
}
