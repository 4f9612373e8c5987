//! The backward RA walk `R = X + Y` assembled from the routing ledger and
//! the per-server service ledgers, with certified statements about the
//! stationary RA workloads `V⁰₋ₙ = max_{m ≥ n} Rₘ − Rₙ`.

use super::Scenario;
use crate::distributions::{ModelSpec, TiltContext};
use crate::error::Result;
use crate::rng::{Role, StreamKey};
use crate::walk::{Ledger, RoutingWalk, ServiceWalk, WalkStats};

/// Y horizon used for the first analysis; later ones double it.
const FIRST_HORIZON: usize = 32;

/// Snapshot of `R` over the simulated horizon plus a bound on everything beyond.
#[derive(Debug, Clone)]
pub struct Analysis {
    c: usize,
    h: usize,
    r: Vec<f64>,
    sup: Vec<f64>,
    tail: Vec<f64>,
}

impl Analysis {
    pub fn horizon(&self) -> usize {
        self.h
    }

    /// `R_n(i)`.
    pub fn r(&self, n: usize, i: usize) -> f64 {
        self.r[n * self.c + i]
    }

    /// Observed `max_{n ≤ m ≤ H} R_m(i)`.
    pub fn observed_max(&self, n: usize, i: usize) -> f64 {
        self.sup[n * self.c + i]
    }

    /// Bound on `sup_{m > H} R_m(i)`.
    pub fn tail(&self, i: usize) -> f64 {
        self.tail[i]
    }

    /// Certified `V⁰₋ₙ(i) = 0`.
    pub fn zero(&self, n: usize, i: usize) -> bool {
        let r = self.r(n, i);
        r >= self.observed_max(n, i) && r >= self.tail[i]
    }

    /// Certified `V⁰₋ₙ(i) > 0`.
    pub fn positive(&self, n: usize, i: usize) -> bool {
        self.observed_max(n, i) > self.r(n, i)
    }

    /// Upper bound on `V⁰₋ₙ(i)`.
    pub fn upper(&self, n: usize, i: usize) -> f64 {
        self.observed_max(n, i).max(self.tail[i]) - self.r(n, i)
    }

    /// `V⁰₋ₙ(i)` when the maximum is attained inside the horizon.
    pub fn exact(&self, n: usize, i: usize) -> Option<f64> {
        let m = self.observed_max(n, i);
        (m >= self.tail[i]).then(|| m - self.r(n, i))
    }
}

/// Backward randomness of the RA model and the walks built from it.
pub struct Backward {
    c: usize,
    y: Ledger<RoutingWalk>,
    x: Vec<Ledger<ServiceWalk>>,
    /// `routed[i][p − 1]`: global index of the `p`-th backward arrival sent to node `i`.
    routed: Vec<Vec<usize>>,
    scenario: Scenario,
}

impl Backward {
    /// Streams: Arrival/Routing/Proposal(0) drive Y, Service(i)/Proposal(i + 1) drive Xᵢ,
    /// Forward(0) feeds the forward extension.
    pub fn new(model: &ModelSpec, ctx: &TiltContext, key: &StreamKey, budget: u64) -> Self {
        let c = model.servers;
        let y = Ledger::new(
            RoutingWalk::new(
                ctx.clone(),
                model.arrival.clone(),
                key.stream(Role::Arrival, 0),
                key.stream(Role::Routing, 0),
                key.stream(Role::Proposal, 0),
            ),
            budget,
        );
        let x = (0..c)
            .map(|i| {
                Ledger::new(
                    ServiceWalk::new(
                        ctx.clone(),
                        model.service.clone(),
                        key.stream(Role::Service, i as u32),
                        key.stream(Role::Proposal, i as u32 + 1),
                    ),
                    budget,
                )
            })
            .collect();
        Self {
            c,
            y,
            x,
            routed: vec![Vec::new(); c],
            scenario: Scenario::new(model, key.stream(Role::Forward, 0)),
        }
    }

    pub fn servers(&self) -> usize {
        self.c
    }

    /// Number of backward arrivals simulated so far.
    pub fn horizon(&self) -> usize {
        self.scenario.depth()
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn scenario_mut(&mut self) -> &mut Scenario {
        &mut self.scenario
    }

    pub fn routing_ledger(&self) -> &Ledger<RoutingWalk> {
        &self.y
    }

    pub fn service_ledger(&self, i: usize) -> &Ledger<ServiceWalk> {
        &self.x[i]
    }

    /// Global indices of the backward arrivals routed to node `i`, in backward order.
    pub fn routed(&self, i: usize) -> &[usize] {
        &self.routed[i]
    }

    /// Combined counters of all ledgers.
    pub fn stats(&self) -> WalkStats {
        let mut s = self.y.stats().clone();
        for l in &self.x {
            let t = l.stats();
            s.nominal_steps += t.nominal_steps;
            s.tilted_steps += t.tilted_steps;
            s.proposals += t.proposals;
            s.upcrossings += t.upcrossings;
            s.patches_tried += t.patches_tried;
            s.patches_accepted += t.patches_accepted;
            s.max_ratio = s.max_ratio.max(t.max_ratio);
            s.bound_violations += t.bound_violations;
        }
        s
    }

    /// Extend to at least `n` backward arrivals.
    pub fn ensure(&mut self, n: usize) -> Result<()> {
        self.y.extend_to(n)?;
        self.sync()
    }

    /// Roughly double the horizon.
    pub fn grow(&mut self) -> Result<()> {
        let target = (2 * self.horizon()).max(FIRST_HORIZON);
        self.ensure(target)
    }

    fn sync(&mut self) -> Result<()> {
        for k in self.scenario.depth() + 1..=self.y.horizon() {
            let r = *self.y.mark(k);
            self.routed[r.server].push(k);
            let p = self.routed[r.server].len();
            let x = &mut self.x[r.server];
            x.extend_to(p)?;
            let s = *x.mark(p);
            self.scenario.push_backward(r.t, s, r.server);
        }
        for x in &mut self.x {
            x.extend_to(0)?;
        }
        Ok(())
    }

    pub fn analysis(&self) -> Analysis {
        let c = self.c;
        let h = self.horizon();
        let mut r = vec![0.0; (h + 1) * c];
        let mut count = vec![0usize; c];
        for n in 0..=h {
            if n > 0 {
                count[self.scenario.u(n)] += 1;
            }
            let y = self.y.value(n);
            for i in 0..c {
                r[n * c + i] = self.x[i].value(count[i])[0] + y[i];
            }
        }
        let mut sup = r.clone();
        for n in (0..h).rev() {
            for i in 0..c {
                sup[n * c + i] = sup[n * c + i].max(sup[(n + 1) * c + i]);
            }
        }
        let tail = (0..c).map(|i| self.y.cap(i) + self.x[i].future_bound(count[i])[0]).collect();
        Analysis { c, h, r, sup, tail }
    }

    /// Grow until `f` reaches a verdict on the current analysis.
    pub fn search<T, F>(&mut self, mut f: F) -> Result<T>
    where
        F: FnMut(&Analysis, &Scenario) -> Option<T>,
    {
        if self.horizon() == 0 {
            self.grow()?;
        }
        loop {
            let an = self.analysis();
            if let Some(v) = f(&an, &self.scenario) {
                return Ok(v);
            }
            self.grow()?;
        }
    }

    /// `N = min{n ≥ 0 : V⁰₋ₙ = 0}`, the depth of the last arrival that found the RA system empty.
    pub fn first_empty(&mut self) -> Result<usize> {
        let c = self.c;
        self.search(|an, _| {
            for n in 0..=an.horizon() {
                if (0..c).all(|i| an.zero(n, i)) {
                    return Some(n);
                }
                // Some earlier index is not yet known to be positive.
                if !(0..c).any(|i| an.positive(n, i)) {
                    return None;
                }
            }
            None
        })
    }

    /// A depth `n ≥ κ` at which every node is certified empty.
    pub fn empty_beyond(&mut self, kappa: usize) -> Result<usize> {
        let c = self.c;
        self.ensure(kappa)?;
        self.search(|an, _| (kappa..=an.horizon()).find(|&n| (0..c).all(|i| an.zero(n, i))))
    }

    /// First index that is a record of Y and whose per-node auxiliary indices are records of every Xᵢ.
    pub fn first_record_intersection(&mut self) -> Result<usize> {
        if self.horizon() == 0 {
            self.grow()?;
        }
        loop {
            let y_rec = self.y.records();
            let x_rec: Vec<Vec<usize>> = self.x.iter().map(|l| l.records()).collect();
            let mut count = vec![0usize; self.c];
            let mut next = 0;
            for n in 0..=self.horizon() {
                if n > 0 {
                    count[self.scenario.u(n)] += 1;
                }
                while next < y_rec.len() && y_rec[next] < n {
                    next += 1;
                }
                if next < y_rec.len()
                    && y_rec[next] == n
                    && (0..self.c).all(|i| x_rec[i].binary_search(&count[i]).is_ok())
                {
                    return Ok(n);
                }
            }
            self.grow()?;
        }
    }

    /// For each node, a depth `nᵢ ≥ κ` at which that node is certified empty on arrival.
    pub fn resets(&mut self, kappa: usize) -> Result<Vec<usize>> {
        let c = self.c;
        self.ensure(kappa)?;
        self.search(|an, _| {
            let mut out = Vec::with_capacity(c);
            for i in 0..c {
                out.push((kappa..=an.horizon()).find(|&n| an.zero(n, i))?);
            }
            Some(out)
        })
    }

    /// Exact `V⁰₋ₙ` for `n = 0..=κ`.
    pub fn workloads(&mut self, kappa: usize) -> Result<Vec<Vec<f64>>> {
        let c = self.c;
        self.ensure(kappa)?;
        self.search(|an, _| {
            (0..=kappa).map(|n| (0..c).map(|i| an.exact(n, i)).collect::<Option<Vec<f64>>>()).collect()
        })
    }
}
