//! Exact simulation of negative-drift random walks together with certified
//! bounds on their future maxima.
//!
//! A [`Ledger`] grows a walk path in *patches*. The first patch is a
//! global-maximum segment: the walk is run until it has dropped well below
//! its running maximum in every coordinate (a downward milestone), and then
//! a single exponentially tilted proposal decides whether it will ever climb
//! back by more than the up-crossing height. On rejection the segment ends,
//! and the rest of the path is known to stay below `end + height`. Every
//! later patch is a fresh segment accepted only if its own global maximum
//! stays below the height, which is exactly the law of the continuation
//! conditioned on that cap.

mod increments;

pub use increments::{ForkJoinWalk, Route, RoutingWalk, ServiceVector, ServiceWalk};

use std::io::Write;

use crate::error::{Error, Result};

/// Default cap on elementary steps (nominal and tilted) for one ledger.
pub const DEFAULT_STEP_BUDGET: u64 = 100_000_000;

/// Source of walk increments under the nominal and tilted measures.
///
/// Tilting in direction `i` must change the law of one step by the factor
/// `e^{θᵢ·Δ(i)}`; the engine mixes directions uniformly.
pub trait Increments {
    type Mark: Clone + std::fmt::Debug;

    fn dim(&self) -> usize;

    /// One nominal step; the increment is written to `out`.
    fn nominal(&mut self, out: &mut [f64]) -> Self::Mark;

    /// One step under the measure tilted in direction `dir`.
    fn tilted(&mut self, dir: usize, out: &mut [f64]) -> Self::Mark;

    /// Uniform draw from the proposal stream.
    fn uniform(&mut self) -> f64;

    fn theta(&self, i: usize) -> f64;

    /// Up-crossing height in coordinate `i`.
    fn height(&self, i: usize) -> f64;

    /// Depth below the running maximum that defines a downward milestone.
    fn drop(&self, i: usize) -> f64 {
        self.height(i)
    }

    /// False when increments are surely nonpositive, so no up-crossing is possible.
    fn can_rise(&self) -> bool {
        true
    }

    /// Column names and values for trace output.
    fn mark_header(&self) -> Vec<String> {
        Vec::new()
    }

    fn mark_fields(&self, _mark: &Self::Mark) -> Vec<String> {
        Vec::new()
    }
}

/// Counters kept by a ledger.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WalkStats {
    pub nominal_steps: u64,
    pub tilted_steps: u64,
    pub proposals: u64,
    pub upcrossings: u64,
    pub patches_tried: u64,
    pub patches_accepted: u64,
    /// Largest acceptance ratio seen on any proposal.
    pub max_ratio: f64,
    /// Proposals whose ratio exceeded the theoretical bound (must stay zero).
    pub bound_violations: u64,
}

impl WalkStats {
    pub fn steps(&self) -> u64 {
        self.nominal_steps + self.tilted_steps
    }
}

/// A downward milestone and the outcome of its up-crossing test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Milestone {
    pub down: usize,
    /// Index at which the walk rose above `down`'s value plus the height; `None` if never.
    pub up: Option<usize>,
}

struct Segment<M> {
    values: Vec<f64>,
    marks: Vec<M>,
    max: Vec<f64>,
    milestones: Vec<Milestone>,
}

/// Walk path with milestones and certified caps.
pub struct Ledger<I: Increments> {
    inc: I,
    dim: usize,
    values: Vec<f64>,
    marks: Vec<I::Mark>,
    milestones: Vec<Milestone>,
    patch_ends: Vec<usize>,
    first_max: Option<Vec<f64>>,
    /// Bound on every value beyond the horizon, tightened patch by patch.
    caps: Vec<f64>,
    budget: u64,
    stats: WalkStats,
    bound: f64,
}

impl<I: Increments> Ledger<I> {
    pub fn new(inc: I, budget: u64) -> Self {
        let dim = inc.dim();
        let bound = if inc.can_rise() {
            (0..dim).map(|i| dim as f64 * (-inc.theta(i) * inc.height(i)).exp()).fold(0.0, f64::max)
        } else {
            0.0
        };
        Self {
            inc,
            dim,
            values: vec![0.0; dim],
            marks: Vec::new(),
            milestones: Vec::new(),
            patch_ends: Vec::new(),
            first_max: None,
            caps: vec![f64::INFINITY; dim],
            budget,
            stats: WalkStats::default(),
            bound,
        }
    }

    pub fn increments(&self) -> &I {
        &self.inc
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of steps simulated so far.
    pub fn horizon(&self) -> usize {
        self.marks.len()
    }

    /// Walk value after `k` steps.
    pub fn value(&self, k: usize) -> &[f64] {
        &self.values[k * self.dim..(k + 1) * self.dim]
    }

    /// Randomness behind step `k` (1-based).
    pub fn mark(&self, k: usize) -> &I::Mark {
        &self.marks[k - 1]
    }

    pub fn marks(&self) -> &[I::Mark] {
        &self.marks
    }

    pub fn milestones(&self) -> &[Milestone] {
        &self.milestones
    }

    /// Indices after which a certified cap holds.
    pub fn patch_ends(&self) -> &[usize] {
        &self.patch_ends
    }

    pub fn stats(&self) -> &WalkStats {
        &self.stats
    }

    /// Upper bound on every acceptance ratio; below one by construction of the heights.
    pub fn acceptance_bound(&self) -> f64 {
        self.bound
    }

    /// All-time maximum of the walk, available once the first patch is in.
    pub fn global_max(&self) -> Option<&[f64]> {
        self.first_max.as_deref()
    }

    /// Cap on every value beyond the horizon: the smallest `value(p) + height`
    /// over patch ends `p`, and the global maximum.
    pub fn cap(&self, i: usize) -> f64 {
        self.caps[i]
    }

    /// Coordinate-wise upper bound on `sup_{k ≥ n}` of the walk (exact when attained before the horizon).
    pub fn future_bound(&self, n: usize) -> Vec<f64> {
        let h = self.horizon();
        (0..self.dim)
            .map(|i| {
                let observed = (n..=h).map(|k| self.value(k)[i]).fold(f64::NEG_INFINITY, f64::max);
                observed.max(self.cap(i))
            })
            .collect()
    }

    /// Certified record indices: `n` whose value dominates every later value, including beyond the horizon.
    pub fn records(&self) -> Vec<usize> {
        let h = self.horizon();
        if self.patch_ends.is_empty() {
            return Vec::new();
        }
        let mut sup: Vec<f64> = (0..self.dim).map(|i| self.cap(i)).collect();
        let mut out = Vec::new();
        for n in (0..=h).rev() {
            let v = self.value(n);
            if (0..self.dim).all(|i| v[i] >= sup[i]) {
                out.push(n);
            }
            for i in 0..self.dim {
                sup[i] = sup[i].max(v[i]);
            }
        }
        out.reverse();
        out
    }

    fn charge(&mut self) -> Result<()> {
        if self.stats.steps() >= self.budget {
            return Err(Error::BudgetExceeded(self.budget));
        }
        Ok(())
    }

    /// One global-maximum segment started at the origin. With `abort`, gives up
    /// as soon as the running maximum exceeds it in some coordinate.
    fn segment(&mut self, abort: Option<&[f64]>) -> Result<Option<Segment<I::Mark>>> {
        let d = self.dim;
        let mut seg = Segment {
            values: vec![0.0; d],
            marks: Vec::new(),
            max: vec![0.0; d],
            milestones: Vec::new(),
        };
        let mut pos = vec![0.0; d];
        let mut inc = vec![0.0; d];
        let exceeded = |max: &[f64]| abort.is_some_and(|a| (0..d).any(|i| max[i] > a[i]));
        loop {
            while !(0..d).all(|i| pos[i] < seg.max[i] - self.inc.drop(i)) {
                self.charge()?;
                self.stats.nominal_steps += 1;
                let mark = self.inc.nominal(&mut inc);
                for i in 0..d {
                    pos[i] += inc[i];
                    seg.max[i] = seg.max[i].max(pos[i]);
                }
                seg.values.extend_from_slice(&pos);
                seg.marks.push(mark);
                if exceeded(&seg.max) {
                    return Ok(None);
                }
            }
            let down = seg.marks.len();
            if !self.inc.can_rise() {
                seg.milestones.push(Milestone { down, up: None });
                return Ok(Some(seg));
            }

            // Up-crossing test: tilted proposal until some coordinate clears the height.
            self.stats.proposals += 1;
            let dir = ((self.inc.uniform() * d as f64) as usize).min(d - 1);
            let mut rel = vec![0.0; d];
            let mut path = Vec::new();
            let mut marks = Vec::new();
            loop {
                self.charge()?;
                self.stats.tilted_steps += 1;
                let mark = self.inc.tilted(dir, &mut inc);
                for i in 0..d {
                    rel[i] += inc[i];
                }
                path.extend_from_slice(&rel);
                marks.push(mark);
                if (0..d).any(|i| rel[i] > self.inc.height(i)) {
                    break;
                }
            }
            let denom: f64 =
                (0..d).map(|i| (self.inc.theta(i) * rel[i]).exp()).sum::<f64>() / d as f64;
            let ratio = 1.0 / denom;
            self.stats.max_ratio = self.stats.max_ratio.max(ratio);
            if ratio > self.bound * (1.0 + 1e-12) || self.bound >= 1.0 {
                self.stats.bound_violations += 1;
            }
            if self.inc.uniform() < ratio {
                self.stats.upcrossings += 1;
                for chunk in path.chunks(d) {
                    for i in 0..d {
                        let v = pos[i] + chunk[i];
                        seg.max[i] = seg.max[i].max(v);
                        seg.values.push(v);
                    }
                }
                for i in 0..d {
                    pos[i] += rel[i];
                }
                seg.marks.extend(marks);
                seg.milestones.push(Milestone { down, up: Some(seg.marks.len()) });
                if exceeded(&seg.max) {
                    return Ok(None);
                }
            } else {
                seg.milestones.push(Milestone { down, up: None });
                return Ok(Some(seg));
            }
        }
    }

    fn append(&mut self, seg: Segment<I::Mark>) {
        let h = self.horizon();
        let base: Vec<f64> = self.value(h).to_vec();
        for chunk in seg.values.chunks(self.dim).skip(1) {
            for i in 0..self.dim {
                self.values.push(base[i] + chunk[i]);
            }
        }
        self.marks.extend(seg.marks);
        self.milestones.extend(seg.milestones.into_iter().map(|m| Milestone {
            down: m.down + h,
            up: m.up.map(|u| u + h),
        }));
        self.patch_ends.push(self.horizon());
        let end = self.horizon();
        for i in 0..self.dim {
            let c = self.value(end)[i] + self.inc.height(i);
            self.caps[i] = self.caps[i].min(c);
        }
    }

    /// Add one patch: the global-maximum segment first, then capped continuations.
    pub fn extend(&mut self) -> Result<()> {
        if self.first_max.is_none() {
            let seg = self.segment(None)?.expect("unrestricted segment always completes");
            self.first_max = Some(seg.max.clone());
            self.stats.patches_tried += 1;
            self.stats.patches_accepted += 1;
            let max = seg.max.clone();
            self.append(seg);
            for (c, m) in self.caps.iter_mut().zip(max) {
                *c = c.min(m);
            }
            return Ok(());
        }
        let heights: Vec<f64> = (0..self.dim).map(|i| self.inc.height(i)).collect();
        loop {
            self.stats.patches_tried += 1;
            if let Some(seg) = self.segment(Some(&heights))? {
                self.stats.patches_accepted += 1;
                self.append(seg);
                return Ok(());
            }
        }
    }

    /// Extend until the horizon reaches `n`.
    pub fn extend_to(&mut self, n: usize) -> Result<()> {
        while self.horizon() < n || self.first_max.is_none() {
            self.extend()?;
        }
        Ok(())
    }

    /// Extend in whole patches until `done(self)` holds.
    pub fn extend_until<F: Fn(&Self) -> bool>(&mut self, done: F) -> Result<()> {
        while self.first_max.is_none() || !done(self) {
            self.extend()?;
        }
        Ok(())
    }

    /// One CSV row per step: index, mark fields, walk value, milestone events.
    pub fn write_trace<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["k".to_string()];
        header.extend(self.inc.mark_header());
        header.extend((0..self.dim).map(|i| format!("y{i}")));
        header.push("event".into());
        w.write_record(&header).map_err(io_err)?;
        for k in 0..=self.horizon() {
            let mut row = vec![k.to_string()];
            if k == 0 {
                row.extend(self.inc.mark_header().iter().map(|_| String::new()));
            } else {
                row.extend(self.inc.mark_fields(self.mark(k)));
            }
            row.extend(self.value(k).iter().map(|v| v.to_string()));
            let mut events = Vec::new();
            for m in &self.milestones {
                if m.down == k {
                    events.push(if m.up.is_some() { "down" } else { "down-certified" });
                }
                if m.up == Some(k) {
                    events.push("up");
                }
            }
            if self.patch_ends.contains(&k) {
                events.push("patch-end");
            }
            row.push(events.join("|"));
            w.write_record(&row).map_err(io_err)?;
        }
        w.flush().map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }
}

fn io_err(e: csv::Error) -> Error {
    Error::Config(format!("trace output: {e}"))
}

#[cfg(test)]
mod tests;
