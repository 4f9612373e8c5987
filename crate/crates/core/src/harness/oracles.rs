//! Closed forms and long forward simulations used as references.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use super::stats::{mean_ci, MeanCi};
use crate::distributions::ModelSpec;
use crate::error::{Error, Result};
use crate::extensions::{Discipline, ForkJoinModel};
use crate::rng::Stream;

/// Number-in-system law of M/M/c on `{0..K}` plus the mass above `K`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErlangPmf {
    pub pmf: Vec<f64>,
    pub tail: f64,
}

/// Birth–death solution for M/M/c.
pub fn erlang_pmf(lambda: f64, mu: f64, c: usize, k: usize) -> Result<ErlangPmf> {
    if !(lambda > 0.0 && mu > 0.0) || c == 0 {
        return Err(Error::InvalidParameters(format!("lambda = {lambda}, mu = {mu}, c = {c}")));
    }
    let a = lambda / mu;
    let rho = a / c as f64;
    if rho >= 1.0 {
        return Err(Error::Unstable { rho: a, servers: c });
    }
    // unnormalized terms a^n / n! up to c, then geometric
    let mut term = 1.0;
    let mut head = 0.0;
    for n in 0..c {
        head += term;
        term *= a / (n + 1) as f64;
    }
    let at_c = term;
    let z = head + at_c / (1.0 - rho);
    let mut pmf = Vec::with_capacity(k + 1);
    let mut t = 1.0;
    for n in 0..=k {
        pmf.push(t / z);
        t *= if n < c { a / (n + 1) as f64 } else { rho };
    }
    // mass above K
    let tail = if k >= c {
        at_c * rho.powi((k + 1 - c) as i32) / (1.0 - rho) / z
    } else {
        (1.0 - pmf.iter().sum::<f64>()).max(0.0)
    };
    Ok(ErlangPmf { pmf, tail })
}

/// `P(D ≤ x)` for the M/M/1 delay.
pub fn mm1_delay_cdf(lambda: f64, mu: f64, x: f64) -> f64 {
    if x < 0.0 {
        return 0.0;
    }
    let rho = lambda / mu;
    1.0 - rho * (-(mu - lambda) * x).exp()
}

/// Erlang-C mean delay.
pub fn mmc_mean_delay(lambda: f64, mu: f64, c: usize) -> Result<f64> {
    let p = erlang_pmf(lambda, mu, c, c)?;
    let wait = p.pmf[c] / (1.0 - lambda / (c as f64 * mu));
    Ok(wait / (c as f64 * mu - lambda))
}

// fixed-count batches over a long run, for batch-means intervals
struct Batches {
    size: usize,
    sum: f64,
    count: usize,
    means: Vec<f64>,
    total: f64,
    n: usize,
}

impl Batches {
    fn new(n: usize, batches: usize) -> Self {
        Self { size: (n / batches).max(1), sum: 0.0, count: 0, means: Vec::new(), total: 0.0, n: 0 }
    }

    fn push(&mut self, x: f64) {
        self.sum += x;
        self.count += 1;
        self.total += x;
        self.n += 1;
        if self.count == self.size {
            self.means.push(self.sum / self.size as f64);
            self.sum = 0.0;
            self.count = 0;
        }
    }

    fn ci(&self) -> MeanCi {
        let ci = mean_ci(&self.means);
        MeanCi { mean: self.total / self.n as f64, half_width: ci.half_width, n: self.n }
    }
}

const BATCHES: usize = 50;

/// Long FIFO run: number in system and delay seen by each arrival.
#[derive(Debug, Clone)]
pub struct ForwardFifo {
    /// Histogram of the number in system found by an arrival.
    pub found: Vec<u64>,
    pub delay: MeanCi,
    pub queue: MeanCi,
}

impl ForwardFifo {
    /// Empirical pmf of the number found, padded to `len`.
    pub fn pmf(&self, len: usize) -> Vec<f64> {
        let n: u64 = self.found.iter().sum();
        (0..len).map(|k| self.found.get(k).copied().unwrap_or(0) as f64 / n as f64).collect()
    }
}

/// FIFO GI/GI/c from empty; the first `warmup` arrivals are discarded.
pub fn forward_fifo(model: &ModelSpec, arrivals: usize, warmup: usize, rng: &mut Stream) -> ForwardFifo {
    let c = model.servers;
    let mut free = vec![0.0f64; c];
    let mut departures: BinaryHeap<Reverse<Ordered>> = BinaryHeap::new();
    let mut found = Vec::new();
    let mut delay = Batches::new(arrivals, BATCHES);
    let mut queue = Batches::new(arrivals, BATCHES);
    let mut t = 0.0;
    for n in 0..warmup + arrivals {
        while departures.peek().is_some_and(|Reverse(Ordered(f))| *f <= t) {
            departures.pop();
        }
        let (k, &f) = free.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap();
        let begin = f.max(t);
        let s = model.service.sample(rng);
        free[k] = begin + s;
        if n >= warmup {
            let q = departures.len();
            if found.len() <= q {
                found.resize(q + 1, 0);
            }
            found[q] += 1;
            delay.push(begin - t);
            queue.push(q as f64);
        }
        departures.push(Reverse(Ordered(begin + s)));
        t += model.arrival.sample(rng);
    }
    ForwardFifo { found, delay: delay.ci(), queue: queue.ci() }
}

#[derive(PartialEq)]
struct Ordered(f64);

impl Eq for Ordered {}

impl Ord for Ordered {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&o.0)
    }
}

impl PartialOrd for Ordered {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}

/// Mean delay under a non-preemptive discipline from a long run.
pub fn forward_discipline_delay(
    model: &ModelSpec,
    discipline: Discipline,
    arrivals: usize,
    warmup: usize,
    rng: &mut Stream,
) -> MeanCi {
    let c = model.servers;
    let mut free = vec![0.0f64; c];
    // (arrival index, arrival time) of waiting customers, oldest first
    let mut waiting: VecDeque<(usize, f64)> = VecDeque::new();
    let mut out = Batches::new(arrivals, BATCHES);
    let record = |idx: usize, d: f64, out: &mut Batches| {
        if idx >= warmup && out.n < arrivals {
            out.push(d);
        }
    };
    let mut t = 0.0;
    for n in 0..warmup + arrivals {
        // servers that free up before this arrival take waiting customers
        loop {
            let (k, &f) = free.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap();
            if waiting.is_empty() || f > t {
                break;
            }
            let pick = match discipline {
                Discipline::Fifo => 0,
                Discipline::Lifo => waiting.len() - 1,
                Discipline::Rs => rng.index(waiting.len()),
            };
            let (idx, a) = waiting.remove(pick).unwrap();
            record(idx, f - a, &mut out);
            free[k] = f + model.service.sample(rng);
        }
        match free.iter().position(|&f| f <= t) {
            Some(k) => {
                record(n, 0.0, &mut out);
                free[k] = t + model.service.sample(rng);
            }
            None => waiting.push_back((n, t)),
        }
        t += model.arrival.sample(rng);
    }
    out.ci()
}

/// Mean fork-join sojourn time from a long run of per-node Lindley recursions.
pub fn forward_forkjoin(fj: &ForkJoinModel, arrivals: usize, warmup: usize, rng: &mut Stream) -> MeanCi {
    let c = fj.nodes();
    let mut w = vec![0.0; c];
    let mut s = vec![0.0; c];
    let mut out = Batches::new(arrivals, BATCHES);
    for n in 0..warmup + arrivals {
        fj.service.sample(rng, &mut s);
        let h = w.iter().zip(&s).map(|(a, b)| a + b).fold(f64::NEG_INFINITY, f64::max);
        if n >= warmup {
            out.push(h);
        }
        let t = fj.arrival.sample(rng);
        for (x, y) in w.iter_mut().zip(&s) {
            *x = (*x + y - t).max(0.0);
        }
    }
    out.ci()
}
