//! Queueing layer: RA and Kiefer–Wolfowitz recursions, the backward RA
//! construction, forward reconstruction with initiation ordering, and the
//! empty-RA stationary sampler.

mod backward;
mod fifo;
mod reconstruct;
mod scenario;


pub use backward::{Analysis, Backward};
pub use fifo::{fifo_run, DetailedState, FifoRun};
pub use reconstruct::{reconstruct_ra_forward, Initiation, InitiationLog, NodeStart};
pub use scenario::Scenario;

use serde::{Deserialize, Serialize};

use crate::distributions::{ModelSpec, TiltContext, TiltOptions};
use crate::error::{Error, Result};
use crate::rng::StreamKey;
use crate::walk::{WalkStats, DEFAULT_STEP_BUDGET};

/// One Kiefer–Wolfowitz step: `R(W + S·e − T·f)⁺` for a sorted `W`.
pub fn kw_step(w: &[f64], s: f64, t: f64) -> Vec<f64> {
    let mut out = w.to_vec();
    kw_step_in_place(&mut out, s, t);
    out
}

pub fn kw_step_in_place(w: &mut [f64], s: f64, t: f64) {
    w[0] += s;
    for x in w.iter_mut() {
        *x = (*x - t).max(0.0);
    }
    w.sort_by(f64::total_cmp);
}

/// One RA step: node `u` (0-based) gains `s`, every node drains `t`.
pub fn ra_step(v: &[f64], s: f64, u: usize, t: f64) -> Vec<f64> {
    v.iter()
        .enumerate()
        .map(|(i, &x)| (x + if i == u { s } else { 0.0 } - t).max(0.0))
        .collect()
}

/// How the backward search decides that the RA system was empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Detection {
    /// First index certified empty from the walk values and the ledger caps.
    #[default]
    Certified,
    /// First joint record of the routing walk and every service walk.
    Records,
}

/// Interarrival cap for the dominating walk.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Truncation {
    #[default]
    None,
    Auto,
    Level(f64),
}

/// Knobs shared by the samplers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplerOptions {
    pub drift: Option<f64>,
    pub truncation: Truncation,
    pub scalar_height: Option<f64>,
    pub scalar_run: u32,
    /// Elementary-step cap per ledger.
    pub budget: u64,
    pub kappa0: usize,
    pub detection: Detection,
}

impl Default for SamplerOptions {
    fn default() -> Self {
        Self {
            drift: None,
            truncation: Truncation::None,
            scalar_height: None,
            scalar_run: 3,
            budget: DEFAULT_STEP_BUDGET,
            kappa0: 16,
            detection: Detection::Certified,
        }
    }
}

/// Interarrival level for the dominating machinery. `None` means the walk
/// sees the raw interarrival times. Reconstruction always replays raw times.
pub fn truncation_wrap(model: &ModelSpec, b: Truncation) -> Result<Option<f64>> {
    let t = &model.arrival;
    let c = model.servers as f64;
    let es = model.service.mean();
    let valid = |b: f64| c * t.integrated_tail(b) > 1.05 * es && b.min(t.upper()) > model.service.lower();
    match b {
        Truncation::None => Ok(None),
        Truncation::Level(b) => {
            if !(b > 0.0) {
                return Err(Error::InvalidParameters(format!("truncation level {b}")));
            }
            if b >= t.upper() {
                return Ok(None);
            }
            if !valid(b) {
                return Err(Error::NoValidTruncation(format!("b = {b} violates c·E min(T,b) > 1.05·E S or P(min(T,b) > S) > 0")));
            }
            Ok(Some(b))
        }
        Truncation::Auto => {
            if !model.emptiable {
                return Err(Error::NoValidTruncation("P(T > S) = 0".into()));
            }
            let step = t.mean() / 16.0;
            for k in 1..=1 << 14 {
                let b = step * k as f64;
                if b >= t.upper() {
                    return Ok(None);
                }
                if valid(b) {
                    return Ok(Some(b));
                }
            }
            Err(Error::NoValidTruncation("no grid level satisfies the drift condition".into()))
        }
    }
}

/// Tilt context for the dominating walk, honouring truncation.
pub fn prepare(model: &ModelSpec, opts: &SamplerOptions) -> Result<TiltContext> {
    let cap = truncation_wrap(model, opts.truncation)?;
    let drift = opts.drift.or_else(|| {
        cap.map(|b| 0.5 * (1.0 / model.mu + model.servers as f64 * model.arrival.integrated_tail(b)))
    });
    TiltContext::new(
        model,
        &TiltOptions { drift, cap, scalar_height: opts.scalar_height, scalar_run: opts.scalar_run },
    )
}

/// An exact stationary FIFO draw at an arrival epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct KwSample {
    /// Sorted Kiefer–Wolfowitz vector; `w[0]` is the delay of arrival 0.
    pub w: Vec<f64>,
    pub state: DetailedState,
    /// Depth from which the FIFO system was rebuilt.
    pub n: usize,
    /// Backward arrivals simulated.
    pub backward_arrivals: usize,
    /// Forward arrivals drawn past time 0.
    pub forward_arrivals: usize,
    pub stats: WalkStats,
}

/// FIFO state at time 0 from an empty system at arrival `−n`, using the
/// initiation-ordered services of the RA replay.
pub fn fifo_state_at_zero(scn: &mut Scenario, n: usize) -> (FifoRun, InitiationLog) {
    let c = scn.servers();
    let starts = vec![NodeStart::idle(scn, n); c];
    let log = reconstruct_ra_forward(scn, &starts, n);
    let arrivals = fifo_arrivals(scn, n, &log.services());
    (fifo_run(c, scn.time(n), &[], &arrivals, 0.0), log)
}

/// `(time, service)` of arrivals `−n, …, −1`.
pub fn fifo_arrivals(scn: &Scenario, n: usize, services: &[f64]) -> Vec<(f64, f64)> {
    (0..n).map(|k| (scn.time(n - k), services[k])).collect()
}

/// Empty-RA sampler: find the last arrival that found the RA system empty,
/// rebuild the FIFO system from there and run it to time 0.
pub fn sample_stationary_kw(model: &ModelSpec, opts: &SamplerOptions, key: &StreamKey) -> Result<KwSample> {
    let ctx = prepare(model, opts)?;
    let mut bw = Backward::new(model, &ctx, key, opts.budget);
    let n = match opts.detection {
        Detection::Certified => bw.first_empty()?,
        Detection::Records => bw.first_record_intersection()?,
    };
    let c = model.servers;
    if n == 0 {
        return Ok(KwSample {
            w: vec![0.0; c],
            state: DetailedState::default(),
            n,
            backward_arrivals: bw.horizon(),
            forward_arrivals: 0,
            stats: bw.stats(),
        });
    }
    let (run, log) = fifo_state_at_zero(bw.scenario_mut(), n);
    let scn = bw.scenario();
    // the recursion over the reset services, as a cross-check of the event simulation
    let services = log.services();
    let mut w = vec![0.0; c];
    for k in 0..n {
        kw_step_in_place(&mut w, services[k], scn.t(n - k));
    }
    debug_assert!(w.iter().zip(&run.workload).all(|(a, b)| (a - b).abs() <= 1e-9 * (1.0 + a.abs())));
    Ok(KwSample {
        w,
        state: run.state,
        n,
        backward_arrivals: bw.horizon(),
        forward_arrivals: log.forward_used,
        stats: bw.stats(),
    })
}
