use serde::{Deserialize, Serialize};

use crate::dcfp::{
    fifo_arrivals, fifo_run, prepare, reconstruct_ra_forward, Backward, DetailedState, NodeStart, SamplerOptions,
};
use crate::distributions::ModelSpec;
use crate::error::{Error, Result};
use crate::rng::StreamKey;
use crate::walk::WalkStats;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct HarrisConfig {
    /// Small-set threshold; `None` picks `min(median T, inf S / 2)`.
    pub epsilon: Option<f64>,
}

impl HarrisConfig {
    pub fn resolve(&self, model: &ModelSpec) -> Result<f64> {
        let inf_s = model.service.lower();
        let eps = self.epsilon.unwrap_or_else(|| model.arrival.quantile(0.5).min(0.5 * inf_s));
        if !(eps > 0.0) {
            return Err(Error::Config(format!("epsilon = {eps} must be positive")));
        }
        if model.arrival.survival(eps) <= 0.0 {
            return Err(Error::Config(format!("P(T > {eps}) = 0")));
        }
        if eps >= inf_s {
            return Err(Error::Config(format!("epsilon = {eps} is not below inf S = {inf_s}")));
        }
        Ok(eps)
    }
}

/// The arrival `−k` at which both systems are known to be in the same state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarrisEvent {
    pub k: usize,
    /// Node the arrival joined, certified empty when it arrived.
    pub node: usize,
    /// Certified bound on the other node's workload at that moment.
    pub other_bound: f64,
    /// `T₋ₖ`, larger than epsilon.
    pub gap: f64,
    /// `S₋ₖ`, the only work left one arrival later.
    pub service: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarrisSample {
    pub w: Vec<f64>,
    pub state: DetailedState,
    /// Restart depth `k − 1`.
    pub n: usize,
    pub epsilon: f64,
    pub event: HarrisEvent,
    pub backward_arrivals: usize,
    pub forward_arrivals: usize,
    pub stats: WalkStats,
}

/// Exact FIFO draw for two servers when the system never empties.
///
/// Going backwards, look for an arrival `−k` that joins an empty RA node
/// while the other node holds at most `ε` of work, with `T₋ₖ > ε`. One
/// arrival later the RA system and the FIFO system both hold just that
/// customer, with `S₋ₖ − T₋ₖ` left, so the FIFO system can be rebuilt from there.
pub fn harris_sample_c2(
    model: &ModelSpec,
    cfg: &HarrisConfig,
    opts: &SamplerOptions,
    key: &StreamKey,
) -> Result<HarrisSample> {
    if model.servers != 2 {
        return Err(Error::NotApplicable(format!("regeneration sampler needs c = 2, got {}", model.servers)));
    }
    if model.emptiable {
        return Err(Error::NotApplicable("P(T > S) > 0: use the empty-RA or sandwich sampler".into()));
    }
    let eps = cfg.resolve(model)?;
    let ctx = prepare(model, opts)?;
    let mut bw = Backward::new(model, &ctx, key, opts.budget);
    let event = bw.search(|an, scn| {
        (1..=an.horizon()).find_map(|k| {
            let z = scn.u(k);
            let o = 1 - z;
            (scn.t(k) > eps && an.zero(k, z) && an.upper(k, o) <= eps).then(|| HarrisEvent {
                k,
                node: z,
                other_bound: an.upper(k, o),
                gap: scn.t(k),
                service: scn.s(k),
            })
        })
    })?;

    let n = event.k - 1;
    let scn = bw.scenario_mut();
    let busy = scn.time(event.k) + event.service;
    let mut starts = [NodeStart::idle(scn, n); 2];
    starts[event.node].busy_until = busy;
    let log = reconstruct_ra_forward(scn, &starts, n);
    debug_assert_eq!(log.waiting, 0);
    let arrivals = fifo_arrivals(scn, n, &log.services());
    let run = fifo_run(2, scn.time(n), &[busy - scn.time(n)], &arrivals, 0.0);
    Ok(HarrisSample {
        w: run.workload,
        state: run.state,
        n,
        epsilon: eps,
        event,
        backward_arrivals: bw.horizon(),
        forward_arrivals: log.forward_used,
        stats: bw.stats(),
    })
}
