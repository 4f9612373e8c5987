use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};
use crate::rng::{Role, StreamKey};
use crate::walk::{ForkJoinWalk, Ledger, ServiceVector, WalkStats};

/// Fork-join network: every job puts component `i` of its service vector on node `i`.
#[derive(Debug, Clone)]
pub struct ForkJoinModel {
    pub arrival: DistributionSpec,
    pub service: ServiceVector,
}

impl ForkJoinModel {
    pub fn new(arrival: DistributionSpec, service: ServiceVector) -> Result<Self> {
        if service.dim() == 0 {
            return Err(Error::InvalidParameters("fork-join model needs at least one node".into()));
        }
        let et = arrival.mean();
        for i in 0..service.dim() {
            let rho = service.mean(i) / et;
            if rho >= 1.0 {
                return Err(Error::Unstable { rho, servers: 1 });
            }
        }
        Ok(Self { arrival, service })
    }

    pub fn nodes(&self) -> usize {
        self.service.dim()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForkJoinSample {
    /// Sojourn time of the job arriving at 0.
    pub h: f64,
    /// Per-node workload found by that job.
    pub workload: Vec<f64>,
    /// Its service vector.
    pub services: Vec<f64>,
    pub stats: WalkStats,
}

/// Stationary per-node workloads found by an arrival: the all-time maximum
/// of the backward walk with steps `S(i) − T`.
pub fn forkjoin_workload(fj: &ForkJoinModel, key: &StreamKey, budget: u64) -> Result<(Vec<f64>, WalkStats)> {
    let walk = ForkJoinWalk::new(
        fj.arrival.clone(),
        fj.service.clone(),
        key.stream(Role::Service, 0),
        key.stream(Role::Proposal, 0),
    )?;
    let mut ledger = Ledger::new(walk, budget);
    ledger.extend()?;
    let max = ledger.global_max().expect("first patch is in");
    let v = max.iter().zip(ledger.value(0)).map(|(m, r)| (m - r).max(0.0)).collect();
    Ok((v, ledger.stats().clone()))
}

/// `H⁰ = maxᵢ (V⁰₀(i) + S(i))` with a fresh service vector.
pub fn forkjoin_sojourn(fj: &ForkJoinModel, key: &StreamKey, budget: u64) -> Result<ForkJoinSample> {
    let (workload, stats) = forkjoin_workload(fj, key, budget)?;
    let mut services = vec![0.0; fj.nodes()];
    fj.service.sample(&mut key.stream(Role::Auxiliary, 0), &mut services);
    let h = workload.iter().zip(&services).map(|(v, s)| v + s).fold(f64::NEG_INFINITY, f64::max);
    Ok(ForkJoinSample { h, workload, services, stats })
}
