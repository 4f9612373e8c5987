use super::Increments;
use crate::distributions::{DistributionSpec, TiltContext, TiltedLaw};
use crate::error::{Error, Result};
use crate::rng::Stream;

/// Routing mark and raw interarrival time of one backward arrival.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Route {
    pub server: usize,
    pub t: f64,
}

/// The routing walk: coordinate `i` moves by `a·1{U = i} − min(T, b)`.
pub struct RoutingWalk {
    ctx: TiltContext,
    arrival: DistributionSpec,
    arrivals: Stream,
    routing: Stream,
    proposal: Stream,
}

impl RoutingWalk {
    pub fn new(ctx: TiltContext, arrival: DistributionSpec, arrivals: Stream, routing: Stream, proposal: Stream) -> Self {
        Self { ctx, arrival, arrivals, routing, proposal }
    }

    pub fn context(&self) -> &TiltContext {
        &self.ctx
    }

    fn write(&self, r: Route, out: &mut [f64]) {
        let t = self.ctx.effective(r.t);
        out.iter_mut().for_each(|x| *x = -t);
        out[r.server] += self.ctx.a;
    }
}

impl Increments for RoutingWalk {
    type Mark = Route;

    fn dim(&self) -> usize {
        self.ctx.servers
    }

    fn nominal(&mut self, out: &mut [f64]) -> Route {
        let server = self.routing.index(self.ctx.servers);
        let t = self.arrival.sample(&mut self.arrivals);
        let r = Route { server, t };
        self.write(r, out);
        r
    }

    fn tilted(&mut self, dir: usize, out: &mut [f64]) -> Route {
        let (server, t) = self.ctx.sample_tilted_step(dir, &mut self.proposal);
        let r = Route { server, t };
        self.write(r, out);
        r
    }

    fn uniform(&mut self) -> f64 {
        self.proposal.uniform()
    }

    fn theta(&self, _i: usize) -> f64 {
        self.ctx.theta
    }

    fn height(&self, _i: usize) -> f64 {
        self.ctx.m
    }

    fn mark_header(&self) -> Vec<String> {
        vec!["server".into(), "t".into()]
    }

    fn mark_fields(&self, m: &Route) -> Vec<String> {
        vec![m.server.to_string(), m.t.to_string()]
    }
}

/// Per-server service walk in auxiliary time: increments `S − a`.
pub struct ServiceWalk {
    ctx: TiltContext,
    service: DistributionSpec,
    services: Stream,
    proposal: Stream,
}

impl ServiceWalk {
    pub fn new(ctx: TiltContext, service: DistributionSpec, services: Stream, proposal: Stream) -> Self {
        Self { ctx, service, services, proposal }
    }
}

impl Increments for ServiceWalk {
    type Mark = f64;

    fn dim(&self) -> usize {
        1
    }

    fn nominal(&mut self, out: &mut [f64]) -> f64 {
        let s = self.service.sample(&mut self.services);
        out[0] = s - self.ctx.a;
        s
    }

    fn tilted(&mut self, _dir: usize, out: &mut [f64]) -> f64 {
        let s = self.ctx.sample_tilted_service(&mut self.proposal);
        out[0] = s - self.ctx.a;
        s
    }

    fn uniform(&mut self) -> f64 {
        self.proposal.uniform()
    }

    fn theta(&self, _i: usize) -> f64 {
        self.ctx.eta.unwrap_or(f64::INFINITY)
    }

    fn height(&self, _i: usize) -> f64 {
        if self.ctx.eta.is_some() { self.ctx.m_prime } else { 0.0 }
    }

    fn drop(&self, _i: usize) -> f64 {
        self.ctx.l_prime as f64 * self.ctx.m_prime
    }

    fn can_rise(&self) -> bool {
        self.ctx.eta.is_some()
    }

    fn mark_header(&self) -> Vec<String> {
        vec!["s".into()]
    }

    fn mark_fields(&self, s: &f64) -> Vec<String> {
        vec![s.to_string()]
    }
}

/// Joint law of the service vector of one fork-join job.
#[derive(Debug, Clone)]
pub enum ServiceVector {
    /// Independent components.
    Independent(Vec<DistributionSpec>),
    /// `S(i) = B + Zᵢ` with a shared `B`.
    CommonFactor { common: DistributionSpec, own: Vec<DistributionSpec> },
}

impl ServiceVector {
    pub fn dim(&self) -> usize {
        match self {
            ServiceVector::Independent(v) => v.len(),
            ServiceVector::CommonFactor { own, .. } => own.len(),
        }
    }

    pub fn mean(&self, i: usize) -> f64 {
        match self {
            ServiceVector::Independent(v) => v[i].mean(),
            ServiceVector::CommonFactor { common, own } => common.mean() + own[i].mean(),
        }
    }

    /// `ln E e^{s·S(i)}`.
    pub fn ln_mgf(&self, i: usize, s: f64) -> Option<f64> {
        match self {
            ServiceVector::Independent(v) => v[i].ln_mgf(s),
            ServiceVector::CommonFactor { common, own } => Some(common.ln_mgf(s)? + own[i].ln_mgf(s)?),
        }
    }

    pub fn sample(&self, rng: &mut Stream, out: &mut [f64]) {
        match self {
            ServiceVector::Independent(v) => {
                for (o, d) in out.iter_mut().zip(v) {
                    *o = d.sample(rng);
                }
            }
            ServiceVector::CommonFactor { common, own } => {
                let b = common.sample(rng);
                for (o, d) in out.iter_mut().zip(own) {
                    *o = b + d.sample(rng);
                }
            }
        }
    }
}

/// Fork-join workload walk: coordinate `i` moves by `S(i) − T`.
pub struct ForkJoinWalk {
    arrival: DistributionSpec,
    service: ServiceVector,
    thetas: Vec<f64>,
    heights: Vec<f64>,
    tilted_arrival: Vec<TiltedLaw>,
    tilted_own: Vec<TiltedLaw>,
    tilted_common: Vec<Option<TiltedLaw>>,
    rng: Stream,
    proposal: Stream,
    services: Vec<f64>,
}

impl ForkJoinWalk {
    pub fn new(arrival: DistributionSpec, service: ServiceVector, rng: Stream, proposal: Stream) -> Result<Self> {
        let c = service.dim();
        let mut thetas = Vec::with_capacity(c);
        for i in 0..c {
            if arrival.mean() <= service.mean(i) {
                return Err(Error::Unstable { rho: service.mean(i) / arrival.mean(), servers: 1 });
            }
            let f = |x: f64| {
                service.ln_mgf(i, x).map_or(f64::INFINITY, |v| v + arrival.ln_mgf(-x).unwrap())
            };
            let th = crate::distributions::positive_root(f, "fork-join component").map_err(|e| match e {
                Error::NoRoot(msg) => Error::MgfUnavailable(msg),
                other => other,
            })?;
            thetas.push(th);
        }
        let heights = thetas.iter().map(|th| (c as f64).ln() / th + 1.0).collect();
        let tilted_arrival = thetas.iter().map(|&th| arrival.tilted(-th)).collect::<Result<_>>()?;
        let (tilted_own, tilted_common) = match &service {
            ServiceVector::Independent(v) => (
                v.iter().zip(&thetas).map(|(d, &th)| d.tilted(th)).collect::<Result<Vec<_>>>()?,
                vec![None; c],
            ),
            ServiceVector::CommonFactor { common, own } => (
                own.iter().zip(&thetas).map(|(d, &th)| d.tilted(th)).collect::<Result<Vec<_>>>()?,
                thetas.iter().map(|&th| common.tilted(th).map(Some)).collect::<Result<Vec<_>>>()?,
            ),
        };
        Ok(Self {
            arrival,
            service,
            thetas,
            heights,
            tilted_arrival,
            tilted_own,
            tilted_common,
            rng,
            proposal,
            services: vec![0.0; c],
        })
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }
}

impl Increments for ForkJoinWalk {
    type Mark = ();

    fn dim(&self) -> usize {
        self.thetas.len()
    }

    fn nominal(&mut self, out: &mut [f64]) {
        let t = self.arrival.sample(&mut self.rng);
        self.service.sample(&mut self.rng, &mut self.services);
        for (o, s) in out.iter_mut().zip(&self.services) {
            *o = s - t;
        }
    }

    fn tilted(&mut self, dir: usize, out: &mut [f64]) {
        let rng = &mut self.proposal;
        let t = self.tilted_arrival[dir].sample(rng);
        match &self.service {
            ServiceVector::Independent(v) => {
                for (i, d) in v.iter().enumerate() {
                    let s = if i == dir { self.tilted_own[i].sample(rng) } else { d.sample(rng) };
                    out[i] = s - t;
                }
            }
            ServiceVector::CommonFactor { own, .. } => {
                let b = self.tilted_common[dir].as_ref().unwrap().sample(rng);
                for (i, d) in own.iter().enumerate() {
                    let z = if i == dir { self.tilted_own[i].sample(rng) } else { d.sample(rng) };
                    out[i] = b + z - t;
                }
            }
        }
    }

    fn uniform(&mut self) -> f64 {
        self.proposal.uniform()
    }

    fn theta(&self, i: usize) -> f64 {
        self.thetas[i]
    }

    fn height(&self, i: usize) -> f64 {
        self.heights[i]
    }
}
