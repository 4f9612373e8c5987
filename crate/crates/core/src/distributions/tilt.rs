//! Exponential tilting of the dominating walk increments.
//!
//! The routing walk has coordinates `a·1{U = i} − T` and the per-server
//! service walk has increments `S − a`. Both drift down; the tilt roots
//! make `e^{θ·increment}` a mean-one martingale multiplier, which is what
//! turns up-crossing probabilities into acceptance probabilities.

use super::{DistributionSpec, ModelSpec, TiltedLaw};
use crate::error::{Error, Result};
use crate::rng::Stream;

const ROOT_TOL: f64 = 1e-12;

/// Knobs for [`solve_tilt`]; everything defaults sensibly.
#[derive(Debug, Clone, PartialEq)]
pub struct TiltOptions {
    /// Drift constant; midpoint of `(1/μ, c/λ)` when `None`.
    pub drift: Option<f64>,
    /// Interarrival cap `b`: the walk sees `min(T, b)`.
    pub cap: Option<f64>,
    /// Per-server up-crossing height; `1/η*` when `None`.
    pub scalar_height: Option<f64>,
    /// Per-server downward-run multiplier.
    pub scalar_run: u32,
}

impl Default for TiltOptions {
    fn default() -> Self {
        Self { drift: None, cap: None, scalar_height: None, scalar_run: 3 }
    }
}

/// Positive root of a convex `f` with `f(0) = 0` and `f'(0) < 0`.
///
/// `f` may return `+∞` (or NaN) where the underlying mgf blows up.
pub fn positive_root<F: Fn(f64) -> f64>(f: F, what: &str) -> Result<f64> {
    let val = |x: f64| {
        let v = f(x);
        if v.is_nan() { f64::INFINITY } else { v }
    };
    let mut hi = 0.25;
    let mut expansions = 0;
    while val(hi) <= 0.0 {
        hi *= 2.0;
        expansions += 1;
        if expansions > 60 {
            return Err(Error::NoRoot(format!("{what}: no sign change below {hi:e}")));
        }
    }
    let mut lo = 0.0;
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if val(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if lo == 0.0 {
        return Err(Error::NoRoot(format!("{what}: root collapsed onto the origin")));
    }
    let (flo, fhi) = (val(lo).abs(), val(hi).abs());
    let (root, err) = if flo <= fhi { (lo, flo) } else { (hi, fhi) };
    if err > ROOT_TOL {
        return Err(Error::NoRoot(format!("{what}: residual {err:e} at {root}")));
    }
    Ok(root)
}

/// Everything the walk engine needs about the change of measure.
#[derive(Debug, Clone)]
pub struct TiltContext {
    pub servers: usize,
    /// Drift constant `a`.
    pub a: f64,
    /// Root of the routing-walk log-mgf.
    pub theta: f64,
    /// Up-crossing height of the routing walk, `ln(c)/θ* + 1`.
    pub m: f64,
    /// Root of `ψ(η) = ln E e^{η(S − a)}`; `None` when `S ≤ a` surely (walk never rises).
    pub eta: Option<f64>,
    /// Per-server up-crossing height.
    pub m_prime: f64,
    /// Per-server downward run in units of `m_prime`.
    pub l_prime: u32,
    /// Interarrival cap seen by the walk.
    pub cap: Option<f64>,
    /// `e^{θa} / (e^{θa} + c − 1)`: tilted probability of routing to the tilt direction.
    pub p_direction: f64,
    arrival: DistributionSpec,
    service: DistributionSpec,
    tilted_arrival: TiltedLaw,
    /// Tilted mass of the atom at `cap`.
    atom_prob: f64,
    tilted_service: Option<TiltedLaw>,
}

/// `ln E e^{−θ min(T, b)}`.
fn ln_laplace_capped(t: &DistributionSpec, cap: Option<f64>, theta: f64) -> f64 {
    match cap {
        Some(b) if b < t.upper() => {
            (t.partial_laplace(theta, b) + (-theta * b).exp() * t.survival(b)).ln()
        }
        _ => t.ln_mgf(-theta).expect("negative-argument mgf is finite"),
    }
}

/// Log-mgf of a routing-walk coordinate, `ln(((e^{θa} − 1)/c + 1)·E e^{−θT̂})`.
pub(crate) fn phi(t: &DistributionSpec, cap: Option<f64>, c: usize, a: f64, theta: f64) -> f64 {
    let c = c as f64;
    ((theta * a).exp_m1() / c).ln_1p() + ln_laplace_capped(t, cap, theta)
}

/// `ψ(η) = ln E e^{η(S − a)}`.
pub(crate) fn psi(s: &DistributionSpec, a: f64, eta: f64) -> f64 {
    s.ln_mgf(eta).map_or(f64::INFINITY, |v| v - eta * a)
}

pub fn solve_tilt(model: &ModelSpec, a: f64) -> Result<TiltContext> {
    TiltContext::new(model, &TiltOptions { drift: Some(a), ..TiltOptions::default() })
}

impl TiltContext {
    pub fn new(model: &ModelSpec, opts: &TiltOptions) -> Result<Self> {
        let (lo, hi) = model.drift_interval();
        let a = opts.drift.unwrap_or_else(|| model.default_drift());
        if !(a > lo && a < hi) {
            return Err(Error::InvalidDriftConstant { a, lo, hi });
        }
        let t = &model.arrival;
        let cap = opts.cap.filter(|&b| b < t.upper());
        if let Some(b) = cap {
            let mean = t.integrated_tail(b);
            if !(a < model.servers as f64 * mean) {
                return Err(Error::InvalidDriftConstant { a, lo, hi: model.servers as f64 * mean });
            }
        }
        // An upward increment a − T must be possible for the log-mgf to recross zero.
        if !(t.cdf(a) > 0.0 || t.lower() < a) {
            return Err(Error::NoRoot(format!("P(T < a) = 0 at a = {a}")));
        }
        let c = model.servers;
        let theta = positive_root(|x| phi(t, cap, c, a, x), "routing walk")?;
        let m = (c as f64).ln() / theta + 1.0;

        let s = &model.service;
        let eta = if s.upper() > a {
            Some(positive_root(|x| psi(s, a, x), "service walk").map_err(|e| match e {
                Error::NoRoot(msg) => Error::MgfUnavailable(msg),
                other => other,
            })?)
        } else {
            None
        };
        let m_prime = opts.scalar_height.unwrap_or_else(|| eta.map_or(1.0, |e| 1.0 / e));
        if opts.scalar_run < 1 || !(m_prime > 0.0) {
            return Err(Error::InvalidParameters("per-server milestone parameters must be positive".into()));
        }

        let e = (theta * a).exp();
        let p_direction = e / (e + c as f64 - 1.0);
        let tilted_arrival = t.tilted(-theta)?;
        let atom_prob = match cap {
            Some(b) => ((-theta * b).exp() * t.survival(b)
                / ln_laplace_capped(t, cap, theta).exp())
            .clamp(0.0, 1.0),
            None => 0.0,
        };
        let tilted_service = match eta {
            Some(h) => Some(s.tilted(h)?),
            None => None,
        };
        Ok(Self {
            servers: c,
            a,
            theta,
            m,
            eta,
            m_prime,
            l_prime: opts.scalar_run,
            cap,
            p_direction,
            arrival: t.clone(),
            service: s.clone(),
            tilted_arrival,
            atom_prob,
            tilted_service,
        })
    }

    /// Routing-walk log-mgf at `θ`.
    pub fn phi(&self, theta: f64) -> f64 {
        phi(&self.arrival, self.cap, self.servers, self.a, theta)
    }

    /// Service-walk log-mgf at `η`.
    pub fn psi(&self, eta: f64) -> f64 {
        psi(&self.service, self.a, eta)
    }

    /// Interarrival time as seen by the walk.
    pub fn effective(&self, t: f64) -> f64 {
        self.cap.map_or(t, |b| t.min(b))
    }

    /// Largest acceptance ratio an up-crossing proposal can produce.
    pub fn acceptance_bound(&self) -> f64 {
        self.servers as f64 * (-self.theta * self.m).exp()
    }

    /// One step of the tilted routing walk in direction `i` (0-based).
    /// Returns `(U, raw T)`; the walk uses `effective(T)`.
    pub fn sample_tilted_step(&self, i: usize, rng: &mut Stream) -> (usize, f64) {
        let c = self.servers;
        let u = if c == 1 || rng.bernoulli(self.p_direction) {
            i
        } else {
            // Uniform over the other c − 1 servers.
            let k = rng.index(c - 1);
            if k >= i { k + 1 } else { k }
        };
        (u, self.sample_tilted_arrival(rng))
    }

    /// Raw interarrival time whose capped value follows the tilted law.
    pub fn sample_tilted_arrival(&self, rng: &mut Stream) -> f64 {
        match self.cap {
            None => self.tilted_arrival.sample(rng),
            Some(b) => {
                if rng.bernoulli(self.atom_prob) {
                    // Given the cap is hit the raw value keeps its nominal conditional law.
                    return self.arrival.sample_above(b, rng);
                }
                loop {
                    let t = self.tilted_arrival.sample(rng);
                    if t < b {
                        return t;
                    }
                }
            }
        }
    }

    /// Tilted service draw (density `∝ e^{η*s} g(s)`).
    pub fn sample_tilted_service(&self, rng: &mut Stream) -> f64 {
        self.tilted_service.as_ref().expect("service walk has no tilt").sample(rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{Role, StreamKey};

    fn mm2() -> ModelSpec {
        ModelSpec::mmc(3.0, 2.0, 2).unwrap()
    }

    #[test]
    fn phi_starts_downhill() {
        let m = mm2();
        let ctx = TiltContext::new(&m, &TiltOptions::default()).unwrap();
        assert_eq!(ctx.phi(0.0), 0.0);
        let h = 1e-6;
        let d = ctx.phi(h) / h;
        assert!((d - (ctx.a / 2.0 - 1.0 / 3.0)).abs() < 1e-5);
        assert!(d < 0.0);
    }

    #[test]
    fn mm2_root_solves_closed_form() {
        let m = mm2();
        let a = (0.5 + 2.0 / 3.0) / 2.0;
        let ctx = solve_tilt(&m, a).unwrap();
        let th = ctx.theta;
        let lhs = ((th * a).exp_m1() / 2.0 + 1.0) * 3.0 / (3.0 + th);
        assert!((lhs - 1.0).abs() < 1e-12);
        assert!(ctx.phi(th).abs() <= 1e-12);
        assert!(ctx.m > 2f64.ln() / th);
        assert!(ctx.acceptance_bound() < 1.0);
        // Exp(2) service: e^{η(S−a)} has mean one at 2/(2−η) = e^{ηa}.
        let eta = ctx.eta.unwrap();
        assert!((2.0 / (2.0 - eta) - (eta * a).exp()).abs() < 1e-10);
    }

    #[test]
    fn drift_constant_checked() {
        let m = mm2();
        assert!(matches!(solve_tilt(&m, 0.4), Err(Error::InvalidDriftConstant { .. })));
        assert!(matches!(solve_tilt(&m, 0.7), Err(Error::InvalidDriftConstant { .. })));
    }

    #[test]
    fn tilted_identity_monte_carlo() {
        let m = mm2();
        let ctx = TiltContext::new(&m, &TiltOptions::default()).unwrap();
        let mut rng = StreamKey::new(5, 0).stream(Role::Auxiliary, 0);
        let n = 1_000_000;
        let mut sum = 0.0;
        let mut sq = 0.0;
        for _ in 0..n {
            let u = rng.index(2);
            let t = m.arrival.sample(&mut rng);
            let inc = if u == 0 { ctx.a } else { 0.0 } - t;
            let v = (ctx.theta * inc).exp();
            sum += v;
            sq += v * v;
        }
        let mean = sum / n as f64;
        let se = ((sq / n as f64 - mean * mean) / n as f64).sqrt();
        assert!((mean - 1.0).abs() < 4.0 * se, "{mean} ± {se}");
    }

    #[test]
    fn tilted_step_frequencies_and_drift() {
        let m = ModelSpec::mmc(10.0, 2.0, 10).unwrap();
        let ctx = TiltContext::new(&m, &TiltOptions::default()).unwrap();
        let mut rng = StreamKey::new(6, 0).stream(Role::Proposal, 0);
        let n = 100_000;
        let mut hits = 0;
        let mut drift = 0.0;
        let mut tsum = 0.0;
        for _ in 0..n {
            let (u, t) = ctx.sample_tilted_step(3, &mut rng);
            if u == 3 {
                hits += 1;
            }
            drift += if u == 3 { ctx.a } else { 0.0 } - t;
            tsum += t;
        }
        let p = ctx.p_direction;
        let e = (ctx.theta * ctx.a).exp();
        assert!((p - e / (e + 9.0)).abs() < 1e-15);
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!(((hits as f64 / n as f64) - p).abs() < 4.0 * se);
        assert!(drift > 0.0);
        // Exp(λ) tilted by e^{−θt} is Exp(λ + θ).
        let mean_t = tsum / n as f64;
        let expect = 1.0 / (10.0 + ctx.theta);
        assert!((mean_t - expect).abs() < 4.0 * expect / (n as f64).sqrt());
    }

    #[test]
    fn capped_arrivals_tilt() {
        let m = mm2();
        let opts = TiltOptions { cap: Some(0.8), ..TiltOptions::default() };
        let ctx = TiltContext::new(&m, &opts).unwrap();
        assert!(ctx.phi(ctx.theta).abs() <= 1e-12);
        let mut rng = StreamKey::new(7, 0).stream(Role::Proposal, 0);
        // Tilted capped identity: E'[e^{θT̂}]·E[e^{−θT̂}] = 1.
        let n = 200_000;
        let mut acc = 0.0;
        for _ in 0..n {
            let t = ctx.effective(ctx.sample_tilted_arrival(&mut rng));
            acc += (ctx.theta * t).exp();
        }
        let lhs = acc / n as f64 * ln_laplace_capped(&m.arrival, Some(0.8), ctx.theta).exp();
        assert!((lhs - 1.0).abs() < 0.01, "{lhs}");
    }
}
