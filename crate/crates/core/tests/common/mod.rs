//! Checks shared by the property tests and the acceptance run.
#![allow(dead_code)]

use exactq::dcfp::{
    fifo_arrivals, fifo_run, fifo_state_at_zero, prepare, sample_stationary_kw, Backward, SamplerOptions, Scenario,
};
use exactq::distributions::ModelSpec;
use exactq::rng::{Role, StreamKey};
use exactq::sandwich::sample_stationary_sandwich;
use exactq::walk::{ForkJoinWalk, ServiceVector, WalkStats};

pub type Check = Result<(), String>;

const TOL: f64 = 1e-9;

/// Scenario of `n` backward arrivals drawn straight from the model.
pub fn random_scenario(model: &ModelSpec, key: &StreamKey, n: usize) -> Scenario {
    let mut scn = Scenario::new(model, key.stream(Role::Forward, 0));
    let mut rng = key.stream(Role::Auxiliary, 1);
    for _ in 0..n {
        let t = model.arrival.sample(&mut rng);
        let s = model.service.sample(&mut rng);
        let u = rng.index(model.servers);
        scn.push_backward(t, s, u);
    }
    scn
}

/// FIFO fed with initiation-ordered services stays below the RA system:
/// fewer customers, and less work once RA work is counted in initiation order.
pub fn lemma1(model: &ModelSpec, key: &StreamKey, n: usize) -> Check {
    let mut scn = random_scenario(model, key, n);
    let (run, log) = fifo_state_at_zero(&mut scn, n);
    let services = log.services();
    let mut shift = 0.0;
    for (k, (f, r)) in run.found.iter().zip(&log.found).enumerate() {
        if f.0 > r.0 {
            return Err(format!("arrival {k}: FIFO holds {} customers, RA {}", f.0, r.0));
        }
        if f.1 > r.1 + shift + TOL * (1.0 + r.1) {
            return Err(format!("arrival {k}: FIFO work {} above RA work {}", f.1, r.1 + shift));
        }
        shift += services[k] - scn.s(n - k);
    }
    Ok(())
}

fn leq(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| *x <= *y + TOL * (1.0 + y.abs()))
}

/// Bounds are ordered, nested across doublings, and hold the stationary
/// FIFO vector (rebuilt from a deeper empty RA point) at every arrival.
pub fn funnel(model: &ModelSpec, opts: &SamplerOptions, key: &StreamKey) -> Check {
    let s = sample_stationary_sandwich(model, opts, key, true).map_err(|e| e.to_string())?;
    if !s.coalesced || s.tau > 0.0 {
        return Err(format!("no coalescence before 0 (tau = {})", s.tau));
    }
    for w in s.trajectories.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        for j in 0..=a.kappa {
            if !leq(&b.at(j).upper, &a.at(j).upper) || !leq(&a.at(j).lower, &b.at(j).lower) {
                return Err(format!("funnel broken between depths {} and {} at arrival -{j}", a.kappa, b.kappa));
            }
        }
    }
    // the stationary vectors found by arrivals -K..-1 and at 0
    let deepest = s.kappa_final;
    let ctx = prepare(model, opts).map_err(|e| e.to_string())?;
    let mut bw = Backward::new(model, &ctx, key, opts.budget);
    let n = bw.empty_beyond(deepest).map_err(|e| e.to_string())?;
    let scn = bw.scenario_mut();
    let (_, log) = fifo_state_at_zero(scn, n);
    let arrivals = fifo_arrivals(scn, n, &log.services());
    let c = model.servers;
    let truth = |j: usize| -> Vec<f64> {
        // state found by arrival -j: run the arrivals before it
        fifo_run(c, scn.time(n), &[], &arrivals[..n - j], scn.time(j)).workload
    };
    for t in &s.trajectories {
        for j in 0..=t.kappa {
            let p = t.at(j);
            let v = truth(j);
            if !leq(&p.lower, &p.upper) || !leq(&p.lower, &v) || !leq(&v, &p.upper) {
                return Err(format!(
                    "depth {} arrival -{j}: {:?} not within [{:?}, {:?}]",
                    t.kappa, v, p.lower, p.upper
                ));
            }
        }
    }
    let w = truth(0);
    if !leq(&w, &s.w) || !leq(&s.w, &w) {
        return Err(format!("sample {:?} differs from the stationary vector {:?}", s.w, w));
    }
    Ok(())
}

/// Monte Carlo check that `E e^{θ·Δ} = 1` at every tilt root, within `z` standard errors.
pub fn tilting_identity(model: &ModelSpec, draws: usize, key: &StreamKey, z: f64) -> Check {
    let ctx = prepare(model, &SamplerOptions::default()).map_err(|e| e.to_string())?;
    let mut rng = key.stream(Role::Auxiliary, 2);
    let c = model.servers;
    let check = |name: &str, xs: &[f64]| -> Check {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        if (mean - 1.0).abs() > z * sd / n.sqrt() {
            return Err(format!("{name}: mean multiplier {mean} (sd {sd})"));
        }
        Ok(())
    };
    let routing: Vec<f64> = (0..draws)
        .map(|_| {
            let t = ctx.effective(model.arrival.sample(&mut rng));
            let hit = if rng.index(c) == 0 { ctx.a } else { 0.0 };
            (ctx.theta * (hit - t)).exp()
        })
        .collect();
    check("routing walk", &routing)?;
    if let Some(eta) = ctx.eta {
        let service: Vec<f64> = (0..draws).map(|_| (eta * (model.service.sample(&mut rng) - ctx.a)).exp()).collect();
        check("service walk", &service)?;
    }
    // fork-join walk with the same marginals on every node
    let sv = ServiceVector::Independent(vec![model.service.clone(); 2]);
    let fj = ForkJoinWalk::new(model.arrival.clone(), sv, key.stream(Role::Service, 9), key.stream(Role::Proposal, 9));
    if let Ok(fj) = fj {
        let th = fj.thetas()[0];
        let xs: Vec<f64> = (0..draws)
            .map(|_| (th * (model.service.sample(&mut rng) - model.arrival.sample(&mut rng))).exp())
            .collect();
        check("fork-join walk", &xs)?;
    }
    Ok(())
}

/// No proposal ever beat the theoretical acceptance bound.
pub fn acceptance_ratio(stats: &WalkStats) -> Check {
    if stats.bound_violations > 0 || stats.max_ratio > 1.0 {
        return Err(format!("{} violations, max ratio {}", stats.bound_violations, stats.max_ratio));
    }
    Ok(())
}

/// Replays agree: scenario entries do not depend on how far the horizon was pushed,
/// and the samplers return the same draw for the same key.
pub fn write_once_and_determinism(model: &ModelSpec, key: &StreamKey) -> Check {
    let opts = SamplerOptions::default();
    let ctx = prepare(model, &opts).map_err(|e| e.to_string())?;
    let mut a = Backward::new(model, &ctx, key, opts.budget);
    let mut b = Backward::new(model, &ctx, key, opts.budget);
    a.ensure(40).map_err(|e| e.to_string())?;
    b.ensure(40).map_err(|e| e.to_string())?;
    b.grow().and_then(|_| b.grow()).map_err(|e| e.to_string())?;
    let (sa, sb) = (a.scenario(), b.scenario());
    for j in 1..=sa.depth() {
        if (sa.t(j), sa.s(j), sa.u(j)) != (sb.t(j), sb.s(j), sb.u(j)) {
            return Err(format!("arrival -{j} changed when the horizon grew"));
        }
    }
    let k1 = sample_stationary_kw(model, &opts, key).map_err(|e| e.to_string())?;
    let k2 = sample_stationary_kw(model, &opts, key).map_err(|e| e.to_string())?;
    let s1 = sample_stationary_sandwich(model, &opts, key, false).map_err(|e| e.to_string())?;
    let s2 = sample_stationary_sandwich(model, &opts, key, false).map_err(|e| e.to_string())?;
    if k1 != k2 || s1 != s2 {
        return Err("same key, different draws".into());
    }
    Ok(())
}
