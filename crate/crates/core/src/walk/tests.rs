use super::*;
use crate::distributions::{DistributionSpec, ModelSpec, TiltContext, TiltOptions};
use crate::harness::stats::ks_two_sample;
use crate::rng::{Role, StreamKey};

fn routing_ledger(model: &ModelSpec, seed: u64, rep: u64) -> Ledger<RoutingWalk> {
    let ctx = TiltContext::new(model, &TiltOptions::default()).unwrap();
    let key = StreamKey::new(seed, rep);
    let walk = RoutingWalk::new(
        ctx,
        model.arrival.clone(),
        key.stream(Role::Arrival, 0),
        key.stream(Role::Routing, 0),
        key.stream(Role::Proposal, 0),
    );
    Ledger::new(walk, DEFAULT_STEP_BUDGET)
}

fn service_ledger(model: &ModelSpec, seed: u64, rep: u64) -> Ledger<ServiceWalk> {
    let ctx = TiltContext::new(model, &TiltOptions::default()).unwrap();
    let key = StreamKey::new(seed, rep);
    let walk = ServiceWalk::new(
        ctx,
        model.service.clone(),
        key.stream(Role::Service, 0),
        key.stream(Role::Proposal, 1),
    );
    Ledger::new(walk, DEFAULT_STEP_BUDGET)
}

#[test]
fn global_max_dominates_path() {
    let model = ModelSpec::mmc(3.0, 2.0, 2).unwrap();
    for rep in 0..200 {
        let mut l = routing_ledger(&model, 1, rep);
        l.extend().unwrap();
        let m = l.global_max().unwrap().to_vec();
        assert!(m.iter().all(|&v| v >= 0.0));
        for k in 0..=l.horizon() {
            for i in 0..2 {
                assert!(l.value(k)[i] <= m[i]);
            }
        }
        assert_eq!(l.stats().bound_violations, 0);
    }
}

#[test]
fn path_consistency() {
    let model = ModelSpec::mmc(10.0, 2.0, 10).unwrap();
    let mut l = routing_ledger(&model, 2, 0);
    l.extend_to(500).unwrap();
    let a = l.increments().context().a;
    for k in 1..=l.horizon() {
        let r = l.mark(k);
        for i in 0..10 {
            let inc = l.value(k)[i] - l.value(k - 1)[i];
            let expect = if r.server == i { a } else { 0.0 } - r.t;
            assert!((inc - expect).abs() < 1e-9);
        }
    }
}

/// Running maximum of a long nominal walk, as a brute-force stand-in for the all-time max.
fn brute_max<F: FnMut() -> f64>(steps: usize, mut inc: F) -> f64 {
    let mut pos = 0.0;
    let mut max = 0.0f64;
    for _ in 0..steps {
        pos += inc();
        max = max.max(pos);
    }
    max
}

#[test]
fn single_server_global_max_matches_brute_force() {
    let model = ModelSpec::mmc(1.0, 2.0, 1).unwrap();
    let a = model.default_drift();
    let exact: Vec<f64> = (0..4000)
        .map(|rep| {
            let mut l = routing_ledger(&model, 3, rep);
            l.extend().unwrap();
            l.global_max().unwrap()[0]
        })
        .collect();
    let mut rng = StreamKey::new(3, 999).stream(Role::Auxiliary, 0);
    let brute: Vec<f64> = (0..4000).map(|_| brute_max(3000, || a - rng.exp1())).collect();
    let r = ks_two_sample(&exact, &brute).unwrap();
    assert!(r.passes(0.01), "{r:?}");
}

#[test]
fn scalar_service_max_matches_brute_force() {
    let model = ModelSpec::mmc(1.0, 2.0, 1).unwrap();
    let a = model.default_drift();
    let exact: Vec<f64> = (0..4000)
        .map(|rep| {
            let mut l = service_ledger(&model, 4, rep);
            l.extend().unwrap();
            l.global_max().unwrap()[0]
        })
        .collect();
    let mut rng = StreamKey::new(4, 999).stream(Role::Auxiliary, 0);
    let brute: Vec<f64> = (0..4000).map(|_| brute_max(3000, || rng.exp1() / 2.0 - a)).collect();
    let r = ks_two_sample(&exact, &brute).unwrap();
    assert!(r.passes(0.01), "{r:?}");
}

#[test]
fn service_increments_drift_down() {
    let model = ModelSpec::mmc(3.0, 2.0, 2).unwrap();
    let mut l = service_ledger(&model, 5, 0);
    l.extend_to(20_000).unwrap();
    let h = l.horizon();
    assert!(l.value(h)[0] < 0.0);
}

fn assert_caps_sound<I: Increments>(l: &mut Ledger<I>, extra: usize) {
    let h = l.horizon();
    let cap: Vec<f64> = (0..l.dim()).map(|i| l.cap(i)).collect();
    let records = l.records();
    l.extend_to(h + extra).unwrap();
    for k in h..=l.horizon() {
        for i in 0..l.dim() {
            assert!(l.value(k)[i] <= cap[i] + 1e-12, "cap broken at {k}");
        }
    }
    for &n in &records {
        for k in n..=l.horizon() {
            for i in 0..l.dim() {
                assert!(l.value(k)[i] <= l.value(n)[i] + 1e-12);
            }
        }
    }
}

#[test]
fn certified_caps_hold_under_continuation() {
    for (c, lambda) in [(1usize, 1.0), (3, 4.0)] {
        let model = ModelSpec::mmc(lambda, 2.0, c).unwrap();
        for rep in 0..20 {
            let mut l = routing_ledger(&model, 6, rep);
            l.extend().unwrap();
            assert_caps_sound(&mut l, 10_000);
            assert_eq!(l.stats().bound_violations, 0);
        }
    }
}

#[test]
fn records_are_sound_and_nonempty_eventually() {
    let model = ModelSpec::mmc(3.0, 2.0, 2).unwrap();
    let mut l = routing_ledger(&model, 7, 0);
    l.extend_until(|l| !l.records().is_empty()).unwrap();
    assert!(!l.records().is_empty());
    let mut x = service_ledger(&model, 7, 0);
    x.extend_until(|l| l.records().len() > 3).unwrap();
    assert_caps_sound(&mut x, 5_000);
}

#[test]
fn patch_acceptance_matches_independent_max_estimate() {
    let model = ModelSpec::mmc(3.0, 2.0, 2).unwrap();
    let m = TiltContext::new(&model, &TiltOptions::default()).unwrap().m;
    let mut tried = 0u64;
    let mut accepted = 0u64;
    for rep in 0..100 {
        let mut l = routing_ledger(&model, 8, rep);
        l.extend().unwrap();
        for _ in 0..30 {
            l.extend().unwrap();
        }
        tried += l.stats().patches_tried - 1;
        accepted += l.stats().patches_accepted - 1;
    }
    let p1 = accepted as f64 / tried as f64;
    let n2 = 4000;
    let below = (0..n2)
        .filter(|&rep| {
            let mut l = routing_ledger(&model, 9, rep);
            l.extend().unwrap();
            l.global_max().unwrap().iter().all(|&v| v <= m)
        })
        .count();
    let p2 = below as f64 / n2 as f64;
    let se = (p1 * (1.0 - p1) / tried as f64 + p2 * (1.0 - p2) / n2 as f64).sqrt();
    assert!((p1 - p2).abs() < 4.0 * se, "{p1} vs {p2} (se {se})");
}

#[test]
fn identical_seeds_identical_paths() {
    let model = ModelSpec::mmc(10.0, 2.0, 10).unwrap();
    let mut a = routing_ledger(&model, 10, 3);
    let mut b = routing_ledger(&model, 10, 3);
    a.extend_to(300).unwrap();
    b.extend_to(300).unwrap();
    assert_eq!(a.horizon(), b.horizon());
    assert_eq!(a.marks(), b.marks());
    assert_eq!(a.milestones(), b.milestones());
}

#[test]
fn budget_is_enforced() {
    let model = ModelSpec::mmc(3.0, 2.0, 2).unwrap();
    let ctx = TiltContext::new(&model, &TiltOptions::default()).unwrap();
    let key = StreamKey::new(1, 1);
    let walk = RoutingWalk::new(
        ctx,
        model.arrival.clone(),
        key.stream(Role::Arrival, 0),
        key.stream(Role::Routing, 0),
        key.stream(Role::Proposal, 0),
    );
    let mut l = Ledger::new(walk, 50);
    assert!(matches!(l.extend_to(10_000), Err(Error::BudgetExceeded(50))));
}

#[test]
fn nonrising_service_walk_is_monotone() {
    // S ≤ 0.6 < a: the walk never rises, every index is a record.
    let model = ModelSpec::new(
        DistributionSpec::exponential(1.0).unwrap(),
        DistributionSpec::uniform(0.2, 0.6).unwrap(),
        1,
    )
    .unwrap();
    let ctx = TiltContext::new(&model, &TiltOptions { drift: Some(0.7), ..TiltOptions::default() }).unwrap();
    assert!(ctx.eta.is_none());
    let key = StreamKey::new(2, 2);
    let walk = ServiceWalk::new(ctx, model.service.clone(), key.stream(Role::Service, 0), key.stream(Role::Proposal, 1));
    let mut l = Ledger::new(walk, DEFAULT_STEP_BUDGET);
    l.extend_to(50).unwrap();
    assert_eq!(l.records().len(), l.horizon() + 1);
}

#[test]
fn trace_has_one_row_per_step() {
    let model = ModelSpec::mmc(3.0, 2.0, 2).unwrap();
    let mut l = routing_ledger(&model, 11, 0);
    l.extend().unwrap();
    let mut buf = Vec::new();
    l.write_trace(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), l.horizon() + 2);
    assert!(text.starts_with("k,server,t,y0,y1,event"));
}
