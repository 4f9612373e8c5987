use super::*;
use crate::dcfp::{kw_step, prepare, reconstruct_ra_forward, Backward, DetailedState, NodeStart};
use crate::distributions::DistributionSpec;
use crate::harness::stats::{ks_one_sample, ks_two_sample};
use crate::walk::ServiceVector;

fn harris_model() -> ModelSpec {
    ModelSpec::new(
        DistributionSpec::uniform(0.5, 0.9).unwrap(),
        DistributionSpec::shifted_exponential(0.95, 10.0).unwrap(),
        2,
    )
    .unwrap()
}

#[test]
fn continuous_time_output_sorted_and_nonnegative() {
    let model = ModelSpec::mmc(5.0, 2.0, 3).unwrap();
    let mut rng = StreamKey::new(4, 0).stream(Role::Auxiliary, 0);
    for _ in 0..500 {
        let w0: Vec<f64> = (0..3).map(|_| 3.0 * rng.uniform()).collect();
        let w = continuous_time_kw(&w0, &model, &mut rng);
        assert!(w.iter().all(|&x| x >= 0.0));
        assert!(w.windows(2).all(|p| p[0] <= p[1]));
    }
    // a one-server step with S = 1, T_e = 2 empties the queue
    assert_eq!(kw_step(&[0.0], 1.0, 2.0), vec![0.0]);
}

#[test]
fn g1_mixture_atom_matches_rho() {
    let model = ModelSpec::mmc(1.0, 2.0, 1).unwrap();
    let opts = SamplerOptions::default();
    let n = 2000;
    let zeros = (0..n)
        .filter(|&r| stationary_workload_g1(&model, &opts, &StreamKey::new(5, r), G1Method::Mixture).unwrap() == 0.0)
        .count() as f64;
    let p = 1.0 - model.rho;
    let se = (p * (1.0 - p) / n as f64).sqrt();
    assert!((zeros / n as f64 - p).abs() < 4.0 * se, "{zeros}");
    assert!(stationary_workload_g1(&ModelSpec::mmc(1.0, 2.0, 2).unwrap(), &opts, &StreamKey::new(5, 0), G1Method::Lindley).is_err());
}

#[test]
fn queue_below_c_means_no_delay() {
    let model = ModelSpec::mmc(3.0, 2.0, 2).unwrap();
    let state = DetailedState { q0: 1, l0: 1, residuals: vec![0.3], waiting: 0 };
    let mut rng = StreamKey::new(1, 1).stream(Role::Discipline, 0);
    for d in [Discipline::Fifo, Discipline::Lifo, Discipline::Rs] {
        assert_eq!(delay_under_discipline(&state, d, &model, &mut rng), 0.0);
    }
}

#[test]
fn fifo_discipline_reproduces_the_delay_law() {
    let model = ModelSpec::mmc(3.0, 2.0, 2).unwrap();
    let opts = SamplerOptions::default();
    let mut a = Vec::new();
    let mut b = Vec::new();
    for r in 0..1500 {
        let s = sample_stationary_kw(&model, &opts, &StreamKey::new(6, r)).unwrap();
        a.push(s.w[0]);
        let t = sample_stationary_kw(&model, &opts, &StreamKey::new(7, r)).unwrap();
        let mut rng = StreamKey::new(7, r).stream(Role::Discipline, 0);
        b.push(delay_under_discipline(&t.state, Discipline::Fifo, &model, &mut rng));
    }
    let t = ks_two_sample(&a, &b).unwrap();
    assert!(t.passes(0.01), "{t:?}");
}

#[test]
fn single_node_fork_join_is_delay_plus_service() {
    let fj = ForkJoinModel::new(
        DistributionSpec::exponential(1.0).unwrap(),
        ServiceVector::Independent(vec![DistributionSpec::exponential(2.0).unwrap()]),
    )
    .unwrap();
    let (rho, gap) = (0.5, 1.0);
    let mut v = Vec::new();
    for r in 0..3000 {
        let s = forkjoin_sojourn(&fj, &StreamKey::new(8, r), 1 << 30).unwrap();
        assert!((s.h - (s.workload[0] + s.services[0])).abs() < 1e-12);
        v.push(s.workload[0]);
    }
    // M/M/1 delay: atom 1 − ρ at zero, then exponential tail with rate μ − λ
    let cdf = |x: f64| if x < 0.0 { 0.0 } else { 1.0 - rho * (-gap * x).exp() };
    let left = |x: f64| if x <= 0.0 { 0.0 } else { 1.0 - rho * (-gap * x).exp() };
    let t = ks_one_sample(&v, cdf, left).unwrap();
    assert!(t.passes(0.01), "{t:?}");
}

#[test]
fn fork_join_sojourn_dominates_services() {
    let fj = ForkJoinModel::new(
        DistributionSpec::exponential(1.0).unwrap(),
        ServiceVector::CommonFactor {
            common: DistributionSpec::exponential(5.0).unwrap(),
            own: vec![DistributionSpec::exponential(3.0).unwrap(), DistributionSpec::exponential(4.0).unwrap()],
        },
    )
    .unwrap();
    for r in 0..200 {
        let s = forkjoin_sojourn(&fj, &StreamKey::new(9, r), 1 << 30).unwrap();
        assert!(s.workload.iter().all(|&v| v >= 0.0));
        assert!(s.services.iter().all(|&x| s.h >= x));
    }
    let bad = ServiceVector::Independent(vec![DistributionSpec::exponential(0.5).unwrap()]);
    assert!(matches!(ForkJoinModel::new(DistributionSpec::exponential(1.0).unwrap(), bad), Err(Error::Unstable { .. })));
}

#[test]
fn harris_applicability() {
    let opts = SamplerOptions::default();
    let key = StreamKey::new(1, 0);
    let cfg = HarrisConfig::default();
    assert!(matches!(
        harris_sample_c2(&ModelSpec::mmc(3.0, 2.0, 2).unwrap(), &cfg, &opts, &key),
        Err(Error::NotApplicable(_))
    ));
    let m = harris_model();
    let three = ModelSpec::new(m.arrival.clone(), m.service.clone(), 3).unwrap();
    assert!(matches!(harris_sample_c2(&three, &cfg, &opts, &key), Err(Error::NotApplicable(_))));
    // past the support of T
    let wide = HarrisConfig { epsilon: Some(0.92) };
    assert!(matches!(harris_sample_c2(&m, &wide, &opts, &key), Err(Error::Config(_))));
    assert!((cfg.resolve(&m).unwrap() - 0.475).abs() < 1e-12);
}

#[test]
fn harris_event_replays_and_restart_is_shared() {
    let model = harris_model();
    let opts = SamplerOptions::default();
    let cfg = HarrisConfig::default();
    for r in 0..40 {
        let key = StreamKey::new(11, r);
        let s = harris_sample_c2(&model, &cfg, &opts, &key).unwrap();
        let e = s.event;
        assert!(e.gap > s.epsilon && e.other_bound <= s.epsilon);
        // replay the RA system from far-back empty points and look at arrival −k
        let ctx = prepare(&model, &opts).unwrap();
        let mut bw = Backward::new(&model, &ctx, &key, opts.budget);
        let resets = bw.resets(e.k).unwrap();
        let scn = bw.scenario_mut();
        assert_eq!(scn.u(e.k), e.node);
        let starts: Vec<NodeStart> = resets.iter().map(|&d| NodeStart::idle(scn, d)).collect();
        let log = reconstruct_ra_forward(scn, &starts, e.k);
        assert_eq!(log.workload[e.node], 0.0);
        assert!(log.workload[1 - e.node] <= s.epsilon);
        assert!(log.found[0].0 <= 1);
        // one arrival later both systems hold the same single customer
        let residual = e.service - e.gap;
        assert!(residual > 0.0);
        if log.found.len() > 1 {
            assert_eq!(log.found[1].0, 1);
            assert!((log.found[1].1 - residual).abs() < 1e-9);
        }
        assert!(s.w.windows(2).all(|p| p[0] <= p[1]));
        assert!(s.state.q0 >= 1, "a two-server system with P(T > S) = 0 never empties");
    }
}
