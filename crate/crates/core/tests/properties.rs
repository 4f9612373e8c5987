mod common;

use common::*;
use exactq::dcfp::{sample_stationary_kw, SamplerOptions};
use exactq::distributions::{DistributionSpec, ModelSpec};
use exactq::rng::StreamKey;
use exactq::sandwich::sample_stationary_sandwich;

fn general() -> ModelSpec {
    ModelSpec::new(
        DistributionSpec::uniform(0.0, 1.0).unwrap(),
        DistributionSpec::shifted_exponential(0.2, 1.25).unwrap(),
        3,
    )
    .unwrap()
}

#[test]
fn fifo_dominated_by_ra_on_coupled_paths() {
    for model in [ModelSpec::mmc(3.0, 2.0, 2).unwrap(), general()] {
        for seed in 0..10 {
            lemma1(&model, &StreamKey::new(seed, 0), 10_000).unwrap();
        }
    }
}

#[test]
fn sandwich_bounds_hold_the_stationary_vector() {
    let cases = [
        (ModelSpec::mmc(10.0, 2.0, 10).unwrap(), 2),
        (ModelSpec::mmc(3.0, 2.0, 2).unwrap(), 1),
        (general(), 4),
    ];
    for (model, kappa0) in cases {
        let opts = SamplerOptions { kappa0, ..SamplerOptions::default() };
        for rep in 0..25 {
            funnel(&model, &opts, &StreamKey::new(21, rep)).unwrap_or_else(|e| panic!("rep {rep}: {e}"));
        }
    }
}

#[test]
fn tilt_roots_make_mean_one_multipliers() {
    tilting_identity(&ModelSpec::mmc(3.0, 2.0, 2).unwrap(), 200_000, &StreamKey::new(3, 0), 4.5).unwrap();
    tilting_identity(&general(), 200_000, &StreamKey::new(3, 1), 4.5).unwrap();
}

#[test]
fn proposals_respect_the_acceptance_bound() {
    let model = ModelSpec::mmc(8.0, 5.0, 2).unwrap();
    let opts = SamplerOptions::default();
    for rep in 0..50 {
        let key = StreamKey::new(4, rep);
        acceptance_ratio(&sample_stationary_kw(&model, &opts, &key).unwrap().stats).unwrap();
        acceptance_ratio(&sample_stationary_sandwich(&model, &opts, &key, false).unwrap().stats).unwrap();
    }
}

#[test]
fn replays_are_write_once_and_deterministic() {
    for rep in 0..5 {
        write_once_and_determinism(&ModelSpec::mmc(3.0, 2.0, 2).unwrap(), &StreamKey::new(5, rep)).unwrap();
        write_once_and_determinism(&general(), &StreamKey::new(5, rep)).unwrap();
    }
}
