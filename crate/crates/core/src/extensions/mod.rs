//! Samplers built on an exact FIFO draw: time-stationary vectors, the
//! GI/GI/1 workload, delays under other queue disciplines, fork-join
//! sojourn times and the two-server sampler for models that never empty.

mod discipline;
mod forkjoin;
mod harris;

#[cfg(test)]
mod tests;

pub use discipline::{delay_under_discipline, Discipline};
pub use forkjoin::{forkjoin_sojourn, forkjoin_workload, ForkJoinModel, ForkJoinSample};
pub use harris::{harris_sample_c2, HarrisConfig, HarrisEvent, HarrisSample};

use serde::{Deserialize, Serialize};

use crate::dcfp::{kw_step_in_place, sample_stationary_kw, SamplerOptions};
use crate::distributions::ModelSpec;
use crate::error::{Error, Result};
use crate::rng::{Role, Stream, StreamKey};

/// `R(W₀ + S·e − T_e·f)⁺` with `S ~ G` and `T_e ~ A_e` drawn from `rng`:
/// the vector seen at an arbitrary time given the one seen by an arrival.
pub fn continuous_time_kw(w0: &[f64], model: &ModelSpec, rng: &mut Stream) -> Vec<f64> {
    let s = model.service.sample(rng);
    let te = model.arrival.sample_equilibrium(rng);
    let mut w = w0.to_vec();
    w.sort_by(f64::total_cmp);
    kw_step_in_place(&mut w, s, te);
    w
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum G1Method {
    /// `0` with probability `1 − ρ`, otherwise `D + S_e`.
    #[default]
    Mixture,
    /// `(D + S − T_e)⁺`.
    Lindley,
}

/// Time-stationary workload of a single-server queue. `D` is an exact delay
/// draw; the extra variables come from the auxiliary stream of `key`.
pub fn stationary_workload_g1(model: &ModelSpec, opts: &SamplerOptions, key: &StreamKey, method: G1Method) -> Result<f64> {
    if model.servers != 1 {
        return Err(Error::NotApplicable(format!("single-server workload with c = {}", model.servers)));
    }
    let mut aux = key.stream(Role::Auxiliary, 0);
    match method {
        G1Method::Mixture => {
            if !aux.bernoulli(model.rho) {
                return Ok(0.0);
            }
            let d = sample_stationary_kw(model, opts, key)?.w[0];
            Ok(d + model.service.sample_equilibrium(&mut aux))
        }
        G1Method::Lindley => {
            let d = sample_stationary_kw(model, opts, key)?.w[0];
            Ok(continuous_time_kw(&[d], model, &mut aux)[0])
        }
    }
}
