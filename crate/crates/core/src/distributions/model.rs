use serde::{Deserialize, Serialize};

use super::{DistConfig, DistributionSpec};
use crate::error::{Error, Result};

/// Structured-text model description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub arrival: DistConfig,
    pub service: DistConfig,
    pub servers: usize,
    /// Drift constant for the dominating walk; midpoint of the admissible interval when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift: Option<f64>,
}

impl ModelConfig {
    pub fn build(&self) -> Result<ModelSpec> {
        build_model(&self.arrival, &self.service, self.servers)
    }

    /// M/M/c with arrival rate `lambda` and service rate `mu`.
    pub fn mmc(lambda: f64, mu: f64, servers: usize) -> Self {
        Self {
            arrival: DistConfig::exponential(lambda),
            service: DistConfig::exponential(mu),
            servers,
            drift: None,
        }
    }
}

/// A validated GI/GI/c model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub arrival: DistributionSpec,
    pub service: DistributionSpec,
    pub servers: usize,
    /// Arrival rate 1 / E T.
    pub lambda: f64,
    /// Service rate 1 / E S.
    pub mu: f64,
    /// λ·E S.
    pub rho: f64,
    /// `P(T > S) > 0`, i.e. the queue empties infinitely often.
    pub emptiable: bool,
}

pub fn build_model(arrival: &DistConfig, service: &DistConfig, servers: usize) -> Result<ModelSpec> {
    let arrival = DistributionSpec::from_config(arrival)?;
    let service = DistributionSpec::from_config(service)?;
    ModelSpec::new(arrival, service, servers)
}

impl ModelSpec {
    pub fn new(arrival: DistributionSpec, service: DistributionSpec, servers: usize) -> Result<Self> {
        if servers == 0 {
            return Err(Error::InvalidParameters("need at least one server".into()));
        }
        if !(arrival.mean() > 0.0) || !(service.mean() > 0.0) {
            return Err(Error::InvalidParameters("means must be positive".into()));
        }
        let lambda = 1.0 / arrival.mean();
        let mu = 1.0 / service.mean();
        let rho = lambda * service.mean();
        if rho >= servers as f64 {
            return Err(Error::Unstable { rho, servers });
        }
        let emptiable = arrival.upper() > service.lower();
        Ok(Self { arrival, service, servers, lambda, mu, rho, emptiable })
    }

    pub fn mmc(lambda: f64, mu: f64, servers: usize) -> Result<Self> {
        ModelConfig::mmc(lambda, mu, servers).build()
    }

    /// Open interval `(1/μ, c/λ)` of admissible drift constants.
    pub fn drift_interval(&self) -> (f64, f64) {
        (1.0 / self.mu, self.servers as f64 / self.lambda)
    }

    pub fn default_drift(&self) -> f64 {
        let (lo, hi) = self.drift_interval();
        0.5 * (lo + hi)
    }

    /// Same model with interarrival times replaced by `min(T, b)`.
    pub fn with_arrival(&self, arrival: DistributionSpec) -> Result<Self> {
        Self::new(arrival, self.service.clone(), self.servers)
    }
}
