//! Interarrival and service laws.
//!
//! A [`DistributionSpec`] bundles a nonnegative law with everything the
//! samplers need from it: nominal draws, density and CDF, (log-)moment
//! generating function, exponentially tilted draws, the integrated tail and
//! draws from the equilibrium (integrated-tail) law.
//!
//! | family | params | law |
//! |---|---|---|
//! | `exponential` | rate r | Exp(r) |
//! | `uniform` | low, high | U\[low, high\] |
//! | `shifted-exponential` | shift d, rate r | d + Exp(r) |
//! | `deterministic-plus-jitter` | value v, half-width w | v + triangular(−w, w); w = 0 is a point mass |
//! | `table` | x\[\], pdf\[\] | piecewise-linear density on the grid |

mod model;
pub mod quad;
mod tilt;

pub use model::{build_model, ModelConfig, ModelSpec};
pub use tilt::{positive_root, solve_tilt, TiltContext, TiltOptions};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Stream;

const QUAD_TOL: f64 = 1e-10;

/// Structured-text form of a law: `{family, params[]}` or `{family: "table", table: {x[], pdf[]}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistConfig {
    pub family: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub params: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<TableConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableConfig {
    pub x: Vec<f64>,
    pub pdf: Vec<f64>,
}

impl DistConfig {
    pub fn exponential(rate: f64) -> Self {
        Self::with("exponential", vec![rate])
    }

    pub fn uniform(low: f64, high: f64) -> Self {
        Self::with("uniform", vec![low, high])
    }

    pub fn shifted_exponential(shift: f64, rate: f64) -> Self {
        Self::with("shifted-exponential", vec![shift, rate])
    }

    pub fn jitter(value: f64, half_width: f64) -> Self {
        Self::with("deterministic-plus-jitter", vec![value, half_width])
    }

    pub fn table(x: Vec<f64>, pdf: Vec<f64>) -> Self {
        Self { family: "table".into(), params: Vec::new(), table: Some(TableConfig { x, pdf }) }
    }

    fn with(family: &str, params: Vec<f64>) -> Self {
        Self { family: family.into(), params, table: None }
    }
}

/// Distribution family with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Exponential { rate: f64 },
    Uniform { low: f64, high: f64 },
    ShiftedExponential { shift: f64, rate: f64 },
    /// `value + w·(U₁ + U₂ − 1)`: symmetric triangular jitter, point mass when `w = 0`.
    Jitter { value: f64, half_width: f64 },
    Table(Table),
}

/// Piecewise-linear density on a grid, normalized by the trapezoid rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    x: Vec<f64>,
    pdf: Vec<f64>,
    cdf: Vec<f64>,
}

impl Table {
    fn new(x: Vec<f64>, pdf: Vec<f64>) -> Result<Self> {
        if x.len() < 2 || x.len() != pdf.len() {
            return Err(Error::InvalidParameters(
                "table needs matching x and pdf arrays with at least two points".into(),
            ));
        }
        if x[0] < 0.0 || x.windows(2).any(|w| !(w[1] > w[0])) || x.iter().any(|v| !v.is_finite())
        {
            return Err(Error::InvalidParameters("table grid must be nonnegative and strictly increasing".into()));
        }
        if pdf.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidParameters("table pdf values must be finite and nonnegative".into()));
        }
        let mut cdf = vec![0.0; x.len()];
        for k in 1..x.len() {
            cdf[k] = cdf[k - 1] + 0.5 * (pdf[k] + pdf[k - 1]) * (x[k] - x[k - 1]);
        }
        let total = cdf[x.len() - 1];
        if !(total > 0.0) {
            return Err(Error::InvalidParameters("table pdf has zero mass".into()));
        }
        let pdf = pdf.iter().map(|p| p / total).collect();
        let cdf = cdf.iter().map(|c| c / total).collect();
        Ok(Self { x, pdf, cdf })
    }

    fn segment(&self, x: f64) -> Option<usize> {
        if x < self.x[0] || x > self.x[self.x.len() - 1] {
            return None;
        }
        let k = self.x.partition_point(|&g| g <= x).saturating_sub(1);
        Some(k.min(self.x.len() - 2))
    }

    fn density(&self, x: f64) -> f64 {
        match self.segment(x) {
            None => 0.0,
            Some(k) => {
                let t = (x - self.x[k]) / (self.x[k + 1] - self.x[k]);
                self.pdf[k] + t * (self.pdf[k + 1] - self.pdf[k])
            }
        }
    }

    fn cdf(&self, x: f64) -> f64 {
        if x <= self.x[0] {
            return 0.0;
        }
        if x >= self.x[self.x.len() - 1] {
            return 1.0;
        }
        let k = self.segment(x).unwrap();
        let h = self.x[k + 1] - self.x[k];
        let d = x - self.x[k];
        self.cdf[k] + self.pdf[k] * d + (self.pdf[k + 1] - self.pdf[k]) * d * d / (2.0 * h)
    }

    /// Draw from the density restricted to segment `k`.
    fn sample_in_segment(&self, k: usize, u: f64) -> f64 {
        let h = self.x[k + 1] - self.x[k];
        let (f0, f1) = (self.pdf[k], self.pdf[k + 1]);
        let mass = 0.5 * (f0 + f1) * h;
        let target = u * mass;
        let slope = (f1 - f0) / h;
        let d = if slope.abs() < 1e-14 * (f0 + f1).max(1e-300) / h {
            if f0 > 0.0 { target / f0 } else { u * h }
        } else {
            // f0·d + slope·d²/2 = target
            let disc = (f0 * f0 + 2.0 * slope * target).max(0.0);
            2.0 * target / (f0 + disc.sqrt())
        };
        self.x[k] + d.clamp(0.0, h)
    }

    fn sample(&self, rng: &mut Stream) -> f64 {
        let u = rng.uniform();
        let k = self.cdf.partition_point(|&c| c <= u).saturating_sub(1).min(self.x.len() - 2);
        let mass = self.cdf[k + 1] - self.cdf[k];
        let v = if mass > 0.0 { ((u - self.cdf[k]) / mass).clamp(0.0, 1.0) } else { rng.uniform() };
        self.sample_in_segment(k, v)
    }
}

/// A validated nonnegative law with cached moments and support.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionSpec {
    family: Family,
    mean: f64,
    variance: f64,
    lower: f64,
    upper: f64,
}

fn require(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameters(msg.to_string()))
    }
}

fn positive_finite(v: f64) -> bool {
    v.is_finite() && v > 0.0
}

impl DistributionSpec {
    pub fn from_config(cfg: &DistConfig) -> Result<Self> {
        let p = &cfg.params;
        let arity = |n: usize| -> Result<()> {
            require(p.len() == n, &format!("family {} expects {n} parameters, got {}", cfg.family, p.len()))
        };
        let family = match cfg.family.as_str() {
            "exponential" => {
                arity(1)?;
                require(positive_finite(p[0]), "exponential rate must be positive")?;
                Family::Exponential { rate: p[0] }
            }
            "uniform" => {
                arity(2)?;
                require(p[0] >= 0.0 && p[1] > p[0] && p[1].is_finite(), "uniform needs 0 <= low < high")?;
                Family::Uniform { low: p[0], high: p[1] }
            }
            "shifted-exponential" => {
                arity(2)?;
                require(p[0] >= 0.0 && p[0].is_finite(), "shift must be nonnegative")?;
                require(positive_finite(p[1]), "rate must be positive")?;
                Family::ShiftedExponential { shift: p[0], rate: p[1] }
            }
            "deterministic-plus-jitter" => {
                arity(2)?;
                require(positive_finite(p[0]), "value must be positive")?;
                require(p[1] >= 0.0 && p[1] <= p[0], "jitter half-width must lie in [0, value]")?;
                Family::Jitter { value: p[0], half_width: p[1] }
            }
            "table" => {
                let t = cfg
                    .table
                    .as_ref()
                    .ok_or_else(|| Error::InvalidParameters("table family needs a table".into()))?;
                Family::Table(Table::new(t.x.clone(), t.pdf.clone())?)
            }
            other => return Err(Error::InvalidParameters(format!("unknown family {other:?}"))),
        };
        Ok(Self::from_family(family))
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        Self::from_config(&DistConfig::exponential(rate))
    }

    pub fn uniform(low: f64, high: f64) -> Result<Self> {
        Self::from_config(&DistConfig::uniform(low, high))
    }

    pub fn shifted_exponential(shift: f64, rate: f64) -> Result<Self> {
        Self::from_config(&DistConfig::shifted_exponential(shift, rate))
    }

    pub fn jitter(value: f64, half_width: f64) -> Result<Self> {
        Self::from_config(&DistConfig::jitter(value, half_width))
    }

    pub fn table(x: Vec<f64>, pdf: Vec<f64>) -> Result<Self> {
        Self::from_config(&DistConfig::table(x, pdf))
    }

    fn from_family(family: Family) -> Self {
        let (mean, variance, lower, upper) = match &family {
            Family::Exponential { rate } => (1.0 / rate, 1.0 / (rate * rate), 0.0, f64::INFINITY),
            Family::Uniform { low, high } => {
                ((low + high) / 2.0, (high - low).powi(2) / 12.0, *low, *high)
            }
            Family::ShiftedExponential { shift, rate } => {
                (shift + 1.0 / rate, 1.0 / (rate * rate), *shift, f64::INFINITY)
            }
            Family::Jitter { value, half_width } => {
                (*value, half_width * half_width / 6.0, value - half_width, value + half_width)
            }
            Family::Table(t) => {
                let mean = quad::integrate(|x| x * t.density(x), t.x[0], t.x[t.x.len() - 1], 1e-13);
                let m2 =
                    quad::integrate(|x| x * x * t.density(x), t.x[0], t.x[t.x.len() - 1], 1e-13);
                // Trim zero-density ends so the support bounds are tight.
                let first = t.pdf.iter().position(|&p| p > 0.0).unwrap_or(0);
                let last = t.pdf.iter().rposition(|&p| p > 0.0).unwrap_or(t.x.len() - 1);
                let lower = t.x[first.saturating_sub(1)].max(if first == 0 { t.x[0] } else { t.x[first - 1] });
                let upper = t.x[(last + 1).min(t.x.len() - 1)];
                (mean, (m2 - mean * mean).max(0.0), lower, upper)
            }
        };
        Self { family, mean, variance, lower, upper }
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// Family name as used in configuration files.
    pub fn kind(&self) -> &'static str {
        match self.family {
            Family::Exponential { .. } => "exponential",
            Family::Uniform { .. } => "uniform",
            Family::ShiftedExponential { .. } => "shifted-exponential",
            Family::Jitter { .. } => "deterministic-plus-jitter",
            Family::Table(_) => "table",
        }
    }

    pub fn parameters(&self) -> Vec<f64> {
        match &self.family {
            Family::Exponential { rate } => vec![*rate],
            Family::Uniform { low, high } => vec![*low, *high],
            Family::ShiftedExponential { shift, rate } => vec![*shift, *rate],
            Family::Jitter { value, half_width } => vec![*value, *half_width],
            Family::Table(t) => t.x.iter().chain(t.pdf.iter()).copied().collect(),
        }
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn second_moment(&self) -> f64 {
        self.variance + self.mean * self.mean
    }

    /// Essential infimum of the support.
    pub fn lower(&self) -> f64 {
        self.lower
    }

    /// Essential supremum of the support (may be infinite).
    pub fn upper(&self) -> f64 {
        self.upper
    }

    /// True when the law has no density (a point mass).
    pub fn is_degenerate(&self) -> bool {
        matches!(self.family, Family::Jitter { half_width, .. } if half_width == 0.0)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match &self.family {
            Family::Exponential { rate } => {
                if x < 0.0 { 0.0 } else { rate * (-rate * x).exp() }
            }
            Family::Uniform { low, high } => {
                if x < *low || x > *high { 0.0 } else { 1.0 / (high - low) }
            }
            Family::ShiftedExponential { shift, rate } => {
                if x < *shift { 0.0 } else { rate * (-rate * (x - shift)).exp() }
            }
            Family::Jitter { value, half_width } => {
                let w = *half_width;
                let d = (x - value).abs();
                if w == 0.0 || d > w { 0.0 } else { (w - d) / (w * w) }
            }
            Family::Table(t) => t.density(x),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match &self.family {
            Family::Exponential { rate } => {
                if x <= 0.0 { 0.0 } else { -(-rate * x).exp_m1() }
            }
            Family::Uniform { low, high } => ((x - low) / (high - low)).clamp(0.0, 1.0),
            Family::ShiftedExponential { shift, rate } => {
                if x <= *shift { 0.0 } else { -(-rate * (x - shift)).exp_m1() }
            }
            Family::Jitter { value, half_width } => {
                let (v, w) = (*value, *half_width);
                if w == 0.0 {
                    return if x >= v { 1.0 } else { 0.0 };
                }
                if x <= v - w {
                    0.0
                } else if x <= v {
                    (x - v + w).powi(2) / (2.0 * w * w)
                } else if x < v + w {
                    1.0 - (v + w - x).powi(2) / (2.0 * w * w)
                } else {
                    1.0
                }
            }
            Family::Table(t) => t.cdf(x),
        }
    }

    pub fn survival(&self, x: f64) -> f64 {
        match &self.family {
            Family::Exponential { rate } => {
                if x <= 0.0 { 1.0 } else { (-rate * x).exp() }
            }
            Family::ShiftedExponential { shift, rate } => {
                if x <= *shift { 1.0 } else { (-rate * (x - shift)).exp() }
            }
            _ => 1.0 - self.cdf(x),
        }
    }

    /// Generalized inverse of the CDF.
    pub fn quantile(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        match &self.family {
            Family::Exponential { rate } => -(-p).ln_1p() / rate,
            Family::Uniform { low, high } => low + p * (high - low),
            Family::ShiftedExponential { shift, rate } => shift - (-p).ln_1p() / rate,
            _ => {
                let (mut lo, mut hi) = (self.lower, self.upper);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if self.cdf(mid) < p {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo <= 1e-14 * hi.abs().max(1.0) {
                        break;
                    }
                }
                0.5 * (lo + hi)
            }
        }
    }

    pub fn sample(&self, rng: &mut Stream) -> f64 {
        match &self.family {
            Family::Exponential { rate } => rng.exp1() / rate,
            Family::Uniform { low, high } => low + rng.uniform() * (high - low),
            Family::ShiftedExponential { shift, rate } => shift + rng.exp1() / rate,
            Family::Jitter { value, half_width } => {
                let w = *half_width;
                if w == 0.0 {
                    *value
                } else {
                    value - w + w * (rng.uniform() + rng.uniform())
                }
            }
            Family::Table(t) => t.sample(rng),
        }
    }

    /// Draw conditioned on `X > b`.
    pub fn sample_above(&self, b: f64, rng: &mut Stream) -> f64 {
        if b < self.lower {
            return self.sample(rng);
        }
        match &self.family {
            Family::Exponential { rate } => b + rng.exp1() / rate,
            Family::ShiftedExponential { rate, .. } => b + rng.exp1() / rate,
            Family::Uniform { high, .. } => b + rng.uniform() * (high - b),
            _ => {
                let fb = self.cdf(b);
                let u = fb + (1.0 - fb) * rng.open01();
                self.quantile(u).max(b)
            }
        }
    }

    /// `ln E[e^{sX}]`, or `None` when the expectation is infinite.
    pub fn ln_mgf(&self, s: f64) -> Option<f64> {
        if s == 0.0 {
            return Some(0.0);
        }
        match &self.family {
            Family::Exponential { rate } => (s < *rate).then(|| (rate / (rate - s)).ln()),
            Family::ShiftedExponential { shift, rate } => {
                (s < *rate).then(|| s * shift + (rate / (rate - s)).ln())
            }
            Family::Uniform { low, high } => Some(ln_mgf_uniform(*low, *high, s)),
            Family::Jitter { value, half_width } => {
                let y = 0.5 * s * half_width;
                Some(s * value + 2.0 * ln_sinhc(y))
            }
            Family::Table(t) => {
                // Shift by the endpoint that dominates e^{sx} to avoid overflow.
                let xref = if s > 0.0 { t.x[t.x.len() - 1] } else { t.x[0] };
                let v = quad::integrate(
                    |x| t.density(x) * (s * (x - xref)).exp(),
                    t.x[0],
                    t.x[t.x.len() - 1],
                    QUAD_TOL * 1e-2,
                );
                Some(s * xref + v.ln())
            }
        }
    }

    /// `E[e^{sX}]` (possibly infinite).
    pub fn mgf(&self, s: f64) -> f64 {
        self.ln_mgf(s).map_or(f64::INFINITY, f64::exp)
    }

    /// Supremum of the open interval of `s > 0` where the mgf is finite.
    pub fn mgf_abscissa(&self) -> f64 {
        match &self.family {
            Family::Exponential { rate } | Family::ShiftedExponential { rate, .. } => *rate,
            _ => f64::INFINITY,
        }
    }

    /// Laplace transform `E[e^{-θX}]`, θ ≥ 0.
    pub fn laplace(&self, theta: f64) -> f64 {
        assert!(theta >= 0.0, "laplace transform needs theta >= 0");
        self.mgf(-theta)
    }

    /// `E[e^{-θX}; X ≤ b]`.
    pub fn partial_laplace(&self, theta: f64, b: f64) -> f64 {
        if b < self.lower {
            return 0.0;
        }
        if b >= self.upper {
            return self.laplace(theta);
        }
        match &self.family {
            Family::Exponential { rate } => {
                rate / (rate + theta) * -(-(rate + theta) * b).exp_m1()
            }
            Family::ShiftedExponential { shift, rate } => {
                (-theta * shift).exp() * rate / (rate + theta) * -(-(rate + theta) * (b - shift)).exp_m1()
            }
            Family::Uniform { low, high } => {
                if theta == 0.0 {
                    return (b - low) / (high - low);
                }
                ((-theta * low).exp() - (-theta * b).exp()) / (theta * (high - low))
            }
            Family::Jitter { value, half_width } if *half_width == 0.0 => {
                if *value <= b { (-theta * value).exp() } else { 0.0 }
            }
            _ => quad::integrate(|x| self.pdf(x) * (-theta * x).exp(), self.lower, b, QUAD_TOL * 1e-2),
        }
    }

    /// `∫₀ˣ P(X > y) dy`; equals `E[min(X, x)]`.
    pub fn integrated_tail(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match &self.family {
            Family::Exponential { rate } => -(-rate * x).exp_m1() / rate,
            Family::ShiftedExponential { shift, rate } => {
                if x <= *shift { x } else { shift - (-rate * (x - shift)).exp_m1() / rate }
            }
            Family::Uniform { low, high } => {
                if x <= *low {
                    x
                } else if x < *high {
                    low + ((high - low).powi(2) - (high - x).powi(2)) / (2.0 * (high - low))
                } else {
                    self.mean
                }
            }
            Family::Jitter { value, half_width } => {
                let (v, w) = (*value, *half_width);
                if x <= v - w {
                    x
                } else if x >= v + w {
                    v
                } else if x <= v {
                    let d = x - v + w;
                    (v - w) + d - d.powi(3) / (6.0 * w * w)
                } else {
                    v - w / 6.0 + (w.powi(3) - (v + w - x).powi(3)) / (6.0 * w * w)
                }
            }
            Family::Table(t) => {
                let lo = t.x[0];
                let hi = t.x[t.x.len() - 1];
                if x >= hi {
                    return self.mean;
                }
                let head = x.min(lo);
                head + quad::integrate(|y| 1.0 - t.cdf(y), lo.min(x), x, QUAD_TOL * 1e-2)
            }
        }
    }

    /// CDF of the equilibrium law, `rate · ∫₀ˣ P(X > y) dy`.
    pub fn equilibrium_cdf(&self, x: f64) -> f64 {
        (self.integrated_tail(x) / self.mean).min(1.0)
    }

    /// Draw from the equilibrium law with density `P(X > y) / E X`.
    pub fn sample_equilibrium(&self, rng: &mut Stream) -> f64 {
        if let Family::Exponential { rate } = self.family {
            return rng.exp1() / rate;
        }
        let u = rng.open01();
        self.equilibrium_quantile(u)
    }

    /// Inverse of [`Self::equilibrium_cdf`] by safeguarded Newton iteration.
    pub fn equilibrium_quantile(&self, u: f64) -> f64 {
        let target = u * self.mean;
        let mut lo = 0.0;
        let mut hi = if self.upper.is_finite() { self.upper } else { self.mean.max(1e-12) };
        while self.integrated_tail(hi) < target {
            lo = hi;
            hi *= 2.0;
        }
        let mut x = 0.5 * (lo + hi);
        for _ in 0..200 {
            let g = self.integrated_tail(x) - target;
            if g.abs() <= 1e-10 * self.mean {
                return x;
            }
            if g > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let slope = self.survival(x);
            let newton = x - g / slope;
            x = if slope > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            if hi - lo <= 1e-14 * hi.max(1.0) {
                break;
            }
        }
        x
    }

    /// Prepared sampler for the tilted law with density `∝ e^{sx} f(x)`.
    pub fn tilted(&self, s: f64) -> Result<TiltedLaw> {
        let ln_norm = self.ln_mgf(s).ok_or_else(|| {
            Error::MgfUnavailable(format!("{} law has infinite mgf at {s}", self.kind()))
        })?;
        let table_masses = if let Family::Table(t) = &self.family {
            let mut acc = Vec::with_capacity(t.x.len());
            let mut total = 0.0;
            acc.push(0.0);
            let xref = if s > 0.0 { t.x[t.x.len() - 1] } else { t.x[0] };
            for k in 0..t.x.len() - 1 {
                total += quad::integrate(
                    |x| t.density(x) * (s * (x - xref)).exp(),
                    t.x[k],
                    t.x[k + 1],
                    1e-14,
                );
                acc.push(total);
            }
            acc.iter_mut().for_each(|m| *m /= total);
            acc
        } else {
            Vec::new()
        };
        Ok(TiltedLaw { base: self.clone(), s, ln_norm, table_masses })
    }
}

/// `ln((e^{s·high} − e^{s·low}) / (s·(high − low)))`, stable for large `|s|`.
fn ln_mgf_uniform(low: f64, high: f64, s: f64) -> f64 {
    let w = high - low;
    let y = s * w;
    if y.abs() < 1e-8 {
        return s * (low + high) / 2.0;
    }
    if s > 0.0 {
        s * high + (-(-y).exp_m1() / y).ln()
    } else {
        s * low + (y.exp_m1() / y).ln()
    }
}

/// `ln(sinh(y)/y)`.
fn ln_sinhc(y: f64) -> f64 {
    let a = y.abs();
    if a < 1e-6 {
        a * a / 6.0
    } else if a < 20.0 {
        (a.sinh() / a).ln()
    } else {
        a + (-(-2.0 * a).exp_m1() / (2.0 * a)).ln()
    }
}

/// Draw from `e^{s x}` restricted to `[0, w]`.
fn tilted_uniform01(s: f64, w: f64, u: f64) -> f64 {
    let y = s * w;
    if y.abs() < 1e-12 {
        return u * w;
    }
    let x = if s > 0.0 {
        w + ((1.0 - u) * (-y).exp_m1()).ln_1p() / s
    } else {
        (u * y.exp_m1()).ln_1p() / s
    };
    x.clamp(0.0, w)
}

/// Exponentially tilted version of a [`DistributionSpec`]; density `e^{sx} f(x) / E e^{sX}`.
#[derive(Debug, Clone)]
pub struct TiltedLaw {
    base: DistributionSpec,
    s: f64,
    ln_norm: f64,
    table_masses: Vec<f64>,
}

impl TiltedLaw {
    pub fn base(&self) -> &DistributionSpec {
        &self.base
    }

    pub fn tilt(&self) -> f64 {
        self.s
    }

    /// `ln E[e^{sX}]` of the base law.
    pub fn ln_normalizer(&self) -> f64 {
        self.ln_norm
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.base.pdf(x) * (self.s * x - self.ln_norm).exp()
    }

    pub fn sample(&self, rng: &mut Stream) -> f64 {
        let s = self.s;
        match &self.base.family {
            Family::Exponential { rate } => rng.exp1() / (rate - s),
            Family::ShiftedExponential { shift, rate } => shift + rng.exp1() / (rate - s),
            Family::Uniform { low, high } => low + tilted_uniform01(s, high - low, rng.uniform()),
            Family::Jitter { value, half_width } => {
                let w = *half_width;
                if w == 0.0 {
                    return *value;
                }
                // Sum of two independent uniforms: tilt each factor separately.
                value - w + tilted_uniform01(s, w, rng.uniform()) + tilted_uniform01(s, w, rng.uniform())
            }
            Family::Table(t) => {
                let u = rng.uniform();
                let m = &self.table_masses;
                let k = m.partition_point(|&c| c <= u).saturating_sub(1).min(t.x.len() - 2);
                let xmax = if s > 0.0 { t.x[k + 1] } else { t.x[k] };
                loop {
                    let x = t.sample_in_segment(k, rng.uniform());
                    if rng.uniform() <= (s * (x - xmax)).exp() {
                        return x;
                    }
                }
            }
        }
    }
}
