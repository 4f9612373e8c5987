//! Replicated runs of a sampler, JSON-lines records and summaries.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::{mean_ci, MeanCi};
use crate::dcfp::{sample_stationary_kw, SamplerOptions};
use crate::distributions::{ModelConfig, ModelSpec};
use crate::error::{Error, Result};
use crate::extensions::{harris_sample_c2, HarrisConfig};
use crate::rng::StreamKey;
use crate::sandwich::sample_stationary_sandwich;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    /// Rebuild from the last arrival that found the RA system empty.
    EmptyRa,
    #[default]
    Sandwich,
    /// Two-server regeneration sampler for models that never empty.
    Harris,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::EmptyRa => "empty-ra",
            Algorithm::Sandwich => "sandwich",
            Algorithm::Harris => "harris",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "empty-ra" => Ok(Algorithm::EmptyRa),
            "sandwich" => Ok(Algorithm::Sandwich),
            "harris" => Ok(Algorithm::Harris),
            _ => Err(format!("unknown algorithm {s} (empty-ra, sandwich, harris)")),
        }
    }
}

/// One replication. Fields a sampler does not produce are left out.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SampleRecord {
    pub seed: u64,
    pub replication: u64,
    pub algorithm: String,
    /// Restart depth: last empty RA arrival, or the regeneration depth.
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(rename = "W0")]
    pub w0: Vec<f64>,
    #[serde(rename = "Q0")]
    pub q0: usize,
    #[serde(rename = "L0")]
    pub l0: usize,
    pub residuals: Vec<f64>,
    pub backward_arrivals: usize,
    pub forward_arrivals: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa_final: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coalesced: Option<bool>,
    /// Wall time; only kept when timing is requested, so record files stay reproducible.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl SampleRecord {
    pub fn ok(&self) -> bool {
        self.error.is_none()
    }
}

/// One exact draw as a record (without timing).
pub fn draw(model: &ModelSpec, algorithm: Algorithm, opts: &SamplerOptions, harris: &HarrisConfig, key: &StreamKey) -> Result<SampleRecord> {
    let mut rec = SampleRecord {
        seed: key.seed,
        replication: key.replication,
        algorithm: algorithm.name().into(),
        ..SampleRecord::default()
    };
    let state = match algorithm {
        Algorithm::EmptyRa => {
            let s = sample_stationary_kw(model, opts, key)?;
            rec.n = Some(s.n);
            rec.w0 = s.w;
            rec.backward_arrivals = s.backward_arrivals;
            rec.forward_arrivals = s.forward_arrivals;
            s.state
        }
        Algorithm::Sandwich => {
            let s = sample_stationary_sandwich(model, opts, key, false)?;
            rec.w0 = s.w;
            rec.backward_arrivals = s.backward_arrivals;
            rec.forward_arrivals = s.forward_arrivals;
            rec.kappa_final = Some(s.kappa_final);
            rec.tau = Some(s.tau);
            rec.coalesced = Some(s.coalesced);
            s.state
        }
        Algorithm::Harris => {
            let s = harris_sample_c2(model, harris, opts, key)?;
            rec.n = Some(s.n);
            rec.w0 = s.w;
            rec.backward_arrivals = s.backward_arrivals;
            rec.forward_arrivals = s.forward_arrivals;
            s.state
        }
    };
    rec.q0 = state.q0;
    rec.l0 = state.l0;
    rec.residuals = state.residuals;
    Ok(rec)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    pub algorithm: Algorithm,
    pub samples: usize,
    pub seed: u64,
    /// Worker threads; 0 uses every core.
    pub workers: usize,
    /// JSON-lines record file.
    pub output: Option<PathBuf>,
    pub sampler: SamplerOptions,
    pub harris: HarrisConfig,
    pub timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            model: ModelConfig::mmc(3.0, 2.0, 2),
            algorithm: Algorithm::Sandwich,
            samples: 1000,
            seed: 1,
            workers: 0,
            output: None,
            sampler: SamplerOptions::default(),
            harris: HarrisConfig::default(),
            timing: false,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub samples: usize,
    pub failures: usize,
    pub q0: MeanCi,
    /// Per-coordinate mean of the workload vector.
    pub w: Vec<MeanCi>,
    pub backward_arrivals: MeanCi,
    pub runtime_ms: Option<MeanCi>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub algorithm: String,
    pub lambda: f64,
    pub rho: f64,
    pub servers: usize,
    pub summary: Summary,
    #[serde(skip)]
    pub records: Vec<SampleRecord>,
}

impl Report {
    /// Number found by each successful draw.
    pub fn q0(&self) -> Vec<usize> {
        self.records.iter().filter(|r| r.ok()).map(|r| r.q0).collect()
    }

    pub fn backward_arrivals(&self) -> Vec<f64> {
        self.records.iter().filter(|r| r.ok()).map(|r| r.backward_arrivals as f64).collect()
    }
}

pub fn summarize(records: &[SampleRecord], servers: usize) -> Summary {
    let ok: Vec<&SampleRecord> = records.iter().filter(|r| r.ok()).collect();
    let col = |f: &dyn Fn(&SampleRecord) -> f64| mean_ci(&ok.iter().map(|r| f(r)).collect::<Vec<_>>());
    let runtimes: Vec<f64> = ok.iter().filter_map(|r| r.runtime_ms).collect();
    Summary {
        samples: records.len(),
        failures: records.len() - ok.len(),
        q0: col(&|r| r.q0 as f64),
        w: (0..servers).map(|i| col(&|r| r.w0.get(i).copied().unwrap_or(f64::NAN))).collect(),
        backward_arrivals: col(&|r| r.backward_arrivals as f64),
        runtime_ms: (!runtimes.is_empty()).then(|| mean_ci(&runtimes)),
    }
}

/// Run every replication; records come back in replication order whatever the worker count.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    if cfg.samples == 0 {
        return Err(Error::Config("samples must be at least 1".into()));
    }
    let model = cfg.model.build()?;
    let mut opts = cfg.sampler.clone();
    opts.drift = opts.drift.or(cfg.model.drift);
    let one = |rep: u64| {
        let key = StreamKey::new(cfg.seed, rep);
        let start = Instant::now();
        let mut rec = draw(&model, cfg.algorithm, &opts, &cfg.harris, &key).unwrap_or_else(|e| SampleRecord {
            seed: cfg.seed,
            replication: rep,
            algorithm: cfg.algorithm.name().into(),
            error: Some(e.to_string()),
            ..SampleRecord::default()
        });
        if cfg.timing {
            rec.runtime_ms = Some(start.elapsed().as_secs_f64() * 1e3);
        }
        rec
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let records: Vec<SampleRecord> = pool.install(|| (0..cfg.samples as u64).into_par_iter().map(one).collect());
    if let Some(path) = &cfg.output {
        write_records(path, &records)?;
    }
    Ok(Report {
        algorithm: cfg.algorithm.name().into(),
        lambda: model.lambda,
        rho: model.rho,
        servers: model.servers,
        summary: summarize(&records, model.servers),
        records,
    })
}

fn io(e: impl std::fmt::Display) -> Error {
    Error::Config(format!("output: {e}"))
}

pub fn write_records(path: &Path, records: &[SampleRecord]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    for r in records {
        serde_json::to_writer(&mut out, r).map_err(io)?;
        out.write_all(b"\n").map_err(io)?;
    }
    out.flush().map_err(io)
}

pub fn read_records(path: &Path) -> Result<Vec<SampleRecord>> {
    let text = std::fs::read_to_string(path).map_err(io)?;
    text.lines().filter(|l| !l.trim().is_empty()).map(|l| serde_json::from_str(l).map_err(io)).collect()
}

/// One row of the backward-arrivals table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexityRow {
    pub lambda: f64,
    /// Per-server utilization `λ / (cμ)`.
    pub rho: f64,
    pub algorithm: String,
    pub mean_backward_arrivals: f64,
    pub ci_halfwidth: f64,
    pub n: usize,
}

impl ComplexityRow {
    pub fn from_report(r: &Report) -> Self {
        let b = r.summary.backward_arrivals;
        Self {
            lambda: r.lambda,
            rho: r.rho / r.servers as f64,
            algorithm: r.algorithm.clone(),
            mean_backward_arrivals: b.mean,
            ci_halfwidth: b.half_width,
            n: b.n,
        }
    }
}

/// Histogram row for plotting a number-in-system law.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotRow {
    pub bin: usize,
    pub empirical_freq: f64,
    pub analytic_pmf: f64,
}

pub fn plot_rows(samples: &[usize], pmf: &[f64]) -> Vec<PlotRow> {
    let top = samples.iter().copied().max().unwrap_or(0).max(pmf.len().saturating_sub(1));
    let n = samples.len().max(1) as f64;
    let mut counts = vec![0usize; top + 1];
    samples.iter().for_each(|&q| counts[q] += 1);
    (0..=top)
        .map(|bin| PlotRow {
            bin,
            empirical_freq: counts[bin] as f64 / n,
            analytic_pmf: pmf.get(bin).copied().unwrap_or(0.0),
        })
        .collect()
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    for r in rows {
        w.serialize(r).map_err(io)?;
    }
    w.flush().map_err(io)
}
