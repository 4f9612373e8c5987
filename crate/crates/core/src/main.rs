use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use exactq::dcfp::SamplerOptions;
use exactq::distributions::ModelConfig;
use exactq::harness::oracles::forward_fifo;
use exactq::harness::stats::chi_square_pmf;
use exactq::harness::{
    erlang_pmf, plot_rows, run_experiment, write_csv, Algorithm, ComplexityRow, ExperimentConfig, Report,
};
use exactq::rng::{Role, StreamKey};

#[derive(Parser)]
#[command(name = "exactq", about = "Exact stationary samples of multi-server FIFO queues")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Oracle {
    Erlang,
    BruteForce,
}

#[derive(clap::Args, Clone)]
struct Common {
    #[arg(long, default_value = "sandwich", value_parser = parse_algorithm)]
    algorithm: Algorithm,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[arg(long)]
    kappa0: Option<usize>,
    /// Elementary-step budget per walk ledger.
    #[arg(long)]
    budget: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Draw exact samples and write JSON-lines records.
    Sample {
        /// Model file (TOML or JSON).
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
        /// Keep per-sample wall times in the records.
        #[arg(long)]
        timing: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Compare the number found by an arrival against a reference law.
    Validate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_enum, default_value = "erlang")]
        oracle: Oracle,
        #[arg(long, default_value_t = 0.01)]
        alpha: f64,
        #[arg(long, default_value_t = 5000)]
        n: usize,
        /// Arrivals in the brute-force run.
        #[arg(long, default_value_t = 10_000_000)]
        arrivals: usize,
        /// Plot-data CSV (bin, empirical_freq, analytic_pmf).
        #[arg(long)]
        plot: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Backward-arrival counts for the complexity table or the sampler comparison.
    Bench {
        #[arg(long, conflicts_with = "fig3", required_unless_present = "fig3")]
        table1: bool,
        #[arg(long)]
        fig3: bool,
        #[arg(long)]
        n: Option<usize>,
        /// Summary CSV; printed to stdout otherwise.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
}

fn parse_algorithm(s: &str) -> std::result::Result<Algorithm, String> {
    s.parse()
}

fn load_model(path: &Path) -> Result<ModelConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let cfg = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text)?
    } else {
        toml::from_str(&text)?
    };
    Ok(cfg)
}

fn config(model: ModelConfig, n: usize, c: &Common) -> ExperimentConfig {
    let mut sampler = SamplerOptions::default();
    if let Some(k) = c.kappa0 {
        sampler.kappa0 = k;
    }
    if let Some(b) = c.budget {
        sampler.budget = b;
    }
    ExperimentConfig {
        model,
        algorithm: c.algorithm,
        samples: n,
        seed: c.seed,
        workers: c.workers,
        sampler,
        ..ExperimentConfig::default()
    }
}

fn print_summary(r: &Report) {
    let s = &r.summary;
    println!(
        "{} lambda={:.4} rho={:.4} c={}: n={} failures={} Q0={:.4}±{:.4} backward_arrivals={:.2}±{:.2}",
        r.algorithm,
        r.lambda,
        r.rho,
        r.servers,
        s.samples,
        s.failures,
        s.q0.mean,
        s.q0.half_width,
        s.backward_arrivals.mean,
        s.backward_arrivals.half_width
    );
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Sample { model, n, out, timing, common } => {
            let mut cfg = config(load_model(&model)?, n, &common);
            cfg.output = Some(out);
            cfg.timing = timing;
            print_summary(&run_experiment(&cfg)?);
        }
        Command::Validate { model, oracle, alpha, n, arrivals, plot, common } => {
            let mcfg = load_model(&model)?;
            let spec = mcfg.build()?;
            let report = run_experiment(&config(mcfg, n, &common))?;
            print_summary(&report);
            let q = report.q0();
            let pmf = match oracle {
                Oracle::Erlang => {
                    if spec.arrival.kind() != "exponential" || spec.service.kind() != "exponential" {
                        bail!("the Erlang oracle needs exponential interarrival and service times");
                    }
                    erlang_pmf(spec.lambda, spec.mu, spec.servers, 200)?.pmf
                }
                Oracle::BruteForce => {
                    let mut rng = StreamKey::new(common.seed, u64::MAX).stream(Role::Auxiliary, 0);
                    let f = forward_fifo(&spec, arrivals, arrivals / 100, &mut rng);
                    f.pmf(f.found.len())
                }
            };
            let t = chi_square_pmf(&q, &pmf)?;
            if let Some(p) = plot {
                write_csv(&p, &plot_rows(&q, &pmf))?;
            }
            let verdict = if t.passes(alpha) { "PASS" } else { "FAIL" };
            println!("chi-square statistic={:.3} df={} p={:.4} alpha={alpha}: {verdict}", t.statistic, t.df, t.p_value);
            if !t.passes(alpha) {
                std::process::exit(1);
            }
        }
        Command::Bench { table1, fig3: _, n, out, seed, workers } => {
            let runs: Vec<(ModelConfig, Algorithm)> = if table1 {
                [5.0, 6.0, 7.0, 8.0].iter().map(|&l| (ModelConfig::mmc(l, 5.0, 2), Algorithm::Sandwich)).collect()
            } else {
                [Algorithm::Sandwich, Algorithm::EmptyRa].iter().map(|&a| (ModelConfig::mmc(10.0, 2.0, 10), a)).collect()
            };
            let n = n.unwrap_or(if table1 { 2000 } else { 500 });
            let mut rows = Vec::new();
            for (model, algorithm) in runs {
                let cfg = ExperimentConfig { model, algorithm, samples: n, seed, workers, ..ExperimentConfig::default() };
                let r = run_experiment(&cfg)?;
                print_summary(&r);
                rows.push(ComplexityRow::from_report(&r));
            }
            match out {
                Some(p) => write_csv(&p, &rows)?,
                None => {
                    let mut w = csv::Writer::from_writer(std::io::stdout());
                    for r in &rows {
                        w.serialize(r)?;
                    }
                    w.flush()?;
                }
            }
        }
    }
    Ok(())
}
