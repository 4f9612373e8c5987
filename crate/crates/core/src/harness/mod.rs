//! Oracles, statistical tests and experiment orchestration.

mod experiment;
pub mod oracles;
pub mod stats;

#[cfg(test)]
mod tests;

pub use experiment::{
    draw, plot_rows, read_records, run_experiment, summarize, write_csv, write_records, Algorithm, ComplexityRow,
    ExperimentConfig, PlotRow, Report, SampleRecord, Summary,
};
pub use oracles::{erlang_pmf, ErlangPmf};
