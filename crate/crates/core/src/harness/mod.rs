//! Configuration-driven experiments: replications, aggregation, CSV and
//! plot output, and the command-line front end.

pub mod aggregate;
pub mod cli;
pub mod config;
pub mod experiment;
pub mod output;
pub mod plot;
pub mod runner;
pub mod schedule;

pub use aggregate::{aggregate, aggregate_with, AlgorithmSummary, Aggregator, SummaryRow, VarianceMeasure, Welford};
pub use cli::cli_main;
pub use config::ExperimentConfig;
pub use experiment::{run_experiment, write_outputs, OutputFiles};
pub use output::{emit_csv, load_csv, SummaryRecord, SUMMARY_COLUMNS};
pub use plot::{emit_plot, Panel, RegretMode, SeriesSelection};
pub use runner::{run_replication, simulate, AnyStrategy, CheckpointRow, CheckpointView, RunTrace};
pub use schedule::CheckpointSchedule;
