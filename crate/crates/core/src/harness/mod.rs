//! Seeded experiment orchestration, aggregation across runs and the CSV/JSON
//! output files.

mod aggregate;
mod config;
mod output;
mod replacement;
mod run;

pub use aggregate::{aggregate, post_transient_stats, summarize, Aggregate, PostTransient, SummaryRow};
pub use config::{AlgorithmSpec, BenchmarkSpec, ExperimentConfig, ReplacementConfig, Timing, TuneGrid};
pub use output::{read_results, write_outputs, Manifest, ResultRow, SCHEMA_VERSION};
pub use replacement::{run_replacement, tune_replacement, ReplacementOutcome, TunedParams};
pub use run::{run_experiment, run_seed, RunRecord};
