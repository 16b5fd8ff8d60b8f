//! Experiment configuration, seeded runs, sweeps, aggregation and CSV
//! output.

mod aggregate;
mod config;
pub mod csv_io;
mod run;

pub use aggregate::{aggregate, mean_std, moving_average, Aggregate, LearningCurve, SummaryRow};
pub use config::{AgentKind, ExperimentConfig};
pub use run::{config_id, run_experiment, run_id, sweep, MetricsRow, RunResult, RunSummary, SweepParam};
