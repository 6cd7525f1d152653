//! Experiment replication: configuration files, fan-out over protocols and
//! seeds, per-run CSV series, and summary statistics.

mod config;
mod plan;
mod stats;

pub use config::{parse_config, ExperimentPlan};
pub use plan::{read_rounds_csv, run_plan, run_plan_with_jobs, run_csv_path, write_rounds_csv, SUMMARY_FILE};
pub use stats::{
    compare, read_summary, welch, Comparison, Metric, MetricStats, SummaryRow, SummaryTable, Verdict, SIGNIFICANCE,
};
