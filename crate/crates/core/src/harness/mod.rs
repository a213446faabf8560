//! Monte-Carlo experiments: configuration, seeding, execution and output.
//!
//! Every `(n, p_c, run)` cell draws one topology from a seed derived from the
//! master seed and runs each requested algorithm on it. Records are sorted
//! before they are written, so output does not depend on scheduling.

mod config;
mod output;
mod run;
mod seed;

pub use config::{Algorithm, ExperimentConfig, OutputFormat, PhysOverrides};
pub use output::{
    fmt_sig9, normalize, read_records_json, records_to_csv, summarize, summary_to_csv,
    write_outputs, GroupSummary, MeanCi, NormalizedMetrics, CSV_HEADER, NORMALIZATION_MW,
};
pub use run::{run_algorithm, run_experiment, ExperimentResult, RunRecord};
pub use seed::{child_seed, splitmix64};
