//! Trial runner, batch aggregation, CSV output and SVG traces.

mod batch;
mod report;
mod svg;
mod trial;

pub use batch::{run_batch, summarize, BatchResult, BatchSummary};
pub use report::{
    format_table, read_raw, read_raw_file, read_summaries, write_raw, write_summaries, RAW_HEADER, SUMMARY_HEADER,
};
pub use svg::{render_svg, write_svg};
pub use trial::{make_planner, planner_seed, run_trial, run_trial_traced, Trace, TrialConfig, TrialMetrics};
