//! Multi-seed experiment runner and CSV reporting.
//!
//! A run directory holds `episodes.csv` (one row per training episode),
//! `eval.csv` (periodic greedy evaluations), `checkpoints/seed_<s>.ckpt` (the
//! best greedy policy per seed) and `summary.csv`.

mod config;
mod csv;
mod report;
mod run;
mod traces;

pub use config::{Exploration, RunConfig};
pub use csv::{read_episodes, read_evals, EPISODES_HEADER, EVAL_HEADER};
pub use report::{
    curves_from_logs, emit_curves, ratio_label, summarize, summarize_logs, CurveRow, SummaryRow,
    CURVES_HEADER, SUMMARY_HEADER,
};
pub use run::{run_experiment, run_seed, thread_count, EvalRow, RunOutput, SeedOutput};
pub use traces::{export_traces, trace_rows, write_trace_csv, TraceOptions, TRACE_HEADER};
