//! Window sweeps, optimal-window search and report emission.

mod config;
mod csv;
mod report;
mod sweep;

pub use config::{int_list, load_config, parse_config, parse_config_onto, timeout};
pub use csv::{emit_csv, fmt_sig6, parse_csv, read_csv, to_csv_string, CSV_HEADER};
pub use report::{compare_report, compare_report_with, CompareReport, CompareTolerances, SliceComparison};
pub use sweep::{
    find_optimal_m, run_sweep, sim_row, slice_means, theory_row, Metric, RowStatus, RunMode,
    SweepRow, SweepSpec,
};
