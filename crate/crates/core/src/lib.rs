//! Laboratory for multi-point-to-multi-point (M2M) stop-wait transport.
//!
//! Each peer runs `M` stop-wait threads that fetch data packets from randomly
//! chosen peers across bottleneck access links. The crate provides:
//!
//! - [`stats`]: seeded random streams, exponential sampling and the Erlang CDF.
//! - [`analytic`]: the M/M/1 queueing model of the access links, with and
//!   without request timers, solved for the expected round-trip time.
//! - [`sim`]: a deterministic discrete-event simulator of the protocol.
//! - [`harness`]: window sweeps, optimal-window search, CSV and comparison
//!   reports.
//!
//! The math in [`stats`] and [`analytic`] is generic over the [`Scalar`]
//! type; `f64` aliases are exported at the crate root.

pub mod analytic;
pub mod error;
pub mod harness;
pub mod scalar;
pub mod sim;
pub mod stats;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use analytic::{
    normalized_throughput, solve, solve_no_timeout, solve_with_timeout, theory_curve, LinkMode,
    SolveStatus, Timeout,
};
pub use harness::{
    compare_report, emit_csv, find_optimal_m, parse_csv, run_sweep, Metric, RowStatus, RunMode,
    SweepRow, SweepSpec,
};
pub use sim::{run_simulation, ScenarioConfig, SimReport};
pub use stats::{derive_stream, erlang_cdf, sample_exponential, RngStream};

/// Model inputs in double precision.
pub type ModelInputs = analytic::ModelInputs<f64>;
/// Solver output in double precision.
pub type AnalyticSolution = analytic::AnalyticSolution<f64>;
/// Grid-scan settings in double precision.
pub type SolverSettings = analytic::SolverSettings<f64>;
/// Erlang parameters in double precision.
pub type ErlangParams = stats::ErlangParams<f64>;

/// Single-precision variants, mostly useful for cross-checking the solver.
pub type ModelInputsF32 = analytic::ModelInputs<f32>;
pub type AnalyticSolutionF32 = analytic::AnalyticSolution<f32>;
pub type SolverSettingsF32 = analytic::SolverSettings<f32>;
