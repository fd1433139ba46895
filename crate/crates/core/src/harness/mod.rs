//! Experiment orchestration: closed-loop runs of truth model, estimation
//! model and estimator; permutation and filter-sign sweeps; CSV export.

mod baseline;
mod closed_loop;
mod config;
mod export;
mod sweep;

pub use baseline::run_baseline;
pub use closed_loop::{
    run_closed_loop, run_closed_loop_with, PlantInstance, RunOutcome, RunSummary, TimeSeriesRecord,
};
pub use config::{
    BurgersSettings, ExperimentConfig, Plant, SweepMode, BURGERS_EPS_CONV, BURGERS_HORIZON,
    DEFAULT_Z_MAX, LOW_ORDER_EPS_CONV, LOW_ORDER_HORIZON,
};
pub use export::{
    export_descent_csv, export_records_csv, export_sweep_csv, format_float, read_records_csv,
    record_header, write_descent, write_records, write_sweep, SWEEP_HEADER,
};
pub use sweep::{
    attractor_distance, filter_sign_sweep, permutation_sweep, SweepCase, SweepReport, Verdict,
    FILTER_CASES, SIGN_PATTERNS,
};
