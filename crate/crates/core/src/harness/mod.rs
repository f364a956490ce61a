//! Seeded trial loops, parameter sweeps, CSV output and the oracle
//! validation suite.

mod csv;
mod sweep;
mod trial;
mod validate;

pub use csv::{fmt_f64, write_bounds_csv, write_history_csv, write_link_csv, write_roc_csv, write_throughput_csv};
pub use sweep::{
    aggregate, alpha_grid, bounds_rows, log_grid, sweep_alpha, sweep_roc, throughput_rows, BoundsGrid, BoundsRow,
    LinkPoint, RocSweep, ThroughputRow,
};
pub use trial::{run_batch, run_trial, trial_history, TrialRecord};
pub use validate::{validate, Check, Faults, ValidationReport};
