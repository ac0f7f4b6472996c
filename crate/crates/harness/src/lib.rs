//! Experiment harness: configurable Monte-Carlo sweeps, allocation dumps,
//! bound tables and runtime studies, with CSV output.
#![allow(clippy::neg_cmp_op_on_partial_ord)]


pub mod alloc;
pub mod bench;
pub mod bounds;
pub mod config;
pub mod error;
pub mod output;
pub mod presets;
pub mod summary;
pub mod sweep;

pub use alloc::{allocation_dump, AllocDump, AllocRow};
pub use bench::{linear_fit, medians, runtime_study, BenchMedian, BenchRecord, LinearFit};
pub use bounds::{bound_table, BoundKind, BoundParams, BoundRow};
pub use config::{parse_config, render_config, Algorithm, ExperimentConfig, NGrid, NHatRule};
pub use error::{HarnessError, Result};
pub use summary::{summarize, GroupKey, SummaryRow};
pub use sweep::{run_sweep, run_trial, TrialRecord};
