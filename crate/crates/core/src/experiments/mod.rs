//! Alpha sweeps against an Euler reference, rate fits and report emission.

pub mod config;
pub mod corollary;
pub mod family;
pub mod rate;
pub mod report;
pub mod structure;

pub use config::{Checks, ExperimentConfig, StructureSettings};
pub use corollary::{run_corollary_experiment, CorollaryGroup, CorollaryReport, CorollaryRow};
pub use family::{field_hash, run_family, Branch, Family};
pub use rate::{iota_predicted, run_rate_experiment, FitStatus, RateFitResult, RateReport};
pub use report::{emit_report, ExperimentResults, LogLogPlot};
pub use structure::{run_structure_experiment, surrogate_norm, StructureReport};
