//! Euler and inviscid Leray-alpha dynamics: right-hand sides, RK4, diagnostics.

pub mod config;
pub mod initial;
pub mod integrate;
pub mod rhs;

pub use config::{DtPolicy, GridSpec, SolverConfig};
pub use initial::{taylor_green, IcKind, InitialCondition};
pub use integrate::{
    cfl_limit, checked_step, diagnostics, max_advecting_speed, run, simulate, step, write_diagnostics_csv,
    DiagnosticsRecord, RunSettings, Snapshot, Trajectory,
};
pub use rhs::{advect, pressure, rhs_euler, rhs_leray_alpha};
