//! Cutoff mollifier, advection-estimate probes, structure functions and the annulus mollifier.

pub mod band;
pub mod mollifier;
pub mod probes;
pub mod structure;

pub use band::{band_mollify, BandMollifier};
pub use mollifier::{frequency_cutoff, Bound, MollifierResult, NormBudget};
pub use probes::{advection_inequality_probe, probe_sweep, Estimate, ProbeSweep};
pub use structure::{
    fit_scaling_exponent, second_order_structure, shifted, write_fit_csv, write_structure_csv, ScalingFit,
    StructureFunctionSample, SubBox,
};
