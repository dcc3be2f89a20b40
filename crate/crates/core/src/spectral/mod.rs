//! Torus geometry, Fourier-space fields and multiplier operators.

pub mod checkpoint;
pub mod field;
pub mod grid;
pub mod ops;

pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint};
pub use field::{sobolev, PhysicalField, SobolevIndex, SpectralField};
pub use grid::Grid;
pub use ops::{derivative, divergence, gradient, laplacian, leray_project, sobolev_inner, sobolev_norm};
pub use rustfft::num_complex::Complex64;
