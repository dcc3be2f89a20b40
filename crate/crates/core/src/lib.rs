pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod fit;
pub mod kernels;
pub mod littlewood_paley;
pub mod spectral;

pub use error::{Error, Result};
