use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::initial::InitialCondition;
use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::spectral::{Grid, SobolevIndex};

/// Serializable grid description; `Grid::new` builds the lattice tables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dim: usize,
    pub n: usize,
    #[serde(default = "two_pi")]
    pub length: f64,
}

fn two_pi() -> f64 {
    2.0 * std::f64::consts::PI
}

impl GridSpec {
    pub fn build(&self) -> Result<Arc<Grid>> {
        Ok(Arc::new(Grid::new(self.dim, self.n, self.length)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DtPolicy {
    /// Constant step (shortened uniformly so that `t_end` is hit exactly).
    Fixed(f64),
    /// `dt = safety * dx / max|u|`.
    Cfl(f64),
}

impl DtPolicy {
    pub fn validate(&self) -> Result<()> {
        match *self {
            DtPolicy::Fixed(dt) if !(dt.is_finite() && dt > 0.0) => {
                Err(Error::Config(format!("fixed dt must be positive, got {dt}")))
            }
            DtPolicy::Cfl(c) if !(c > 0.0 && c <= 1.0) => {
                Err(Error::Config(format!("CFL safety factor must lie in (0, 1], got {c}")))
            }
            _ => Ok(()),
        }
    }
}

fn one() -> usize {
    1
}
fn default_norms() -> Vec<SobolevIndex> {
    vec![SobolevIndex::new(1.0).unwrap(), SobolevIndex::new(2.0).unwrap()]
}
fn default_blowup_factor() -> f64 {
    50.0
}
fn default_blowup_index() -> SobolevIndex {
    SobolevIndex::new(3.0).unwrap()
}

/// Everything needed to run one trajectory. An identity kernel gives Euler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub grid: GridSpec,
    pub kernel: KernelSpec,
    pub dt_policy: DtPolicy,
    pub t_end: f64,
    pub ic: InitialCondition,
    #[serde(default = "one")]
    pub record_every: usize,
    /// Sobolev indices reported in the diagnostics stream.
    #[serde(default = "default_norms")]
    pub hs_norms: Vec<SobolevIndex>,
    /// Abort once `|v(t)|_{H^s} > blowup_factor * |v(0)|_{H^s}`.
    #[serde(default = "default_blowup_factor")]
    pub blowup_factor: f64,
    #[serde(default = "default_blowup_index")]
    pub blowup_index: SobolevIndex,
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(Error::Config(format!("t_end must be nonnegative, got {}", self.t_end)));
        }
        if self.record_every == 0 {
            return Err(Error::Config("record_every must be at least 1".into()));
        }
        if !(self.blowup_factor > 1.0) {
            return Err(Error::Config("blowup_factor must exceed 1".into()));
        }
        self.dt_policy.validate()?;
        self.ic.validate()?;
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::initial::IcKind;
    use crate::kernels::KernelKind;

    const EXAMPLE: &str = r#"
t_end = 1.0
record_every = 5
dt_policy = { cfl = 0.5 }

[grid]
dim = 2
n = 64

[kernel]
kind = "helmholtz"
alpha = 0.1

[ic]
kind = "random_band_limited"
band = 4
target_norm = 1.0
s_norm = 0.0
seed = 3
"#;

    #[test]
    fn parses_example() {
        let cfg = SolverConfig::from_toml_str(EXAMPLE).unwrap();
        assert_eq!(cfg.grid.n, 64);
        assert!((cfg.grid.length - two_pi()).abs() < 1e-15);
        assert_eq!(cfg.kernel.kind(), KernelKind::Helmholtz);
        assert_eq!(cfg.dt_policy, DtPolicy::Cfl(0.5));
        assert_eq!(cfg.ic.kind, IcKind::RandomBandLimited);
        assert_eq!(cfg.hs_norms.len(), 2);
        assert_eq!(cfg.blowup_factor, 50.0);
    }

    #[test]
    fn rejects_bad_values() {
        let bad = EXAMPLE.replace("{ cfl = 0.5 }", "{ cfl = 1.5 }");
        assert!(SolverConfig::from_toml_str(&bad).is_err());
        let bad = EXAMPLE.replace("{ cfl = 0.5 }", "{ fixed = 0.0 }");
        assert!(SolverConfig::from_toml_str(&bad).is_err());
        let bad = EXAMPLE.replace("t_end = 1.0", "t_end = -1.0");
        assert!(SolverConfig::from_toml_str(&bad).is_err());
    }
}
