use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::SolverConfig;
use crate::error::{Error, Result};
use crate::kernels::KernelKind;
use crate::spectral::SobolevIndex;

fn default_kinds() -> Vec<KernelKind> {
    vec![KernelKind::Helmholtz]
}
fn yes() -> bool {
    true
}

/// Pass/fail thresholds. Every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Checks {
    /// Rate check passes when `iota_hat >= iota_predicted - slope_tol`.
    pub slope_tol: f64,
    /// Points whose error is below `floor_factor` times the dt-halving
    /// self-error are excluded from rate fits.
    pub floor_factor: f64,
    /// Largest allowed `max/min` of the corollary ratio across alpha.
    pub ratio_spread: f64,
    /// Accepted window for the kernel-driver slope when `s' <= s - 2`.
    pub driver_slope: [f64; 2],
    /// Largest allowed `max/min` of the H^-1 surrogate constant across alpha.
    pub surrogate_spread: f64,
    /// Optional window for every fitted structure exponent.
    pub gamma_window: Option<[f64; 2]>,
    /// Added to `driver * t_eval` in the corollary ratio.
    pub epsilon: f64,
}

impl Default for Checks {
    fn default() -> Self {
        Self {
            slope_tol: 0.4,
            floor_factor: 10.0,
            ratio_spread: 4.0,
            driver_slope: [1.9, 2.1],
            surrogate_spread: 2.0,
            gamma_window: None,
            epsilon: 1e-14,
        }
    }
}

/// Displacements and sub-box for structure-function campaigns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureSettings {
    /// Geometric sequence of `count` magnitudes from `y_min` to `y_max`.
    pub y_min: f64,
    pub y_max: f64,
    pub count: usize,
    /// Unit direction of the displacements (normalised on use).
    #[serde(default)]
    pub direction: Option<Vec<f64>>,
    /// Sub-box in grid cells `[lo, hi)` per axis; the whole torus when absent.
    #[serde(default)]
    pub lo: Option<Vec<usize>>,
    #[serde(default)]
    pub hi: Option<Vec<usize>>,
    /// Samples with `|y| < eta_factor * alpha` are excluded from that alpha's fit.
    #[serde(default = "one")]
    pub eta_factor: f64,
}

fn one() -> f64 {
    1.0
}

impl StructureSettings {
    pub fn displacements(&self, dim: usize) -> Result<Vec<Vec<f64>>> {
        if self.count < 2 || !(self.y_min > 0.0 && self.y_max > self.y_min) {
            return Err(Error::Config("structure needs count >= 2 and 0 < y_min < y_max".into()));
        }
        let mut dir = self.direction.clone().unwrap_or_else(|| {
            let mut d = vec![0.0; dim];
            d[0] = 1.0;
            d
        });
        if dir.len() != dim {
            return Err(Error::Config(format!("direction needs {dim} components")));
        }
        let norm = dir.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(Error::Config("direction must be nonzero".into()));
        }
        dir.iter_mut().for_each(|c| *c /= norm);
        let ratio = (self.y_max / self.y_min).powf(1.0 / (self.count - 1) as f64);
        Ok((0..self.count)
            .map(|i| {
                let r = if i + 1 == self.count { self.y_max } else { self.y_min * ratio.powi(i as i32) };
                dir.iter().map(|c| c * r).collect()
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Grid, initial condition, time-step policy and record cadence.
    /// `base.kernel` is ignored; `kernel_kinds` and `alpha_list` select kernels.
    pub base: SolverConfig,
    pub alpha_list: Vec<f64>,
    pub s: SobolevIndex,
    pub s_prime_list: Vec<SobolevIndex>,
    pub t_eval: f64,
    #[serde(default = "default_kinds")]
    pub kernel_kinds: Vec<KernelKind>,
    /// `v0^alpha = v0`; otherwise `v0^alpha = v0 + perturbation * alpha^2 * w`.
    #[serde(default = "yes")]
    pub same_ic_for_all: bool,
    #[serde(default = "one")]
    pub perturbation: f64,
    #[serde(default)]
    pub checks: Checks,
    #[serde(default)]
    pub structure: Option<StructureSettings>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        let d = self.base.grid.dim as f64;
        if !(self.s.value() > d / 2.0 + 1.0) {
            return Err(Error::Config(format!("s = {} must exceed d/2 + 1 = {}", self.s.value(), d / 2.0 + 1.0)));
        }
        if !(self.t_eval > 0.0 && self.t_eval <= self.base.t_end) {
            return Err(Error::Config(format!("t_eval = {} must lie in (0, t_end]", self.t_eval)));
        }
        if self.alpha_list.is_empty() || self.alpha_list.iter().any(|&a| !(a.is_finite() && a > 0.0)) {
            return Err(Error::Config("alpha_list must hold positive values".into()));
        }
        if self.alpha_list.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::Config("alpha_list must be strictly decreasing".into()));
        }
        if self.s_prime_list.iter().any(|sp| !(sp.value() >= 0.0 && sp.value() <= self.s.value())) {
            return Err(Error::Config("every s' must lie in [0, s]".into()));
        }
        if self.kernel_kinds.is_empty() {
            return Err(Error::Config("kernel_kinds must not be empty".into()));
        }
        if !(self.perturbation.is_finite()) {
            return Err(Error::Config("perturbation must be finite".into()));
        }
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
pub(crate) mod tests {
    use super::*;

    pub const EXAMPLE: &str = r#"
alpha_list = [0.2, 0.1, 0.05]
s = 4.0
s_prime_list = [0.0, 3.0]
t_eval = 0.1

[checks]
slope_tol = 0.4

[base]
t_end = 0.1
dt_policy = { cfl = 0.5 }

[base.grid]
dim = 2
n = 32

[base.kernel]
kind = "identity"

[base.ic]
kind = "random_band_limited"
band = 3
target_norm = 1.0
seed = 1
"#;

    #[test]
    fn parses_with_defaults() {
        let cfg = ExperimentConfig::from_toml_str(EXAMPLE).unwrap();
        assert_eq!(cfg.kernel_kinds, vec![KernelKind::Helmholtz]);
        assert!(cfg.same_ic_for_all);
        assert_eq!(cfg.checks.floor_factor, 10.0);
        assert!(cfg.structure.is_none());
    }

    #[test]
    fn enforces_hypotheses() {
        let bad = EXAMPLE.replace("s = 4.0", "s = 2.0");
        assert!(ExperimentConfig::from_toml_str(&bad).is_err());
        let bad = EXAMPLE.replace("[0.2, 0.1, 0.05]", "[0.1, 0.2]");
        assert!(ExperimentConfig::from_toml_str(&bad).is_err());
        let bad = EXAMPLE.replace("t_eval = 0.1", "t_eval = 0.5");
        assert!(ExperimentConfig::from_toml_str(&bad).is_err());
    }

    #[test]
    fn displacement_sequence() {
        let st = StructureSettings {
            y_min: 0.1,
            y_max: 0.8,
            count: 4,
            direction: Some(vec![3.0, 4.0]),
            lo: None,
            hi: None,
            eta_factor: 1.0,
        };
        let ys = st.displacements(2).unwrap();
        assert_eq!(ys.len(), 4);
        assert!((ys[0][0] - 0.06).abs() < 1e-15 && (ys[0][1] - 0.08).abs() < 1e-15);
        assert_eq!(ys[3], vec![0.8 * 0.6, 0.8 * 0.8]);
        assert!((ys[1][0] / ys[0][0] - 2.0).abs() < 1e-12);
    }
}
