//! Error against the kernel driver `|K^alpha * v^alpha - v^alpha|_{H^{s'}}`, per kernel.

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::family::run_family;
use crate::error::Result;
use crate::fit::loglog_fit;
use crate::kernels::{apply_kernel, KernelKind};
use crate::spectral::{sobolev_norm, SobolevIndex};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorollaryRow {
    pub kernel: KernelKind,
    pub alpha: f64,
    pub s_prime: SobolevIndex,
    pub error: f64,
    pub driver: f64,
    /// `error / (driver * t_eval + epsilon)`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorollaryGroup {
    pub kernel: KernelKind,
    pub s_prime: SobolevIndex,
    /// `max ratio / min ratio` across alpha.
    pub spread: f64,
    pub max_ratio: f64,
    /// Log-log slope of the driver in alpha, when every driver is positive.
    pub driver_slope: Option<f64>,
    /// Which checks apply: `None` means recorded only.
    pub spread_ok: Option<bool>,
    pub slope_ok: Option<bool>,
    pub zero_ok: Option<bool>,
}

impl CorollaryGroup {
    pub fn passed(&self) -> bool {
        [self.spread_ok, self.slope_ok, self.zero_ok].iter().all(|c| c.unwrap_or(true))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorollaryReport {
    pub t_eval: f64,
    pub rows: Vec<CorollaryRow>,
    pub groups: Vec<CorollaryGroup>,
    /// Largest ratio over the helmholtz and gaussian families.
    pub ceiling: f64,
    pub failures: Vec<String>,
}

impl CorollaryReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.groups.iter().all(|g| g.passed())
    }
}

/// Helmholtz and gaussian families carry the spread check; helmholtz with
/// `s' <= s - 2` also carries the driver-slope window; identity must give
/// zero error and zero driver. Sharp cutoff is recorded only.
pub fn run_corollary_experiment(cfg: &ExperimentConfig) -> Result<CorollaryReport> {
    let family = run_family(cfg, &cfg.kernel_kinds)?;
    let reference = family.reference.final_state();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for b in &family.branches {
        let traj = match &b.outcome {
            Ok(t) => t,
            Err(msg) => {
                failures.push(format!("{} alpha = {}: {msg}", b.kernel.kind(), b.alpha));
                continue;
            }
        };
        let v = traj.final_state();
        let diff = v.sub(reference)?;
        let drive = apply_kernel(&b.kernel, v).sub(v)?;
        for &sp in &cfg.s_prime_list {
            let error = sobolev_norm(&diff, sp);
            let driver = sobolev_norm(&drive, sp);
            rows.push(CorollaryRow {
                kernel: b.kernel.kind(),
                alpha: b.alpha,
                s_prime: sp,
                error,
                driver,
                ratio: error / (driver * cfg.t_eval + cfg.checks.epsilon),
            });
        }
    }
    let mut groups = Vec::new();
    for &kind in &cfg.kernel_kinds {
        for &sp in &cfg.s_prime_list {
            let sel: Vec<&CorollaryRow> = rows.iter().filter(|r| r.kernel == kind && r.s_prime == sp).collect();
            if sel.is_empty() {
                continue;
            }
            let ratios: Vec<f64> = sel.iter().map(|r| r.ratio).collect();
            let max_ratio = ratios.iter().cloned().fold(0.0, f64::max);
            let min_ratio = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
            let spread = if min_ratio > 0.0 { max_ratio / min_ratio } else { f64::INFINITY };
            let driver_slope = if sel.len() >= 2 && sel.iter().all(|r| r.driver > 0.0) {
                let xs: Vec<f64> = sel.iter().map(|r| r.alpha).collect();
                let ys: Vec<f64> = sel.iter().map(|r| r.driver).collect();
                loglog_fit(&xs, &ys).ok().map(|f| f.slope)
            } else {
                None
            };
            let [lo, hi] = cfg.checks.driver_slope;
            let (spread_ok, slope_ok, zero_ok) = match kind {
                KernelKind::Identity => (None, None, Some(sel.iter().all(|r| r.error == 0.0 && r.driver == 0.0))),
                KernelKind::Helmholtz => {
                    let slope_ok = (sp.value() <= cfg.s.value() - 2.0)
                        .then(|| driver_slope.map_or(false, |m| m >= lo && m <= hi));
                    (Some(spread <= cfg.checks.ratio_spread), slope_ok, None)
                }
                KernelKind::Gaussian => (Some(spread <= cfg.checks.ratio_spread), None, None),
                KernelKind::SharpCutoff => (None, None, None),
            };
            groups.push(CorollaryGroup {
                kernel: kind,
                s_prime: sp,
                spread,
                max_ratio,
                driver_slope,
                spread_ok,
                slope_ok,
                zero_ok,
            });
        }
    }
    let ceiling = rows
        .iter()
        .filter(|r| matches!(r.kernel, KernelKind::Helmholtz | KernelKind::Gaussian))
        .map(|r| r.ratio)
        .fold(0.0, f64::max);
    Ok(CorollaryReport { t_eval: cfg.t_eval, rows, groups, ceiling, failures })
}
