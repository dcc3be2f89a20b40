//! Convergence rate of `|v^alpha(t) - v(t)|_{H^{s'}}` as `alpha -> 0`.

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::family::{halving_floor, run_family};
use crate::error::Result;
use crate::fit::loglog_fit;
use crate::kernels::KernelKind;
use crate::spectral::{sobolev_norm, SobolevIndex};

/// `iota = s - s'` for `s - 2 <= s' <= s - 1` and `iota = 2` for `s' <= s - 2`.
pub fn iota_predicted(s: f64, s_prime: f64) -> f64 {
    (s - s_prime).min(2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitStatus {
    Fitted,
    /// Every error is exactly zero (the branches coincide with the reference).
    AllZero,
    /// Fewer than two points above the discretisation floor.
    TooFewPoints,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFitResult {
    pub kernel: KernelKind,
    pub s: SobolevIndex,
    pub s_prime: SobolevIndex,
    pub alphas: Vec<f64>,
    /// NaN where the branch failed.
    pub errors: Vec<f64>,
    /// Whether each point entered the fit.
    pub included: Vec<bool>,
    pub floor: f64,
    pub status: FitStatus,
    pub iota_hat: Option<f64>,
    pub intercept: Option<f64>,
    pub iota_predicted: f64,
    pub residual: Option<f64>,
    /// Errors strictly decrease along decreasing alpha over the fitted points.
    pub monotone: bool,
    pub failures: Vec<String>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub dt: f64,
    pub reference_hash: String,
    pub reference_intact: bool,
    pub results: Vec<RateFitResult>,
}

impl RateReport {
    pub fn passed(&self) -> bool {
        self.reference_intact && self.results.iter().all(|r| r.passed)
    }
}

pub fn run_rate_experiment(cfg: &ExperimentConfig) -> Result<RateReport> {
    let family = run_family(cfg, &cfg.kernel_kinds)?;
    let floors = halving_floor(cfg, &family)?;
    let reference = family.reference.final_state();
    let mut results = Vec::new();
    for &kind in &cfg.kernel_kinds {
        let branches: Vec<_> = family.branches.iter().filter(|b| b.kernel.kind() == kind).collect();
        for (si, &sp) in cfg.s_prime_list.iter().enumerate() {
            let floor = floors[si];
            let mut errors = Vec::new();
            let mut failures = Vec::new();
            for b in &branches {
                match &b.outcome {
                    Ok(traj) => errors.push(sobolev_norm(&traj.final_state().sub(reference)?, sp)),
                    Err(msg) => {
                        errors.push(f64::NAN);
                        failures.push(format!("alpha = {}: {msg}", b.alpha));
                    }
                }
            }
            let alphas: Vec<f64> = branches.iter().map(|b| b.alpha).collect();
            let included: Vec<bool> =
                errors.iter().map(|&e| e.is_finite() && e > cfg.checks.floor_factor * floor && e > 0.0).collect();
            let pred = iota_predicted(cfg.s.value(), sp.value());
            let xs: Vec<f64> = alphas.iter().zip(&included).filter(|(_, &i)| i).map(|(a, _)| *a).collect();
            let ys: Vec<f64> = errors.iter().zip(&included).filter(|(_, &i)| i).map(|(e, _)| *e).collect();
            let monotone = ys.windows(2).all(|w| w[1] < w[0]);
            let all_zero = errors.iter().all(|&e| e == 0.0);
            let (status, fit) = if all_zero {
                (FitStatus::AllZero, None)
            } else if xs.len() < 2 {
                (FitStatus::TooFewPoints, None)
            } else {
                (FitStatus::Fitted, Some(loglog_fit(&xs, &ys)?))
            };
            let passed = failures.is_empty()
                && match status {
                    FitStatus::AllZero => kind == KernelKind::Identity,
                    FitStatus::TooFewPoints => false,
                    FitStatus::Fitted => monotone && fit.unwrap().slope >= pred - cfg.checks.slope_tol,
                };
            results.push(RateFitResult {
                kernel: kind,
                s: cfg.s,
                s_prime: sp,
                alphas,
                errors,
                included,
                floor,
                status,
                iota_hat: fit.map(|f| f.slope),
                intercept: fit.map(|f| f.intercept),
                iota_predicted: pred,
                residual: fit.map(|f| f.residual),
                monotone,
                failures,
                passed,
            });
        }
    }
    Ok(RateReport {
        dt: family.dt,
        reference_hash: format!("{:016x}", family.reference_hash),
        reference_intact: family.reference_intact(),
        results,
    })
}
