//! Sharp spectral cutoff `v0^delta = F^-1(1_{|xi| <= 1/delta} F v0)`.

use crate::error::{Error, Result};
use crate::kernels::NORM_SLACK;
use crate::spectral::{sobolev_norm, SobolevIndex, SpectralField};

/// One inequality `lhs <= rhs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bound {
    pub lhs: f64,
    pub rhs: f64,
}

impl Bound {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs + NORM_SLACK * self.rhs.max(f64::MIN_POSITIVE)
    }

    /// `lhs / rhs`, 0 when both vanish.
    pub fn ratio(&self) -> f64 {
        if self.rhs == 0.0 {
            if self.lhs == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            self.lhs / self.rhs
        }
    }
}

/// Observed sides of the three cutoff estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct NormBudget {
    /// `|v^delta|_{H^s} <= |v0|_{H^s}`.
    pub stability: Bound,
    /// `|v^delta|_{H^{s+1}} <= delta^-1 |v0|_{H^s}`.
    pub smoothing: Bound,
    /// Same left side against `(1 + delta^-2)^{1/2} |v0|_{H^s}`, which is the
    /// sharp constant for the inhomogeneous weight `(1+|xi|^2)`.
    pub smoothing_sharp: Bound,
    /// `(l, |v^delta - v0|_{H^l} <= delta^{s-l} |v0|_{H^s})`.
    pub approximation: Vec<(f64, Bound)>,
}

impl NormBudget {
    /// All three estimates in their `delta^-1` / `delta^{s-l}` form.
    pub fn holds(&self) -> bool {
        self.stability.holds() && self.smoothing.holds() && self.approximation.iter().all(|(_, b)| b.holds())
    }

    /// As [`holds`](Self::holds) but with the sharp smoothing constant.
    pub fn holds_sharp(&self) -> bool {
        self.stability.holds() && self.smoothing_sharp.holds() && self.approximation.iter().all(|(_, b)| b.holds())
    }
}

#[derive(Debug, Clone)]
pub struct MollifierResult {
    pub delta: f64,
    pub s: SobolevIndex,
    pub field: SpectralField,
    pub norm_budget: NormBudget,
}

/// Zeroes every mode with `|xi| > 1/delta` and records the norm budget for
/// each `l` in `ls` (which must lie in `[0, s]`).
pub fn frequency_cutoff(v0: &SpectralField, delta: f64, s: SobolevIndex, ls: &[f64]) -> Result<MollifierResult> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
    }
    if let Some(l) = ls.iter().find(|&&l| !(l >= 0.0 && l <= s.value())) {
        return Err(Error::InvalidParameter(format!("l = {l} outside [0, {}]", s.value())));
    }
    let cut2 = 1.0 / (delta * delta);
    let k2 = v0.grid().k2().to_vec();
    let field = v0.map_multiplier(|i| if k2[i] <= cut2 { 1.0 } else { 0.0 });
    let base = sobolev_norm(v0, s);
    let diff = field.sub(v0)?;
    let smooth = sobolev_norm(&field, s.shifted(1.0));
    let norm_budget = NormBudget {
        stability: Bound { lhs: sobolev_norm(&field, s), rhs: base },
        smoothing: Bound { lhs: smooth, rhs: base / delta },
        smoothing_sharp: Bound { lhs: smooth, rhs: (1.0 + cut2).sqrt() * base },
        approximation: ls
            .iter()
            .map(|&l| {
                let b = Bound {
                    lhs: sobolev_norm(&diff, SobolevIndex::new(l).expect("finite")),
                    rhs: delta.powf(s.value() - l) * base,
                };
                (l, b)
            })
            .collect(),
    };
    Ok(MollifierResult { delta, s, field, norm_budget })
}
