//! Both sides of the classical advection estimates, evaluated on the grid.
//!
//! * `Est1`: `|(u.∇)v|_{H^s}` against `|u|_{H^s}|v|_{H^s} + |u|_{L∞}|v|_{H^{s+1}}`, `s > d/2+1`
//! * `Est0`: `|<(u.∇)v, v>_{H^s}|` against `|∇u|_{H^s}|v|_{H^s}^2`, `s > d/2`
//! * `Est2`: `|<(u.∇)v, v>_{H^s}|` against `|u|_{H^s}|v|_{H^s}^2`, `s > d/2+1`
//! * `Est4`: `|<(u.∇)v, v>_{H^s}|` against `(|u|_{H^l}|v|_{H^s} + |v|_{H^l}|u|_{H^s})|v|_{H^s}`,
//!   `s >= 0`, `l > d/2+1`
//!
//! The constants are existential; only observed ratios are reported.

use serde::{Deserialize, Serialize};

use crate::dynamics::advect;
use crate::error::{Error, Result};
use crate::spectral::field::DIVFREE_TOL;
use crate::spectral::{gradient, sobolev_inner, sobolev_norm, SobolevIndex, SpectralField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimate {
    Est1,
    Est0,
    Est2,
    Est4,
}

impl Estimate {
    fn check_range(self, d: f64, s: f64, l: f64) -> Result<()> {
        let ok = match self {
            Estimate::Est1 | Estimate::Est2 => s > d / 2.0 + 1.0,
            Estimate::Est0 => s > d / 2.0,
            Estimate::Est4 => s >= 0.0 && l > d / 2.0 + 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("{self:?} not valid for d = {d}, s = {s}, l = {l}")))
        }
    }
}

/// Returns `(lhs, rhs_without_constant)`. `l` is only read by `Est4`.
pub fn advection_inequality_probe(
    which: Estimate,
    u: &SpectralField,
    v: &SpectralField,
    s: SobolevIndex,
    l: SobolevIndex,
) -> Result<(f64, f64)> {
    let d = v.grid().dim();
    which.check_range(d as f64, s.value(), l.value())?;
    for f in [u, v] {
        let r = f.max_divergence_ratio();
        if r > DIVFREE_TOL {
            return Err(Error::NotDivergenceFree(r));
        }
    }
    let adv = advect(u, v, true)?;
    let us = sobolev_norm(u, s);
    let vs = sobolev_norm(v, s);
    Ok(match which {
        Estimate::Est1 => {
            let lhs = sobolev_norm(&adv, s);
            let linf = u.to_physical().max_magnitude();
            (lhs, us * vs + linf * sobolev_norm(v, s.shifted(1.0)))
        }
        Estimate::Est0 => {
            let lhs = sobolev_inner(&adv, v, s)?.abs();
            (lhs, sobolev_norm(&gradient(u), s) * vs * vs)
        }
        Estimate::Est2 => (sobolev_inner(&adv, v, s)?.abs(), us * vs * vs),
        Estimate::Est4 => {
            let lhs = sobolev_inner(&adv, v, s)?.abs();
            (lhs, (sobolev_norm(u, l) * vs + sobolev_norm(v, l) * us) * vs)
        }
    })
}

/// Empirical constant over a probe corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSweep {
    pub which: Estimate,
    /// `lhs / rhs` per pair, skipping pairs with `rhs = 0`.
    pub ratios: Vec<f64>,
    /// `max lhs / rhs`.
    pub c_hat: f64,
    /// Median of the top decile of ratios.
    pub top_decile_median: f64,
}

impl ProbeSweep {
    /// The maximum is within `factor` of the top-decile median.
    pub fn stable(&self, factor: f64) -> bool {
        self.c_hat.is_finite() && self.c_hat <= factor * self.top_decile_median
    }
}

pub fn probe_sweep(
    which: Estimate,
    pairs: &[(SpectralField, SpectralField)],
    s: SobolevIndex,
    l: SobolevIndex,
) -> Result<ProbeSweep> {
    let mut ratios = Vec::with_capacity(pairs.len());
    for (u, v) in pairs {
        let (lhs, rhs) = advection_inequality_probe(which, u, v, s, l)?;
        if rhs > 0.0 {
            ratios.push(lhs / rhs);
        }
    }
    if ratios.is_empty() {
        return Err(Error::Empty("probe corpus"));
    }
    let mut sorted = ratios.clone();
    sorted.sort_by(f64::total_cmp);
    let top = &sorted[sorted.len() - (sorted.len() / 10).max(1)..];
    let top_decile_median = top[top.len() / 2];
    Ok(ProbeSweep { which, c_hat: *sorted.last().unwrap(), top_decile_median, ratios })
}
