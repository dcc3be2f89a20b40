//! Ordinary least-squares line fits, used for every log-log slope in the crate.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root mean square of the residuals `y - (slope x + intercept)`.
    pub residual: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() {
        return Err(Error::Fit(format!("{} abscissae but {} ordinates", xs.len(), ys.len())));
    }
    if xs.len() < 2 {
        return Err(Error::Fit("need at least two points".into()));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::Fit("non-finite sample".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if !(sxx > 1e-24 * (1.0 + mx * mx)) {
        return Err(Error::Fit("degenerate abscissa range".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - slope * x - intercept).powi(2)).sum();
    Ok(LineFit { slope, intercept, residual: (ss / n).sqrt() })
}

/// Fit of `log y = slope log x + intercept`.
pub fn loglog_fit(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.iter().chain(ys).any(|&v| !(v > 0.0)) {
        return Err(Error::Fit("log-log fit needs positive data".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    linear_fit(&lx, &ly)
}
