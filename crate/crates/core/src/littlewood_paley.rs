//! Nonhomogeneous Littlewood–Paley blocks and Besov norms `B^sigma_{2,r}`.
//!
//! `chi` is a smooth radial cutoff equal to 1 on `|xi| <= 1/2` and 0 on
//! `|xi| >= 1`; the low block is `chi(xi)` and block `j >= 0` is
//! `phi(2^-j xi)` with `phi(xi) = chi(xi/2) - chi(xi)`, supported in
//! `2^{j-1} < |xi| < 2^{j+1}`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{sobolev_norm, SobolevIndex, SpectralField};

fn smooth_step_half(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// `chi(rho)`: 1 for `rho <= 1/2`, 0 for `rho >= 1`, C-infinity in between.
pub fn chi(rho: f64) -> f64 {
    if rho <= 0.5 {
        return 1.0;
    }
    if rho >= 1.0 {
        return 0.0;
    }
    let t = 2.0 * (1.0 - rho);
    let a = smooth_step_half(t);
    a / (a + smooth_step_half(1.0 - t))
}

/// Window of block `j` (`j = -1` is the low block) at `|xi| = rho`.
pub fn window(j: i32, rho: f64) -> f64 {
    if j < 0 {
        chi(rho)
    } else {
        let scale = (2.0f64).powi(j);
        chi(rho / (2.0 * scale)) - chi(rho / scale)
    }
}

#[derive(Debug, Clone)]
pub struct DyadicDecomposition {
    /// Block indices, starting at -1.
    pub indices: Vec<i32>,
    pub blocks: Vec<SpectralField>,
    /// `partition[b][mode]` is the window value of block `b` at each mode.
    pub partition: Vec<Vec<f64>>,
}

impl DyadicDecomposition {
    pub fn block_norms(&self) -> Vec<f64> {
        self.blocks.iter().map(|b| sobolev_norm(b, SobolevIndex::new(0.0).unwrap())).collect()
    }

    /// `max_mode |sum_j window_j - 1|`.
    pub fn partition_residual(&self) -> f64 {
        let m = self.partition.first().map(|p| p.len()).unwrap_or(0);
        (0..m)
            .map(|i| (self.partition.iter().map(|p| p[i]).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn sum(&self) -> SpectralField {
        let mut it = self.blocks.iter();
        let first = it.next().expect("at least the low block").clone();
        it.fold(first, |acc, b| acc.add_scaled(b, 1.0).expect("same shape"))
    }
}

/// Blocks up to the smallest `J` with `max |xi| <= 2^J`, so the windows sum
/// to one at every lattice mode.
pub fn decompose(f: &SpectralField) -> DyadicDecomposition {
    let grid = f.grid();
    let rho: Vec<f64> = grid.k2().iter().map(|k| k.sqrt()).collect();
    let kmax = rho.iter().cloned().fold(0.0, f64::max);
    let mut top = 0;
    while (2.0f64).powi(top) < kmax {
        top += 1;
    }
    let indices: Vec<i32> = (-1..=top).collect();
    let partition: Vec<Vec<f64>> = indices.iter().map(|&j| rho.iter().map(|&r| window(j, r)).collect()).collect();
    let blocks = partition.iter().map(|w| f.map_multiplier(|i| w[i])).collect();
    DyadicDecomposition { indices, blocks, partition }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BesovR {
    One,
    Two,
    Infinity,
}

impl BesovR {
    pub fn parse(text: &str) -> Result<Self> {
        match text.trim() {
            "1" => Ok(BesovR::One),
            "2" => Ok(BesovR::Two),
            "inf" | "infinity" | "∞" => Ok(BesovR::Infinity),
            other => Err(Error::InvalidParameter(format!("unsupported Besov r = {other}; use 1, 2 or inf"))),
        }
    }
}

/// `|| 2^{j sigma} |Delta_j f|_{L2} ||_{l^r}`.
pub fn besov_norm(f: &SpectralField, sigma: SobolevIndex, r: BesovR) -> f64 {
    let dec = decompose(f);
    let weighted = weighted_block_norms(&dec, sigma);
    match r {
        BesovR::One => weighted.iter().sum(),
        BesovR::Two => weighted.iter().map(|w| w * w).sum::<f64>().sqrt(),
        BesovR::Infinity => weighted.iter().cloned().fold(0.0, f64::max),
    }
}

fn weighted_block_norms(dec: &DyadicDecomposition, sigma: SobolevIndex) -> Vec<f64> {
    dec.indices
        .iter()
        .zip(dec.block_norms())
        .map(|(&j, n)| (2.0f64).powf(j as f64 * sigma.value()) * n)
        .collect()
}

/// Columns `j, block_l2, scaled_block_l2` where the last is `2^{j sigma} block_l2`.
pub fn write_block_csv<W: Write>(f: &SpectralField, sigma: SobolevIndex, w: W) -> Result<()> {
    let dec = decompose(f);
    let norms = dec.block_norms();
    let weighted = weighted_block_norms(&dec, sigma);
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["j", "block_l2", "scaled_block_l2"])?;
    for ((j, n), s) in dec.indices.iter().zip(norms).zip(weighted) {
        wtr.write_record([j.to_string(), format!("{n:.16e}"), format!("{s:.16e}")])?;
    }
    wtr.flush()?;
    Ok(())
}
