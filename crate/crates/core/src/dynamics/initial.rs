use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{leray_project, sobolev_norm, Grid, PhysicalField, SobolevIndex, SpectralField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IcKind {
    TaylorGreen,
    RandomBandLimited,
}

/// Initial-condition descriptor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialCondition {
    pub kind: IcKind,
    /// Largest `|xi|` (integer lattice norm) carrying energy.
    #[serde(default = "default_band")]
    pub band: u32,
    /// Prescribed `H^{s_norm}` norm. Taylor–Green keeps unit amplitude when absent.
    #[serde(default)]
    pub target_norm: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "zero_index")]
    pub s_norm: SobolevIndex,
    /// Random coefficients are weighted by `|xi|^(-spectrum_exponent)` before
    /// projection; 0 gives white noise inside the band.
    #[serde(default)]
    pub spectrum_exponent: f64,
}

fn default_band() -> u32 {
    4
}
fn zero_index() -> SobolevIndex {
    SobolevIndex::new(0.0).unwrap()
}

impl InitialCondition {
    pub fn taylor_green() -> Self {
        Self {
            kind: IcKind::TaylorGreen,
            band: 1,
            target_norm: None,
            seed: 0,
            s_norm: zero_index(),
            spectrum_exponent: 0.0,
        }
    }

    pub fn random(band: u32, target_norm: f64, s_norm: SobolevIndex, seed: u64) -> Self {
        Self {
            kind: IcKind::RandomBandLimited,
            band,
            target_norm: Some(target_norm),
            seed,
            s_norm,
            spectrum_exponent: 0.0,
        }
    }

    pub fn with_spectrum_exponent(mut self, p: f64) -> Self {
        self.spectrum_exponent = p;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(t) = self.target_norm {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::Config(format!("target_norm must be positive, got {t}")));
            }
        }
        if self.kind == IcKind::RandomBandLimited && self.band == 0 {
            return Err(Error::Config("random initial data needs band >= 1".into()));
        }
        if !self.spectrum_exponent.is_finite() {
            return Err(Error::Config("spectrum_exponent must be finite".into()));
        }
        Ok(())
    }

    /// Divergence-free, zero-mean, real field on `grid`.
    pub fn generate(&self, grid: &Arc<Grid>) -> Result<SpectralField> {
        self.validate()?;
        let field = match self.kind {
            IcKind::TaylorGreen => taylor_green(grid),
            IcKind::RandomBandLimited => random_band_limited(grid, self.band, self.spectrum_exponent, self.seed)?,
        };
        match self.target_norm {
            Some(target) => {
                let norm = sobolev_norm(&field, self.s_norm);
                if norm == 0.0 {
                    return Err(Error::InvalidParameter("initial field vanishes; cannot rescale".into()));
                }
                Ok(field.scale(target / norm))
            }
            None if self.kind == IcKind::RandomBandLimited => {
                let norm = sobolev_norm(&field, self.s_norm);
                Ok(field.scale(1.0 / norm))
            }
            None => Ok(field),
        }
    }
}

/// `(sin x cos y, -cos x sin y)` in 2D; `(sin x cos y cos z, -cos x sin y cos z, 0)` in 3D,
/// with `x` measured in units of the fundamental wavenumber.
pub fn taylor_green(grid: &Arc<Grid>) -> SpectralField {
    let m = grid.modes();
    let kappa = 2.0 * std::f64::consts::PI / grid.length();
    let d = grid.dim();
    let mut data = vec![0.0; d * m];
    for i in 0..m {
        let p = grid.point(i);
        let (x, y, z) = (kappa * p[0], kappa * p[1], kappa * p[2]);
        let zf = if d == 3 { z.cos() } else { 1.0 };
        data[i] = x.sin() * y.cos() * zf;
        data[m + i] = -x.cos() * y.sin() * zf;
    }
    let phys = PhysicalField::new(grid.clone(), d, data).expect("shape");
    let f = SpectralField::from_physical(&phys);
    // Exact up to transform roundoff; project to make the flag hold by construction.
    leray_project(&f).expect("velocity field")
}

fn random_band_limited(grid: &Arc<Grid>, band: u32, exponent: f64, seed: u64) -> Result<SpectralField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = grid.dim();
    let m = grid.modes();
    let band2 = (band as i64).pow(2);
    let mut coeffs = vec![Complex64::default(); d * m];
    let mut any = false;
    for i in 0..m {
        let k = grid.integer_wavevector(i);
        let kk: i64 = k.iter().map(|x| x * x).sum();
        // Draw for every mode so the stream does not depend on the band.
        let draws: Vec<Complex64> = (0..d)
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(re, im)
            })
            .collect();
        if kk == 0 || kk > band2 || !grid.dealias_mask()[i] {
            continue;
        }
        any = true;
        let weight = (kk as f64).sqrt().powf(-exponent);
        for a in 0..d {
            coeffs[a * m + i] = draws[a] * weight;
        }
    }
    if !any {
        return Err(Error::InvalidParameter(format!("band {band} contains no resolvable mode")));
    }
    let raw = SpectralField::from_coeffs(grid.clone(), d, coeffs)?;
    let projected = leray_project(&raw.symmetrized())?;
    Ok(projected)
}
