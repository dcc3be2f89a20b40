//! Annulus mollifier `f_r(x) = ∫_{1<|z|<2} f(x - r z) j(z) dz`, applied as the
//! Fourier multiplier `j_hat(r xi)`.

use std::collections::HashMap;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::spectral::SpectralField;

/// Radial nodes for every profile quadrature.
const RADIAL_NODES: usize = 1200;

/// Unnormalised bump `exp(-1/(1-(2rho-3)^2))` on `1 < rho < 2`.
pub fn bump(rho: f64) -> f64 {
    let t = 2.0 * rho - 3.0;
    if t.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - t * t)).exp()
    }
}

/// Sphere surface measure in `d` dimensions (`d` = 2 or 3).
fn sphere(d: usize) -> f64 {
    if d == 2 {
        2.0 * PI
    } else {
        4.0 * PI
    }
}

/// Trapezoid nodes on `[1, 2]`; the integrands vanish to all orders at both ends.
fn radial_nodes() -> impl Iterator<Item = (f64, f64)> {
    let h = 1.0 / RADIAL_NODES as f64;
    (1..RADIAL_NODES).map(move |i| (1.0 + i as f64 * h, h))
}

/// `J_0(x) = (1/pi) ∫_0^pi cos(x sin theta) dtheta`; the integrand is
/// `pi`-periodic and analytic, so the rectangle rule converges geometrically.
pub fn bessel_j0(x: f64) -> f64 {
    let m = x.abs().ceil() as usize + 40;
    let h = PI / m as f64;
    (0..m).map(|i| (x * (i as f64 * h).sin()).cos()).sum::<f64>() / m as f64
}

#[derive(Debug, Clone)]
pub struct BandMollifier {
    dim: usize,
    r: f64,
    /// Normalisation so that `∫ j = 1`.
    c: f64,
}

impl BandMollifier {
    pub fn new(dim: usize, r: f64) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidGrid(format!("dimension {dim} unsupported")));
        }
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::InvalidParameter(format!("scale r must be positive, got {r}")));
        }
        let mass: f64 = radial_nodes().map(|(rho, h)| h * bump(rho) * rho.powi(dim as i32 - 1)).sum::<f64>() * sphere(dim);
        Ok(Self { dim, r, c: 1.0 / mass })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// Normalised profile `j(|z|)`.
    pub fn profile(&self, rho: f64) -> f64 {
        self.c * bump(rho)
    }

    /// `j_hat(k)` for the unscaled profile at wavenumber magnitude `k`.
    pub fn transform(&self, k: f64) -> f64 {
        let s = sphere(self.dim) * self.c;
        let integral: f64 = radial_nodes()
            .map(|(rho, h)| {
                let kr = k * rho;
                let kernel = if self.dim == 2 {
                    bessel_j0(kr) * rho
                } else if kr == 0.0 {
                    rho * rho
                } else {
                    kr.sin() / kr * rho * rho
                };
                h * bump(rho) * kernel
            })
            .sum();
        s * integral
    }
}

/// Applies `j_hat(r |xi|)` mode by mode; requires `2r < L/2`.
pub fn band_mollify(f: &SpectralField, m: &BandMollifier) -> Result<SpectralField> {
    let grid = f.grid();
    if grid.dim() != m.dim {
        return Err(Error::InvalidParameter(format!(
            "mollifier built for d = {}, field has d = {}",
            m.dim,
            grid.dim()
        )));
    }
    if !(2.0 * m.r < 0.5 * grid.length()) {
        return Err(Error::InvalidParameter(format!("2r = {} must be below the half-width", 2.0 * m.r)));
    }
    let mut cache: HashMap<u64, f64> = HashMap::new();
    let k2 = grid.k2();
    let mult: Vec<f64> = k2
        .iter()
        .map(|&q| *cache.entry(q.to_bits()).or_insert_with(|| m.transform(m.r * q.sqrt())))
        .collect();
    Ok(f.map_multiplier(|i| mult[i]))
}
