use std::sync::Arc;

use rustfft::num_complex::Complex64;

use super::grid::Grid;
use crate::error::{Error, Result};

/// Regularity exponent of a Sobolev space `H^s`.
///
/// Any finite real is accepted; the weak-convergence diagnostics need `s = -1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct SobolevIndex(f64);

impl SobolevIndex {
    pub fn new(s: f64) -> Result<Self> {
        if s.is_finite() {
            Ok(Self(s))
        } else {
            Err(Error::InvalidParameter(format!("Sobolev index must be finite, got {s}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `self + shift`, used for the `s+1`, `s+2` norms.
    pub fn shifted(self, shift: f64) -> Self {
        Self(self.0 + shift)
    }
}

impl TryFrom<f64> for SobolevIndex {
    type Error = Error;
    fn try_from(s: f64) -> Result<Self> {
        Self::new(s)
    }
}

impl From<SobolevIndex> for f64 {
    fn from(s: SobolevIndex) -> f64 {
        s.0
    }
}

/// Shorthand for building an index from a literal known to be finite.
pub fn sobolev(s: f64) -> SobolevIndex {
    SobolevIndex::new(s).expect("finite Sobolev index")
}

/// Fourier coefficients of a (vector) field on the torus.
///
/// Normalisation: `f(x) = sum_xi f_hat(xi) exp(i xi.x)`, so the coefficient of
/// a unit-amplitude plane wave is 1 and the plain mode sum of `|f_hat|^2` is
/// the mean of `|f|^2` over the box. Coefficients are stored component-major.
#[derive(Debug, Clone)]
pub struct SpectralField {
    grid: Arc<Grid>,
    components: usize,
    coeffs: Vec<Complex64>,
    divfree: bool,
}

/// Real samples of a field on the grid points, component-major.
#[derive(Debug, Clone)]
pub struct PhysicalField {
    grid: Arc<Grid>,
    components: usize,
    data: Vec<f64>,
}

impl PhysicalField {
    pub fn new(grid: Arc<Grid>, components: usize, data: Vec<f64>) -> Result<Self> {
        let expected = components * grid.modes();
        if components == 0 || data.len() != expected {
            return Err(Error::ShapeMismatch { expected, got: data.len() });
        }
        Ok(Self { grid, components, data })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn component(&self, c: usize) -> &[f64] {
        let m = self.grid.modes();
        &self.data[c * m..(c + 1) * m]
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Normalised quadrature of `|f|^2`: the box average of the pointwise square.
    pub fn mean_square(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>() / self.grid.modes() as f64
    }

    /// Maximum pointwise Euclidean magnitude over all samples.
    pub fn max_magnitude(&self) -> f64 {
        let m = self.grid.modes();
        (0..m)
            .map(|i| (0..self.components).map(|c| self.data[c * m + i].powi(2)).sum::<f64>())
            .fold(0.0, f64::max)
            .sqrt()
    }
}

impl SpectralField {
    pub fn zeros(grid: Arc<Grid>, components: usize) -> Self {
        let len = components * grid.modes();
        Self { grid, components, coeffs: vec![Complex64::default(); len], divfree: true }
    }

    /// Zero velocity field (`dim` components).
    pub fn zero_velocity(grid: Arc<Grid>) -> Self {
        let d = grid.dim();
        Self::zeros(grid, d)
    }

    /// Wraps raw coefficients. No symmetry is imposed, so complex-valued test
    /// fields (e.g. a lone `exp(i xi.x)`) are representable.
    pub fn from_coeffs(grid: Arc<Grid>, components: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        let expected = components * grid.modes();
        if components == 0 || coeffs.len() != expected {
            return Err(Error::ShapeMismatch { expected, got: coeffs.len() });
        }
        let mut f = Self { grid, components, coeffs, divfree: false };
        f.divfree = f.components == f.grid.dim() && f.max_divergence_ratio() <= DIVFREE_TOL;
        Ok(f)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        let m = self.grid.modes();
        &self.coeffs[c * m..(c + 1) * m]
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub(crate) fn component_mut(&mut self, c: usize) -> &mut [Complex64] {
        let m = self.grid.modes();
        &mut self.coeffs[c * m..(c + 1) * m]
    }

    /// Whether the field is known to be divergence-free.
    pub fn is_divfree(&self) -> bool {
        self.divfree
    }

    pub(crate) fn set_divfree(&mut self, flag: bool) {
        self.divfree = flag;
    }

    /// Coefficient of component `c` at integer wave vector `k`.
    pub fn mode(&self, c: usize, k: &[i64]) -> Option<Complex64> {
        let idx = self.grid.mode_index(k)?;
        Some(self.component(c)[idx])
    }

    /// Sets one coefficient. Clears the divergence-free flag unless re-verified.
    pub fn set_mode(&mut self, c: usize, k: &[i64], value: Complex64) -> Result<()> {
        let idx = self
            .grid
            .mode_index(k)
            .ok_or_else(|| Error::InvalidParameter(format!("wave vector {k:?} is off the lattice")))?;
        if c >= self.components {
            return Err(Error::InvalidParameter(format!("component {c} out of range")));
        }
        self.component_mut(c)[idx] = value;
        self.divfree = self.components == self.grid.dim() && self.max_divergence_ratio() <= DIVFREE_TOL;
        Ok(())
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if *self.grid != *other.grid {
            return Err(Error::GridMismatch);
        }
        if self.components != other.components {
            return Err(Error::ShapeMismatch { expected: self.coeffs.len(), got: other.coeffs.len() });
        }
        Ok(())
    }

    /// `self + scale * other`.
    pub fn add_scaled(&self, other: &Self, scale: f64) -> Result<Self> {
        self.check_same_shape(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b * scale).collect();
        Ok(Self {
            grid: self.grid.clone(),
            components: self.components,
            coeffs,
            divfree: self.divfree && other.divfree,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add_scaled(other, -1.0)
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            components: self.components,
            coeffs: self.coeffs.iter().map(|a| a * factor).collect(),
            divfree: self.divfree,
        }
    }

    /// Mode-wise real multiplier `m(xi)` applied to every component.
    pub fn map_multiplier(&self, mut m: impl FnMut(usize) -> f64) -> Self {
        let modes = self.grid.modes();
        let table: Vec<f64> = (0..modes).map(&mut m).collect();
        let mut out = self.clone();
        for c in 0..self.components {
            for (v, w) in out.component_mut(c).iter_mut().zip(&table) {
                *v *= *w;
            }
        }
        out
    }

    /// Zeroes every mode outside the 2/3-rule mask.
    pub fn dealiased(&self) -> Self {
        let mask = self.grid.dealias_mask();
        self.map_multiplier(|i| if mask[i] { 1.0 } else { 0.0 })
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Max over modes of `|f_hat(-xi) - conj(f_hat(xi))|`.
    pub fn hermitian_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for c in 0..self.components {
            let comp = self.component(c);
            for (i, z) in comp.iter().enumerate() {
                let r = (comp[self.grid.negated_index(i)] - z.conj()).norm();
                worst = worst.max(r);
            }
        }
        worst
    }

    /// Replaces each coefficient by the average of itself and the conjugate of
    /// its mirror, making the field exactly real.
    pub fn symmetrized(&self) -> Self {
        let mut out = self.clone();
        for c in 0..self.components {
            let src = self.component(c);
            let dst = out.component_mut(c);
            for i in 0..src.len() {
                dst[i] = 0.5 * (src[i] + src[self.grid.negated_index(i)].conj());
            }
        }
        out
    }

    /// Max over modes of `|xi . f_hat(xi)|` (absolute).
    pub fn divergence_residual(&self) -> f64 {
        self.divergence_scan().0
    }

    /// Max over nonzero modes of `|xi . f_hat| / |xi|`, relative to the L² norm
    /// of the whole field. Roundoff-level modes make a per-mode ratio meaningless.
    pub fn max_divergence_ratio(&self) -> f64 {
        self.divergence_scan().1
    }

    fn divergence_scan(&self) -> (f64, f64) {
        if self.components != self.grid.dim() {
            return (f64::INFINITY, f64::INFINITY);
        }
        let d = self.grid.dim();
        let mut abs = 0.0f64;
        let mut unit = 0.0f64;
        for i in 0..self.grid.modes() {
            let k = self.grid.wavevector(i);
            let mut dot = Complex64::default();
            for a in 0..d {
                dot += self.component(a)[i] * k[a];
            }
            let r = dot.norm();
            abs = abs.max(r);
            let k2 = self.grid.k2()[i];
            if k2 > 0.0 {
                unit = unit.max(r / k2.sqrt());
            }
        }
        let norm = self.coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let rel = if norm > 0.0 { unit / norm } else { 0.0 };
        (abs, rel)
    }

    /// Transforms to real physical samples (imaginary parts are dropped).
    pub fn to_physical(&self) -> PhysicalField {
        let m = self.grid.modes();
        let mut data = Vec::with_capacity(self.coeffs.len());
        let mut buf = vec![Complex64::default(); m];
        for c in 0..self.components {
            buf.copy_from_slice(self.component(c));
            self.grid.transform(&mut buf, false);
            data.extend(buf.iter().map(|z| z.re));
        }
        PhysicalField { grid: self.grid.clone(), components: self.components, data }
    }

    /// Complex physical samples, for fields that need not be real.
    pub fn to_physical_complex(&self) -> Vec<Complex64> {
        let mut out = self.coeffs.clone();
        let m = self.grid.modes();
        for chunk in out.chunks_mut(m) {
            self.grid.transform(chunk, false);
        }
        out
    }

    /// Forward transform of real samples; the result is Hermitian by construction.
    pub fn from_physical(field: &PhysicalField) -> Self {
        let grid = field.grid.clone();
        let m = grid.modes();
        let norm = 1.0 / m as f64;
        let mut coeffs = Vec::with_capacity(field.data.len());
        let mut buf = vec![Complex64::default(); m];
        for c in 0..field.components {
            for (b, x) in buf.iter_mut().zip(field.component(c)) {
                *b = Complex64::new(*x, 0.0);
            }
            grid.transform(&mut buf, true);
            coeffs.extend(buf.iter().map(|z| z * norm));
        }
        let raw = Self { grid, components: field.components, coeffs, divfree: false };
        let mut out = raw.symmetrized();
        out.divfree = out.components == out.grid.dim() && out.max_divergence_ratio() <= DIVFREE_TOL;
        out
    }

    /// Builds a field from raw physical samples, checking the shape.
    pub fn from_physical_data(grid: Arc<Grid>, components: usize, data: Vec<f64>) -> Result<Self> {
        Ok(Self::from_physical(&PhysicalField::new(grid, components, data)?))
    }

    /// Forward transform of complex samples (no symmetrisation).
    pub fn from_physical_complex(grid: Arc<Grid>, components: usize, mut data: Vec<Complex64>) -> Result<Self> {
        let m = grid.modes();
        if components == 0 || data.len() != components * m {
            return Err(Error::ShapeMismatch { expected: components * m, got: data.len() });
        }
        let norm = 1.0 / m as f64;
        for chunk in data.chunks_mut(m) {
            grid.transform(chunk, true);
            chunk.iter_mut().for_each(|z| *z *= norm);
        }
        Self::from_coeffs(grid, components, data)
    }
}

/// Normalised divergence tolerance used to set the divergence-free flag.
pub const DIVFREE_TOL: f64 = 1e-10;
