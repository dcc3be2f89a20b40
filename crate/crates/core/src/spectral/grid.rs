use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Periodic box `[0, length)^dim` sampled with `n` points per axis.
///
/// Modes are stored flat in standard FFT order with axis 0 slowest, so the
/// flat index of the integer wave vector `(k0, k1[, k2])` is
/// `((i0 * n) + i1) * n + i2` with `i = k mod n`. Physical samples use the
/// same layout.
pub struct Grid {
    dim: usize,
    n: usize,
    length: f64,
    /// Integer frequency per FFT index along one axis.
    freqs: Vec<i64>,
    /// Physical wave vector per mode (unused axes are zero).
    wavevectors: Vec<[f64; 3]>,
    /// `|xi|^2` per mode.
    k2: Vec<f64>,
    /// Flat index of `-xi` per mode.
    negated: Vec<usize>,
    dealias: Vec<bool>,
    dealias_bound: i64,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("dim", &self.dim)
            .field("n", &self.n)
            .field("length", &self.length)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.n == other.n && self.length == other.length
    }
}

impl Grid {
    pub fn new(dim: usize, n: usize, length: f64) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidGrid(format!("dimension must be 2 or 3, got {dim}")));
        }
        if n < 8 || n % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be even and at least 8, got {n}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!("period must be positive, got {length}")));
        }

        let half = (n / 2) as i64;
        let freqs: Vec<i64> = (0..n as i64).map(|i| if i >= half { i - n as i64 } else { i }).collect();
        let scale = 2.0 * PI / length;
        // 2/3 rule: keep |k_i| <= floor(n/3) on every axis.
        let dealias_bound = (n / 3) as i64;

        let total = n.pow(dim as u32);
        let mut wavevectors = Vec::with_capacity(total);
        let mut k2 = Vec::with_capacity(total);
        let mut negated = Vec::with_capacity(total);
        let mut dealias = Vec::with_capacity(total);
        for idx in 0..total {
            let digits = unflatten(idx, n, dim);
            let mut kv = [0.0; 3];
            let mut neg = 0;
            let mut keep = true;
            for a in 0..dim {
                let k = freqs[digits[a]];
                kv[a] = k as f64 * scale;
                keep &= k.abs() <= dealias_bound;
                neg = neg * n + (n - digits[a]) % n;
            }
            k2.push(kv.iter().map(|x| x * x).sum());
            wavevectors.push(kv);
            negated.push(neg);
            dealias.push(keep);
        }

        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);

        Ok(Self {
            dim,
            n,
            length,
            freqs,
            wavevectors,
            k2,
            negated,
            dealias,
            dealias_bound,
            fwd,
            inv,
        })
    }

    /// Grid on the standard `2π`-periodic torus.
    pub fn periodic(dim: usize, n: usize) -> Result<Self> {
        Self::new(dim, n, 2.0 * PI)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Grid spacing.
    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Number of lattice modes (equal to the number of physical samples).
    pub fn modes(&self) -> usize {
        self.k2.len()
    }

    /// Integer frequencies along one axis in FFT order.
    pub fn frequencies(&self) -> &[i64] {
        &self.freqs
    }

    pub fn wavevector(&self, idx: usize) -> &[f64; 3] {
        &self.wavevectors[idx]
    }

    pub fn wavevectors(&self) -> &[[f64; 3]] {
        &self.wavevectors
    }

    /// `|xi|^2` for every mode.
    pub fn k2(&self) -> &[f64] {
        &self.k2
    }

    pub fn negated_index(&self, idx: usize) -> usize {
        self.negated[idx]
    }

    pub fn dealias_mask(&self) -> &[bool] {
        &self.dealias
    }

    /// Largest retained `|k_i|` under the 2/3 rule.
    pub fn dealias_bound(&self) -> i64 {
        self.dealias_bound
    }

    /// Integer wave vector of a flat mode index.
    pub fn integer_wavevector(&self, idx: usize) -> [i64; 3] {
        let digits = unflatten(idx, self.n, self.dim);
        let mut out = [0; 3];
        for a in 0..self.dim {
            out[a] = self.freqs[digits[a]];
        }
        out
    }

    /// Flat index of an integer wave vector, or `None` if it is not on the lattice.
    pub fn mode_index(&self, k: &[i64]) -> Option<usize> {
        if k.len() != self.dim {
            return None;
        }
        let half = (self.n / 2) as i64;
        let mut idx = 0;
        for &ki in k {
            if ki < -half || ki >= half {
                return None;
            }
            idx = idx * self.n + ki.rem_euclid(self.n as i64) as usize;
        }
        Some(idx)
    }

    /// Physical coordinates of a flat sample index.
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let digits = unflatten(idx, self.n, self.dim);
        let mut out = [0.0; 3];
        for a in 0..self.dim {
            out[a] = digits[a] as f64 * self.dx();
        }
        out
    }

    /// In-place unnormalised multi-dimensional FFT over one component.
    pub(crate) fn transform(&self, data: &mut [Complex64], forward: bool) {
        debug_assert_eq!(data.len(), self.modes());
        let plan = if forward { &self.fwd } else { &self.inv };
        let n = self.n;
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        // Last axis: contiguous lines, one batched call.
        plan.process_with_scratch(data, &mut scratch);
        let mut line = vec![Complex64::default(); n];
        for axis in 0..self.dim - 1 {
            let stride = n.pow((self.dim - 1 - axis) as u32);
            let block = stride * n;
            for base in (0..data.len()).step_by(block) {
                for offset in 0..stride {
                    let start = base + offset;
                    for (k, slot) in line.iter_mut().enumerate() {
                        *slot = data[start + k * stride];
                    }
                    plan.process_with_scratch(&mut line, &mut scratch);
                    for (k, v) in line.iter().enumerate() {
                        data[start + k * stride] = *v;
                    }
                }
            }
        }
    }
}

fn unflatten(mut idx: usize, n: usize, dim: usize) -> [usize; 3] {
    let mut out = [0; 3];
    for a in (0..dim).rev() {
        out[a] = idx % n;
        idx /= n;
    }
    out
}
