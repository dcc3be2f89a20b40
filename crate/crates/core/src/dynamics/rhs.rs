//! Pseudospectral right-hand sides of the Euler and inviscid Leray-alpha systems.

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernels::{apply_kernel, KernelSpec};
use crate::spectral::field::DIVFREE_TOL;
use crate::spectral::{gradient, leray_project, PhysicalField, SpectralField};

/// `(u . ∇) v` evaluated by products in physical space.
///
/// With `dealias` the result is truncated by the 2/3 rule; without it the
/// product is exact only when both inputs are supported in `|xi_i| < n/4`.
pub fn advect(u: &SpectralField, v: &SpectralField, dealias: bool) -> Result<SpectralField> {
    let grid = v.grid().clone();
    let d = grid.dim();
    if **u.grid() != *grid {
        return Err(Error::GridMismatch);
    }
    if u.components() != d || v.components() != d {
        return Err(Error::ShapeMismatch { expected: d * grid.modes(), got: v.coeffs().len() });
    }
    let m = grid.modes();
    let u_phys = u.to_physical();
    let grad = gradient(v).to_physical();
    let mut out = vec![0.0; d * m];
    for i in 0..d {
        let dst = &mut out[i * m..(i + 1) * m];
        for j in 0..d {
            let uj = u_phys.component(j);
            let dvij = grad.component(i * d + j);
            for p in 0..m {
                dst[p] += uj[p] * dvij[p];
            }
        }
    }
    let prod = SpectralField::from_physical(&PhysicalField::new(grid, d, out)?);
    Ok(if dealias { prod.dealiased() } else { prod })
}

fn require_divfree(v: &SpectralField) -> Result<()> {
    let ratio = v.max_divergence_ratio();
    if ratio > DIVFREE_TOL {
        return Err(Error::NotDivergenceFree(ratio));
    }
    Ok(())
}

/// `-P[(u . ∇) v]` with `u = K^alpha * v`; the projection removes the pressure
/// gradient and the mean mode is held at zero.
pub fn rhs_leray_alpha(v: &SpectralField, k: &KernelSpec) -> Result<SpectralField> {
    require_divfree(v)?;
    let u = apply_kernel(k, v);
    let n = advect(&u, v, true)?;
    let mut out = leray_project(&n)?.scale(-1.0);
    for c in 0..out.components() {
        out.component_mut(c)[0] = Complex64::default();
    }
    out.set_divfree(true);
    Ok(out)
}

/// Euler right-hand side `-P[(v . ∇) v]`.
pub fn rhs_euler(v: &SpectralField) -> Result<SpectralField> {
    rhs_leray_alpha(v, &KernelSpec::identity())
}

/// Pressure recovered from `-Δp = div[(u . ∇) v]`, zero mean. Diagnostic only.
pub fn pressure(v: &SpectralField, k: &KernelSpec) -> Result<SpectralField> {
    let u = apply_kernel(k, v);
    let n = advect(&u, v, true)?;
    let grid = v.grid().clone();
    let d = grid.dim();
    let m = grid.modes();
    let mut p = vec![Complex64::default(); m];
    for (i, slot) in p.iter_mut().enumerate() {
        let k2 = grid.k2()[i];
        if k2 == 0.0 {
            continue;
        }
        let kv = grid.wavevector(i);
        let mut div = Complex64::default();
        for a in 0..d {
            div += n.component(a)[i] * Complex64::new(0.0, kv[a]);
        }
        // -Δp = div N  =>  |xi|^2 p_hat = div_hat
        *slot = div / k2;
    }
    SpectralField::from_coeffs(grid, 1, p)
}
