//! Fourier-multiplier operators: Sobolev norms, Leray projection, derivatives.

use rustfft::num_complex::Complex64;

use super::field::{SobolevIndex, SpectralField};
use crate::error::{Error, Result};

/// `(1 + |xi|^2)^s` for every mode.
pub(crate) fn sobolev_weights(f: &SpectralField, s: SobolevIndex) -> Vec<f64> {
    let s = s.value();
    f.grid().k2().iter().map(|k2| (1.0 + k2).powf(s)).collect()
}

/// `( sum_xi (1+|xi|^2)^s |f_hat(xi)|^2 )^(1/2)`, summed over all components.
///
/// Unit weight per lattice point; `s = 0` is the box-averaged L² norm.
pub fn sobolev_norm(f: &SpectralField, s: SobolevIndex) -> f64 {
    let w = sobolev_weights(f, s);
    let mut acc = 0.0;
    for c in 0..f.components() {
        acc += f.component(c).iter().zip(&w).map(|(z, w)| w * z.norm_sqr()).sum::<f64>();
    }
    acc.sqrt()
}

/// Real part of the `H^s` inner product `sum_xi (1+|xi|^2)^s a_hat . conj(b_hat)`.
pub fn sobolev_inner(a: &SpectralField, b: &SpectralField, s: SobolevIndex) -> Result<f64> {
    if **a.grid() != **b.grid() {
        return Err(Error::GridMismatch);
    }
    if a.components() != b.components() {
        return Err(Error::ShapeMismatch { expected: a.coeffs().len(), got: b.coeffs().len() });
    }
    let w = sobolev_weights(a, s);
    let mut acc = 0.0;
    for c in 0..a.components() {
        acc += a
            .component(c)
            .iter()
            .zip(b.component(c))
            .zip(&w)
            .map(|((x, y), w)| w * (x * y.conj()).re)
            .sum::<f64>();
    }
    Ok(acc)
}

/// Projection onto divergence-free fields: `v_hat - xi (xi . v_hat) / |xi|^2`.
/// The zero mode passes through unchanged.
pub fn leray_project(f: &SpectralField) -> Result<SpectralField> {
    let grid = f.grid().clone();
    let d = grid.dim();
    if f.components() != d {
        return Err(Error::ShapeMismatch { expected: d * grid.modes(), got: f.coeffs().len() });
    }
    let m = grid.modes();
    let mut out = f.clone();
    let coeffs = out.coeffs_mut();
    for i in 0..m {
        let k2 = grid.k2()[i];
        if k2 == 0.0 {
            continue;
        }
        let k = grid.wavevector(i);
        let mut dot = Complex64::default();
        for a in 0..d {
            dot += coeffs[a * m + i] * k[a];
        }
        let factor = dot / k2;
        for a in 0..d {
            coeffs[a * m + i] -= factor * k[a];
        }
    }
    out.set_divfree(true);
    Ok(out)
}

/// Multiplies every component by `i xi_axis`.
pub fn derivative(f: &SpectralField, axis: usize) -> Result<SpectralField> {
    let grid = f.grid().clone();
    if axis >= grid.dim() {
        return Err(Error::AxisOutOfRange { axis, dim: grid.dim() });
    }
    let mut out = f.clone();
    for c in 0..f.components() {
        for (i, z) in out.component_mut(c).iter_mut().enumerate() {
            *z *= Complex64::new(0.0, grid.wavevector(i)[axis]);
        }
    }
    Ok(out)
}

/// Spectral Laplacian, multiplier `-|xi|^2`.
pub fn laplacian(f: &SpectralField) -> SpectralField {
    let k2 = f.grid().k2().to_vec();
    f.map_multiplier(|i| -k2[i])
}

/// All first derivatives `d_j f_i`, returned as a field with `components * dim`
/// entries ordered `(i, j)` with `j` fastest.
pub fn gradient(f: &SpectralField) -> SpectralField {
    let grid = f.grid().clone();
    let d = grid.dim();
    let m = grid.modes();
    let mut coeffs = Vec::with_capacity(f.components() * d * m);
    for c in 0..f.components() {
        let comp = f.component(c);
        for a in 0..d {
            coeffs.extend(
                comp.iter()
                    .enumerate()
                    .map(|(i, z)| z * Complex64::new(0.0, grid.wavevector(i)[a])),
            );
        }
    }
    SpectralField::from_coeffs(grid, f.components() * d, coeffs).expect("gradient shape")
}

/// Scalar divergence `sum_a i xi_a f_a`.
pub fn divergence(f: &SpectralField) -> Result<SpectralField> {
    let grid = f.grid().clone();
    let d = grid.dim();
    if f.components() != d {
        return Err(Error::ShapeMismatch { expected: d * grid.modes(), got: f.coeffs().len() });
    }
    let m = grid.modes();
    let mut coeffs = vec![Complex64::default(); m];
    for a in 0..d {
        for (i, z) in f.component(a).iter().enumerate() {
            coeffs[i] += z * Complex64::new(0.0, grid.wavevector(i)[a]);
        }
    }
    SpectralField::from_coeffs(grid, 1, coeffs)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use proptest::prelude::*;

    use super::*;
    use crate::spectral::field::{sobolev, PhysicalField};
    use crate::spectral::grid::Grid;

    fn unit_mode(grid: &Arc<Grid>, comps: usize, c: usize, k: &[i64]) -> SpectralField {
        let mut f = SpectralField::zeros(grid.clone(), comps);
        f.set_mode(c, k, Complex64::new(1.0, 0.0)).unwrap();
        f
    }

    fn random_field(grid: &Arc<Grid>, comps: usize, band: i64, seed: u64) -> SpectralField {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut f = SpectralField::zeros(grid.clone(), comps);
        for c in 0..comps {
            for i in 0..grid.modes() {
                let k = grid.integer_wavevector(i);
                if k.iter().all(|x| x.abs() <= band) {
                    f.component_mut(c)[i] = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                }
            }
        }
        f.symmetrized()
    }

    #[test]
    fn single_mode_h1_norm() {
        let g = Arc::new(Grid::periodic(2, 8).unwrap());
        let f = unit_mode(&g, 1, 0, &[1, 0]);
        assert!((sobolev_norm(&f, sobolev(1.0)) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn zero_field_norm_is_zero() {
        let g = Arc::new(Grid::periodic(2, 8).unwrap());
        let f = SpectralField::zero_velocity(g);
        for s in [0.0, 1.5, 4.0] {
            assert_eq!(sobolev_norm(&f, sobolev(s)), 0.0);
        }
    }

    #[test]
    fn norm_matches_scalar_loop() {
        let g = Arc::new(Grid::periodic(2, 16).unwrap());
        let f = random_field(&g, 2, 5, 3);
        // Independent loop over integer wave vectors.
        let mut acc = 0.0;
        for c in 0..2 {
            for k0 in -8i64..8 {
                for k1 in -8i64..8 {
                    let z = f.mode(c, &[k0, k1]).unwrap();
                    let w = (1.0 + (k0 * k0 + k1 * k1) as f64).powi(2);
                    acc += w * (z.re * z.re + z.im * z.im);
                }
            }
        }
        let got = sobolev_norm(&f, sobolev(2.0));
        assert!((got - acc.sqrt()).abs() <= 1e-12 * got);
    }

    #[test]
    fn projector_annihilates_gradients() {
        let g = Arc::new(Grid::periodic(2, 16).unwrap());
        let phi = random_field(&g, 1, 5, 9);
        let mut grad = SpectralField::zero_velocity(g.clone());
        for a in 0..2 {
            let d = derivative(&phi, a).unwrap();
            grad.component_mut(a).copy_from_slice(d.component(0));
        }
        let p = leray_project(&grad).unwrap();
        assert!(p.coeffs().iter().all(|z| z.norm() < 1e-13));
    }

    #[test]
    fn projector_hand_example() {
        let g = Arc::new(Grid::periodic(2, 8).unwrap());
        let mut f = SpectralField::zero_velocity(g);
        f.set_mode(0, &[1, 0], Complex64::new(1.0, 0.0)).unwrap();
        f.set_mode(1, &[1, 0], Complex64::new(1.0, 0.0)).unwrap();
        let p = leray_project(&f).unwrap();
        assert!(p.mode(0, &[1, 0]).unwrap().norm() < 1e-15);
        assert!((p.mode(1, &[1, 0]).unwrap() - 1.0).norm() < 1e-15);
        assert!(p.is_divfree());
    }

    #[test]
    fn projector_idempotent_and_identity_on_image() {
        let g = Arc::new(Grid::periodic(3, 8).unwrap());
        let f = random_field(&g, 3, 3, 1);
        let p = leray_project(&f).unwrap();
        let pp = leray_project(&p).unwrap();
        for (a, b) in p.coeffs().iter().zip(pp.coeffs()) {
            assert!((a - b).norm() <= 1e-14 * (1.0 + a.norm()));
        }
        assert!(p.divergence_residual() < 1e-13);
    }

    #[test]
    fn derivative_examples() {
        let g = Arc::new(Grid::periodic(2, 8).unwrap());
        let f = unit_mode(&g, 1, 0, &[1, 0]);
        let d = derivative(&f, 0).unwrap();
        assert_eq!(d.mode(0, &[1, 0]).unwrap(), Complex64::new(0.0, 1.0));
        let c = unit_mode(&g, 1, 0, &[0, 0]);
        assert!(derivative(&c, 0).unwrap().coeffs().iter().all(|z| z.norm() == 0.0));
        assert!(matches!(derivative(&f, 2), Err(Error::AxisOutOfRange { axis: 2, dim: 2 })));
    }

    #[test]
    fn parseval_against_physical_quadrature() {
        let g = Arc::new(Grid::periodic(2, 32).unwrap());
        let f = random_field(&g, 2, 10, 5);
        let p: PhysicalField = f.to_physical();
        let l2 = sobolev_norm(&f, sobolev(0.0));
        assert!((l2 * l2 - p.mean_square()).abs() <= 1e-10 * p.mean_square());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn norm_monotone_in_s(seed in 0u64..1000, s1 in 0.0f64..4.0, ds in 0.0f64..3.0) {
            let g = Arc::new(Grid::periodic(2, 16).unwrap());
            let f = random_field(&g, 2, 6, seed);
            prop_assert!(sobolev_norm(&f, sobolev(s1)) <= sobolev_norm(&f, sobolev(s1 + ds)) * (1.0 + 1e-14));
        }

        #[test]
        fn derivative_bounded_by_h1(seed in 0u64..1000, axis in 0usize..2) {
            let g = Arc::new(Grid::periodic(2, 16).unwrap());
            let f = random_field(&g, 2, 6, seed);
            let d = derivative(&f, axis).unwrap();
            prop_assert!(sobolev_norm(&d, sobolev(0.0)) <= sobolev_norm(&f, sobolev(1.0)));
        }
    }
}
