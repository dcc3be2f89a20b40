//! Time-integrated second-order structure functions and their scaling fits.

use std::io::Write;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::Snapshot;
use crate::error::{Error, Result};
use crate::fit::loglog_fit;
use crate::spectral::{Grid, SpectralField};

/// Axis-aligned box of grid cells `[lo_a, hi_a)` per axis, or the whole torus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubBox {
    pub lo: Vec<usize>,
    pub hi: Vec<usize>,
    /// The whole periodic box; it has no boundary, so every shift is admissible.
    #[serde(default)]
    pub full: bool,
}

impl SubBox {
    pub fn new(grid: &Grid, lo: Vec<usize>, hi: Vec<usize>) -> Result<Self> {
        let b = Self { lo, hi, full: false };
        b.validate(grid)?;
        Ok(b)
    }

    pub fn full_torus(grid: &Grid) -> Self {
        Self { lo: vec![0; grid.dim()], hi: vec![grid.n(); grid.dim()], full: true }
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        let d = grid.dim();
        if self.lo.len() != d || self.hi.len() != d {
            return Err(Error::InvalidParameter(format!("sub-box needs {d} bounds per side")));
        }
        if self.lo.iter().zip(&self.hi).any(|(&a, &b)| a >= b || b > grid.n()) {
            return Err(Error::InvalidParameter(format!("empty or out-of-range sub-box {self:?}")));
        }
        Ok(())
    }

    /// Distance from the box to the edge of the fundamental cell.
    pub fn margin(&self, grid: &Grid) -> f64 {
        if self.full {
            return f64::INFINITY;
        }
        let dx = grid.dx();
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(&a, &b)| (a as f64 * dx).min((grid.n() - b) as f64 * dx))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn volume(&self, grid: &Grid) -> f64 {
        let dx = grid.dx();
        self.lo.iter().zip(&self.hi).map(|(&a, &b)| (b - a) as f64 * dx).product()
    }

    pub fn descriptor(&self) -> String {
        if self.full {
            return "torus".into();
        }
        let parts: Vec<String> = self.lo.iter().zip(&self.hi).map(|(a, b)| format!("{a}:{b}")).collect();
        parts.join("x")
    }

    fn contains(&self, grid: &Grid, idx: usize) -> bool {
        let n = grid.n();
        let mut rest = idx;
        for a in (0..grid.dim()).rev() {
            let i = rest % n;
            rest /= n;
            if i < self.lo[a] || i >= self.hi[a] {
                return false;
            }
        }
        true
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureFunctionSample {
    pub y: Vec<f64>,
    /// `∫∫_K |v(x+y,t) - v(x,t)|^2 dx dt`.
    pub s2: f64,
    pub t_span: f64,
    pub subdomain: SubBox,
}

impl StructureFunctionSample {
    pub fn y_norm(&self) -> f64 {
        self.y.iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

/// `v(. + y)` by the exact phase shift `v_hat(xi) e^{i xi.y}`.
pub fn shifted(f: &SpectralField, y: &[f64]) -> SpectralField {
    let grid = f.grid();
    let length = grid.length();
    let y: Vec<f64> = y.iter().map(|c| c.rem_euclid(length)).collect();
    if y.iter().all(|&c| c == 0.0) {
        return f.clone();
    }
    let phases: Vec<Complex64> = grid
        .wavevectors()
        .iter()
        .map(|k| {
            let arg: f64 = y.iter().zip(k).map(|(a, b)| a * b).sum();
            Complex64::from_polar(1.0, arg)
        })
        .collect();
    let m = grid.modes();
    let coeffs: Vec<Complex64> = f.coeffs().iter().enumerate().map(|(i, z)| z * phases[i % m]).collect();
    SpectralField::from_coeffs(grid.clone(), f.components(), coeffs).expect("same shape")
}

fn increment_integral(f: &SpectralField, y: &[f64], k: &SubBox) -> f64 {
    let grid = f.grid();
    let length = grid.length();
    if y.iter().all(|c| c.rem_euclid(length) == 0.0) {
        return 0.0;
    }
    let a = f.to_physical();
    let b = shifted(f, y).to_physical();
    let m = grid.modes();
    let cell = grid.dx().powi(grid.dim() as i32);
    let mut acc = 0.0;
    for p in (0..m).filter(|&p| k.contains(grid, p)) {
        for c in 0..f.components() {
            let d = b.component(c)[p] - a.component(c)[p];
            acc += d * d;
        }
    }
    acc * cell
}

/// Rectangle rule over `K`, trapezoid rule over the snapshot times.
pub fn second_order_structure(snapshots: &[Snapshot], k: &SubBox, y: &[f64]) -> Result<StructureFunctionSample> {
    if snapshots.len() < 2 {
        return Err(Error::InvalidParameter("need at least two snapshots".into()));
    }
    if snapshots.windows(2).any(|w| !(w[1].t > w[0].t)) {
        return Err(Error::InvalidParameter("snapshots must be strictly time-ordered".into()));
    }
    let grid = snapshots[0].field.grid().clone();
    if snapshots.iter().any(|s| **s.field.grid() != *grid) {
        return Err(Error::GridMismatch);
    }
    if y.len() != grid.dim() {
        return Err(Error::InvalidParameter(format!("displacement needs {} components", grid.dim())));
    }
    k.validate(&grid)?;
    let norm = y.iter().map(|c| c * c).sum::<f64>().sqrt();
    let margin = k.margin(&grid);
    if !k.full && norm + grid.dx() > margin {
        return Err(Error::InvalidParameter(format!(
            "|y| = {norm} plus one cell exceeds the sub-box margin {margin}"
        )));
    }
    let values: Vec<f64> = snapshots.iter().map(|s| increment_integral(&s.field, y, k)).collect();
    let mut s2 = 0.0;
    for (w, v) in snapshots.windows(2).zip(values.windows(2)) {
        s2 += 0.5 * (w[1].t - w[0].t) * (v[0] + v[1]);
    }
    Ok(StructureFunctionSample {
        y: y.to_vec(),
        s2,
        t_span: snapshots.last().unwrap().t - snapshots[0].t,
        subdomain: k.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub gamma_hat: f64,
    pub e_hat: f64,
    pub residual: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub n_samples: usize,
}

/// Fits `s2 = E |y|^{2 gamma}` over samples with `|y|` in `[y_min, y_max]`.
pub fn fit_scaling_exponent(samples: &[StructureFunctionSample], y_min: f64, y_max: f64) -> Result<ScalingFit> {
    let used: Vec<&StructureFunctionSample> = samples
        .iter()
        .filter(|s| {
            let r = s.y_norm();
            r >= y_min && r <= y_max
        })
        .collect();
    if used.len() < 4 {
        return Err(Error::Fit(format!("{} samples in range, need at least 4", used.len())));
    }
    if let Some(bad) = used.iter().find(|s| !(s.s2 > 0.0)) {
        return Err(Error::Fit(format!("nonpositive structure function {} at |y| = {}", bad.s2, bad.y_norm())));
    }
    let xs: Vec<f64> = used.iter().map(|s| s.y_norm()).collect();
    let ys: Vec<f64> = used.iter().map(|s| s.s2).collect();
    let f = loglog_fit(&xs, &ys)?;
    Ok(ScalingFit {
        gamma_hat: f.slope / 2.0,
        e_hat: f.intercept.exp(),
        residual: f.residual,
        y_min,
        y_max,
        n_samples: used.len(),
    })
}

/// Columns `|y|, yx, yy[, yz], s2, t_span, K_descriptor`.
pub fn write_structure_csv<W: Write>(samples: &[StructureFunctionSample], w: W) -> Result<()> {
    let dim = samples.first().map(|s| s.y.len()).ok_or(Error::Empty("structure samples"))?;
    let mut wtr = csv::Writer::from_writer(w);
    let mut header = vec!["|y|", "yx", "yy"];
    if dim == 3 {
        header.push("yz");
    }
    header.extend(["s2", "t_span", "K_descriptor"]);
    wtr.write_record(&header)?;
    for s in samples {
        let mut row = vec![format!("{:.16e}", s.y_norm())];
        row.extend(s.y.iter().map(|c| format!("{c:.16e}")));
        row.extend([format!("{:.16e}", s.s2), format!("{:.16e}", s.t_span), s.subdomain.descriptor()]);
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Columns `gamma_hat, E_hat, residual, y_min, y_max, n_samples`.
pub fn write_fit_csv<W: Write>(fits: &[ScalingFit], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["gamma_hat", "E_hat", "residual", "y_min", "y_max", "n_samples"])?;
    for f in fits {
        wtr.write_record([
            format!("{:.16e}", f.gamma_hat),
            format!("{:.16e}", f.e_hat),
            format!("{:.16e}", f.residual),
            format!("{:.16e}", f.y_min),
            format!("{:.16e}", f.y_max),
            f.n_samples.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;
    use std::sync::Arc;

    use super::*;
    use crate::dynamics::taylor_green;
    use crate::spectral::Grid;

    fn steady(f: &SpectralField, times: &[f64]) -> Vec<Snapshot> {
        times.iter().map(|&t| Snapshot { t, field: f.clone() }).collect()
    }

    fn shear(g: &Arc<Grid>) -> SpectralField {
        let mut v = SpectralField::zero_velocity(g.clone());
        v.set_mode(1, &[1, 0], Complex64::new(0.0, -0.5)).unwrap();
        v.set_mode(1, &[-1, 0], Complex64::new(0.0, 0.5)).unwrap();
        v
    }

    #[test]
    fn zero_shift_and_constant_field_give_zero() {
        let g = Arc::new(Grid::periodic(2, 16).unwrap());
        let snaps = steady(&taylor_green(&g), &[0.0, 0.5, 1.0]);
        let k = SubBox::full_torus(&g);
        assert_eq!(second_order_structure(&snaps, &k, &[0.0, 0.0]).unwrap().s2, 0.0);

        let mut c = SpectralField::zero_velocity(g.clone());
        c.set_mode(0, &[0, 0], Complex64::new(1.5, 0.0)).unwrap();
        c.set_mode(1, &[0, 0], Complex64::new(-0.5, 0.0)).unwrap();
        let snaps = steady(&c, &[0.0, 1.0]);
        for y in [[0.3, 0.0], [0.1, 1.7]] {
            assert_eq!(second_order_structure(&snaps, &k, &y).unwrap().s2, 0.0);
        }
    }

    #[test]
    fn full_period_shift_is_exactly_zero() {
        let g = Arc::new(Grid::periodic(2, 16).unwrap());
        let snaps = steady(&taylor_green(&g), &[0.0, 1.0]);
        let s = second_order_structure(&snaps, &SubBox::full_torus(&g), &[2.0 * PI, 0.0]).unwrap();
        assert_eq!(s.s2, 0.0);
    }

    #[test]
    fn sinusoid_closed_form() {
        // |sin(x+h) - sin x|^2 averages to 2 sin^2(h/2).
        let g = Arc::new(Grid::periodic(2, 32).unwrap());
        let snaps = steady(&shear(&g), &[0.0, 2.0]);
        let k = SubBox::full_torus(&g);
        let vol = 4.0 * PI * PI;
        for h in [0.1, 0.5, 1.3] {
            let s = second_order_structure(&snaps, &k, &[h, 0.0]).unwrap();
            let expected = 2.0 * (h / 2.0).sin().powi(2) * vol * 2.0;
            assert!((s.s2 - expected).abs() < 1e-12 * expected, "h = {h}");
        }
    }

    #[test]
    fn sub_box_margin_enforced() {
        let g = Arc::new(Grid::periodic(2, 32).unwrap());
        let k = SubBox::new(&g, vec![8, 8], vec![24, 24]).unwrap();
        assert!((k.margin(&g) - PI / 2.0).abs() < 1e-15);
        let snaps = steady(&taylor_green(&g), &[0.0, 1.0]);
        assert!(second_order_structure(&snaps, &k, &[1.0, 0.0]).is_ok());
        assert!(second_order_structure(&snaps, &k, &[1.5, 0.0]).is_err());
        assert!(second_order_structure(&snaps[..1], &k, &[0.5, 0.0]).is_err());
        assert!(SubBox::new(&g, vec![8, 8], vec![8, 24]).is_err());
    }

    #[test]
    fn mean_value_bound_on_sub_box() {
        // s2(y) <= |∇v|^2_{L2} |y|^2 T for the steady Taylor–Green field.
        let g = Arc::new(Grid::periodic(2, 32).unwrap());
        let tg = taylor_green(&g);
        let grad_sq: f64 = crate::spectral::gradient(&tg).to_physical().mean_square() * 4.0 * PI * PI;
        let snaps = steady(&tg, &[0.0, 1.0]);
        let k = SubBox::new(&g, vec![8, 8], vec![24, 24]).unwrap();
        for h in [0.1, 0.3, 0.6] {
            let s = second_order_structure(&snaps, &k, &[h, 0.0]).unwrap();
            assert!(s.s2 <= grad_sq * h * h + 1e-6);
        }
    }

    fn synthetic(ys: &[f64], law: impl Fn(f64) -> f64) -> Vec<StructureFunctionSample> {
        let g = Grid::periodic(2, 16).unwrap();
        ys.iter()
            .map(|&y| StructureFunctionSample {
                y: vec![y, 0.0],
                s2: law(y),
                t_span: 1.0,
                subdomain: SubBox::full_torus(&g),
            })
            .collect()
    }

    #[test]
    fn exact_power_law_recovered() {
        let samples = synthetic(&[0.1, 0.2, 0.3, 0.5, 0.8], |y| 4.0 * y * y);
        let f = fit_scaling_exponent(&samples, 0.0, 1.0).unwrap();
        assert!((f.gamma_hat - 1.0).abs() < 1e-12);
        assert!((f.e_hat - 4.0).abs() < 1e-11);
        assert!(f.residual < 1e-12);
        assert_eq!(f.n_samples, 5);
    }

    #[test]
    fn fit_rejects_zero_and_sparse_samples() {
        let samples = synthetic(&[0.1, 0.2, 0.3, 0.5], |y| if y < 0.15 { 0.0 } else { y });
        assert!(fit_scaling_exponent(&samples, 0.0, 1.0).is_err());
        let samples = synthetic(&[0.1, 0.2, 0.3], |y| y);
        assert!(fit_scaling_exponent(&samples, 0.0, 1.0).is_err());
    }

    #[test]
    fn csv_headers() {
        let samples = synthetic(&[0.1], |y| y);
        let mut buf = Vec::new();
        write_structure_csv(&samples, &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("|y|,yx,yy,s2,t_span,K_descriptor\n"));
    }
}
