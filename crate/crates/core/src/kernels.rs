//! Regularising kernels `K^alpha` as radial Fourier multipliers.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{sobolev_norm, SobolevIndex, SpectralField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    /// `1 / (1 + alpha^2 |xi|^2)`, the inverse of `Id - alpha^2 Δ`.
    Helmholtz,
    /// `exp(-alpha^2 |xi|^2 / 2)`.
    Gaussian,
    /// Indicator of `|xi| <= 1/alpha`.
    SharpCutoff,
    /// `1`; turns the Leray-alpha system into Euler.
    Identity,
}

impl KernelKind {
    pub fn name(self) -> &'static str {
        match self {
            KernelKind::Helmholtz => "helmholtz",
            KernelKind::Gaussian => "gaussian",
            KernelKind::SharpCutoff => "sharp_cutoff",
            KernelKind::Identity => "identity",
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A kernel family member: kind plus length scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawKernel", into = "RawKernel")]
pub struct KernelSpec {
    kind: KernelKind,
    alpha: f64,
}

#[derive(Serialize, Deserialize)]
struct RawKernel {
    kind: KernelKind,
    #[serde(default)]
    alpha: f64,
}

impl TryFrom<RawKernel> for KernelSpec {
    type Error = Error;
    fn try_from(r: RawKernel) -> Result<Self> {
        Self::new(r.kind, r.alpha)
    }
}

impl From<KernelSpec> for RawKernel {
    fn from(k: KernelSpec) -> Self {
        RawKernel { kind: k.kind, alpha: k.alpha }
    }
}

impl KernelSpec {
    pub fn new(kind: KernelKind, alpha: f64) -> Result<Self> {
        if kind != KernelKind::Identity && !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidParameter(format!("{kind} kernel needs alpha > 0, got {alpha}")));
        }
        Ok(Self { kind, alpha })
    }

    pub fn helmholtz(alpha: f64) -> Result<Self> {
        Self::new(KernelKind::Helmholtz, alpha)
    }

    pub fn identity() -> Self {
        Self { kind: KernelKind::Identity, alpha: 0.0 }
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Same kind at another length scale.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::new(self.kind, alpha)
    }

    /// Multiplier value at `|xi|^2 = k2`.
    pub fn multiplier(&self, k2: f64) -> f64 {
        let a2 = self.alpha * self.alpha;
        match self.kind {
            KernelKind::Helmholtz => 1.0 / (1.0 + a2 * k2),
            KernelKind::Gaussian => (-0.5 * a2 * k2).exp(),
            KernelKind::SharpCutoff => {
                if a2 * k2 <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            KernelKind::Identity => 1.0,
        }
    }
}

/// `u_hat(xi) = m_alpha(xi) v_hat(xi)`.
pub fn apply_kernel(k: &KernelSpec, v: &SpectralField) -> SpectralField {
    if k.kind == KernelKind::Identity {
        return v.clone();
    }
    let k2 = v.grid().k2();
    v.map_multiplier(|i| k.multiplier(k2[i]))
}

/// `(Id - alpha^2 Δ) u`, the inverse of the Helmholtz filter.
pub fn helmholtz_operator(alpha: f64, u: &SpectralField) -> SpectralField {
    let k2 = u.grid().k2();
    let a2 = alpha * alpha;
    u.map_multiplier(|i| 1.0 + a2 * k2[i])
}

/// Outcome of the three Helmholtz-filter norm inequalities
/// `|u|_s <= |v|_s`, `|u|_{s+1} <= |v|_s / alpha`, `|u|_{s+2} <= |v|_s / alpha^2`.
#[derive(Debug, Clone, Copy)]
pub struct FilterNormCheck {
    /// `lhs / rhs` for each inequality.
    pub ratios: [f64; 3],
    pub holds: [bool; 3],
}

impl FilterNormCheck {
    pub fn all(&self) -> bool {
        self.holds.iter().all(|&h| h)
    }
}

/// Relative slack allowed when comparing norms.
pub const NORM_SLACK: f64 = 1e-12;

pub fn check_lemma_norms(k: &KernelSpec, v: &SpectralField, s: SobolevIndex) -> Result<FilterNormCheck> {
    if k.kind != KernelKind::Helmholtz {
        return Err(Error::WrongKernel { expected: "helmholtz", got: k.kind.name() });
    }
    if !(k.alpha > 0.0 && k.alpha <= 1.0) {
        return Err(Error::InvalidParameter(format!("alpha must lie in (0, 1], got {}", k.alpha)));
    }
    let u = apply_kernel(k, v);
    let v_s = sobolev_norm(v, s);
    let lhs = [sobolev_norm(&u, s), sobolev_norm(&u, s.shifted(1.0)), sobolev_norm(&u, s.shifted(2.0))];
    let rhs = [v_s, v_s / k.alpha, v_s / (k.alpha * k.alpha)];
    let mut ratios = [0.0; 3];
    let mut holds = [true; 3];
    for i in 0..3 {
        holds[i] = lhs[i] <= rhs[i] * (1.0 + NORM_SLACK);
        ratios[i] = if rhs[i] > 0.0 { lhs[i] / rhs[i] } else { 0.0 };
    }
    Ok(FilterNormCheck { ratios, holds })
}

/// One `(alpha, l)` entry of a kernel audit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertificateRow {
    pub alpha: f64,
    pub l: f64,
    /// max over probes of `|K*phi|_{H^l} / |phi|_{H^l}`.
    pub bound_constant: f64,
    /// max over probes of `|K*phi - phi|_{H^s}`.
    pub approx_error: f64,
}

/// Numerical audit of the uniform-bound and approximate-identity hypotheses
/// over a finite probe set.
#[derive(Debug, Clone)]
pub struct KernelCertificate {
    pub kind: KernelKind,
    pub s: f64,
    pub rows: Vec<CertificateRow>,
    /// `(alpha, error)` along the decreasing alpha sequence.
    pub approx_identity_error: Vec<(f64, f64)>,
    /// Smoothing bound `|K*phi|_{H^{s+2}} <= alpha^{-2} |phi|_{H^s}`; only
    /// certified for the Helmholtz kernel, `None` otherwise.
    pub smoothing_bound: Option<bool>,
    pub passed: bool,
}

impl KernelCertificate {
    /// Sup ratio per tested `l`.
    pub fn bound_constants(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = Vec::new();
        for row in &self.rows {
            match out.iter_mut().find(|(l, _)| *l == row.l) {
                Some(entry) => entry.1 = entry.1.max(row.bound_constant),
                None => out.push((row.l, row.bound_constant)),
            }
        }
        out
    }

    /// CSV with columns `kind, alpha, l, bound_constant, approx_error_s`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["kind", "alpha", "l", "bound_constant", "approx_error_s"])?;
        for r in &self.rows {
            wtr.write_record([
                self.kind.name().to_string(),
                format!("{:.6e}", r.alpha),
                format!("{}", r.l),
                format!("{:.12e}", r.bound_constant),
                format!("{:.12e}", r.approx_error),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

pub fn certify_kernel(
    k: &KernelSpec,
    probes: &[SpectralField],
    l_list: &[SobolevIndex],
    alpha_seq: &[f64],
    s: SobolevIndex,
) -> Result<KernelCertificate> {
    if probes.is_empty() {
        return Err(Error::Empty("kernel certification needs at least one probe"));
    }
    if alpha_seq.is_empty() || alpha_seq.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter("alpha sequence must be nonempty and strictly decreasing".into()));
    }
    let mut rows = Vec::new();
    let mut approx = Vec::new();
    let mut smoothing = true;
    for &alpha in alpha_seq {
        let ka = if k.kind == KernelKind::Identity { *k } else { k.with_alpha(alpha)? };
        let filtered: Vec<SpectralField> = probes.iter().map(|p| apply_kernel(&ka, p)).collect();
        let err = probes
            .iter()
            .zip(&filtered)
            .map(|(p, f)| sobolev_norm(&f.sub(p).expect("same grid"), s))
            .fold(0.0, f64::max);
        approx.push((alpha, err));
        for &l in l_list {
            let ratio = probes
                .iter()
                .zip(&filtered)
                .map(|(p, f)| {
                    let den = sobolev_norm(p, l);
                    if den > 0.0 {
                        sobolev_norm(f, l) / den
                    } else {
                        0.0
                    }
                })
                .fold(0.0, f64::max);
            rows.push(CertificateRow { alpha, l: l.value(), bound_constant: ratio, approx_error: err });
        }
        if k.kind == KernelKind::Helmholtz {
            for (p, f) in probes.iter().zip(&filtered) {
                let lhs = sobolev_norm(f, s.shifted(2.0));
                let rhs = sobolev_norm(p, s) / (alpha * alpha);
                smoothing &= lhs <= rhs * (1.0 + NORM_SLACK);
            }
        }
    }
    let bounded = rows.iter().all(|r| r.bound_constant <= 1.0 + NORM_SLACK);
    let decreasing = approx.windows(2).all(|w| w[1].1 <= w[0].1 * (1.0 + NORM_SLACK));
    Ok(KernelCertificate {
        kind: k.kind,
        s: s.value(),
        rows,
        approx_identity_error: approx,
        smoothing_bound: (k.kind == KernelKind::Helmholtz).then_some(smoothing),
        passed: bounded && decreasing,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use rustfft::num_complex::Complex64;

    use super::*;
    use crate::spectral::{laplacian, sobolev, Grid};

    fn grid(n: usize) -> Arc<Grid> {
        Arc::new(Grid::periodic(2, n).unwrap())
    }

    fn unit_mode(g: &Arc<Grid>, k: &[i64]) -> SpectralField {
        let mut f = SpectralField::zeros(g.clone(), 1);
        f.set_mode(0, k, Complex64::new(1.0, 0.0)).unwrap();
        f
    }

    #[test]
    fn helmholtz_unit_mode() {
        let g = grid(8);
        let f = unit_mode(&g, &[1, 0]);
        let u = apply_kernel(&KernelSpec::helmholtz(1.0).unwrap(), &f);
        assert!((u.mode(0, &[1, 0]).unwrap() - 0.5).norm() < 1e-16);
    }

    #[test]
    fn helmholtz_diagonal_mode() {
        let g = grid(8);
        let f = unit_mode(&g, &[1, 1]);
        let u = apply_kernel(&KernelSpec::helmholtz(0.5).unwrap(), &f);
        assert!((u.mode(0, &[1, 1]).unwrap().re - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn identity_kernel_is_identity() {
        let g = grid(8);
        let f = unit_mode(&g, &[2, -1]);
        let u = apply_kernel(&KernelSpec::identity(), &f);
        assert_eq!(u.coeffs(), f.coeffs());
    }

    #[test]
    fn multipliers_in_unit_interval() {
        for kind in [KernelKind::Helmholtz, KernelKind::Gaussian, KernelKind::SharpCutoff, KernelKind::Identity] {
            let k = KernelSpec::new(kind, 0.3).unwrap();
            assert_eq!(k.multiplier(0.0), 1.0);
            for k2 in [0.5, 1.0, 10.0, 1e4] {
                let m = k.multiplier(k2);
                assert!((0.0..=1.0).contains(&m));
            }
        }
    }

    #[test]
    fn filter_norms_hand_example() {
        let g = grid(8);
        let f = unit_mode(&g, &[1, 0]);
        let chk = check_lemma_norms(&KernelSpec::helmholtz(1.0).unwrap(), &f, sobolev(0.0)).unwrap();
        assert!(chk.all());
        // |u|_{H^1} = sqrt(2)/2 against |v|_{L^2} = 1.
        assert!((chk.ratios[1] - 2f64.sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn filter_norm_check_rejects_other_kernels() {
        let g = grid(8);
        let f = unit_mode(&g, &[1, 0]);
        let k = KernelSpec::new(KernelKind::Gaussian, 0.5).unwrap();
        assert!(matches!(check_lemma_norms(&k, &f, sobolev(0.0)), Err(Error::WrongKernel { .. })));
        assert!(check_lemma_norms(&KernelSpec::helmholtz(2.0).unwrap(), &f, sobolev(0.0)).is_err());
    }

    #[test]
    fn inverse_recovers_field() {
        let g = grid(16);
        let mut f = SpectralField::zeros(g.clone(), 1);
        f.set_mode(0, &[3, -2], Complex64::new(0.3, 0.7)).unwrap();
        f.set_mode(0, &[5, 1], Complex64::new(-1.0, 0.2)).unwrap();
        let alpha = 0.37;
        let u = apply_kernel(&KernelSpec::helmholtz(alpha).unwrap(), &f);
        // u - alpha^2 Δu, built from the Laplacian rather than the multiplier.
        let back = u.add_scaled(&laplacian(&u), -alpha * alpha).unwrap();
        for (a, b) in back.coeffs().iter().zip(f.coeffs()) {
            assert!((a - b).norm() < 1e-14);
        }
        let direct = helmholtz_operator(alpha, &u);
        for (a, b) in direct.coeffs().iter().zip(f.coeffs()) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn certify_helmholtz_and_reject_empty() {
        let g = grid(16);
        let probe = unit_mode(&g, &[2, 1]);
        let k = KernelSpec::helmholtz(0.5).unwrap();
        let cert = certify_kernel(&k, &[probe.clone()], &[sobolev(0.0), sobolev(2.0)], &[0.5, 0.25, 0.1], sobolev(1.0)).unwrap();
        assert!(cert.passed);
        assert_eq!(cert.smoothing_bound, Some(true));
        assert!(cert.bound_constants().iter().all(|(_, c)| *c <= 1.0));
        assert!(certify_kernel(&k, &[], &[sobolev(0.0)], &[0.5], sobolev(1.0)).is_err());
        assert!(certify_kernel(&k, &[probe], &[sobolev(0.0)], &[0.1, 0.5], sobolev(1.0)).is_err());
    }

    #[test]
    fn sharp_cutoff_above_support_is_exact() {
        let g = grid(16);
        let mut probe = SpectralField::zeros(g.clone(), 1);
        probe.set_mode(0, &[2, 0], Complex64::new(1.0, 0.0)).unwrap();
        probe.set_mode(0, &[1, -1], Complex64::new(0.5, 0.5)).unwrap();
        let k = KernelSpec::new(KernelKind::SharpCutoff, 0.5).unwrap();
        let cert = certify_kernel(&k, &[probe], &[sobolev(1.0)], &[0.5, 0.25], sobolev(2.0)).unwrap();
        assert!(cert.approx_identity_error.iter().all(|(_, e)| *e == 0.0));
        assert!(cert.passed);
        assert_eq!(cert.smoothing_bound, None);
    }

    #[test]
    fn gaussian_single_mode_error() {
        let g = grid(8);
        let probe = unit_mode(&g, &[1, 0]);
        let k = KernelSpec::new(KernelKind::Gaussian, 1.0).unwrap();
        let cert = certify_kernel(&k, &[probe], &[sobolev(0.0)], &[1.0], sobolev(0.0)).unwrap();
        let expect = 1.0 - (-0.5f64).exp();
        assert!((cert.approx_identity_error[0].1 - expect).abs() < 1e-15);
        assert!((expect - 0.3935).abs() < 1e-4);
    }

    #[test]
    fn certificate_csv_columns() {
        let g = grid(8);
        let probe = unit_mode(&g, &[1, 0]);
        let k = KernelSpec::helmholtz(0.5).unwrap();
        let cert = certify_kernel(&k, &[probe], &[sobolev(0.0)], &[0.5], sobolev(0.0)).unwrap();
        let mut buf = Vec::new();
        cert.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("kind,alpha,l,bound_constant,approx_error_s\nhelmholtz,"));
    }

    #[test]
    fn kernel_spec_from_toml() {
        let k: KernelSpec = toml::from_str("kind = \"gaussian\"\nalpha = 0.2").unwrap();
        assert_eq!(k.kind(), KernelKind::Gaussian);
        let id: KernelSpec = toml::from_str("kind = \"identity\"").unwrap();
        assert_eq!(id.kind(), KernelKind::Identity);
        assert!(toml::from_str::<KernelSpec>("kind = \"helmholtz\"\nalpha = -1.0").is_err());
    }
}
