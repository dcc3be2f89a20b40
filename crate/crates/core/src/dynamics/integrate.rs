use std::io::Write;

use super::config::{DtPolicy, SolverConfig};
use super::rhs::rhs_leray_alpha;
use crate::error::{Error, Result};
use crate::kernels::{apply_kernel, KernelSpec};
use crate::spectral::{sobolev_norm, SobolevIndex, SpectralField};

/// One classical RK4 step of `dv/dt = -P[(K*v . ∇) v]`.
///
/// A non-finite result is reported as [`Error::NonFinite`] with `t = NaN`;
/// callers that track time fill it in.
pub fn step(state: &SpectralField, dt: f64, k: &KernelSpec) -> Result<SpectralField> {
    if !(dt >= 0.0) {
        return Err(Error::InvalidParameter(format!("dt must be nonnegative, got {dt}")));
    }
    if dt == 0.0 {
        return Ok(state.clone());
    }
    let k1 = rhs_leray_alpha(state, k)?;
    let k2 = rhs_leray_alpha(&state.add_scaled(&k1, 0.5 * dt)?, k)?;
    let k3 = rhs_leray_alpha(&state.add_scaled(&k2, 0.5 * dt)?, k)?;
    let k4 = rhs_leray_alpha(&state.add_scaled(&k3, dt)?, k)?;
    let incr = k1.add_scaled(&k2, 2.0)?.add_scaled(&k3, 2.0)?.add_scaled(&k4, 1.0)?;
    let next = state.add_scaled(&incr, dt / 6.0)?;
    if !next.is_finite() {
        return Err(Error::NonFinite { t: f64::NAN });
    }
    Ok(next)
}

/// Largest advecting speed `max_x |K*v|`.
pub fn max_advecting_speed(state: &SpectralField, k: &KernelSpec) -> f64 {
    apply_kernel(k, state).to_physical().max_magnitude()
}

/// `safety * dx / max|u|` (infinite for a fluid at rest).
pub fn cfl_limit(state: &SpectralField, k: &KernelSpec, safety: f64) -> f64 {
    let speed = max_advecting_speed(state, k);
    if speed > 0.0 {
        safety * state.grid().dx() / speed
    } else {
        f64::INFINITY
    }
}

/// [`step`] preceded by the CFL check of the active policy.
pub fn checked_step(state: &SpectralField, dt: f64, k: &KernelSpec, policy: &DtPolicy) -> Result<SpectralField> {
    if let DtPolicy::Cfl(safety) = *policy {
        let limit = cfl_limit(state, k, safety);
        if !limit.is_finite() && limit.is_nan() || dt > limit * (1.0 + 1e-12) {
            return Err(Error::CflViolation { dt, limit });
        }
    }
    step(state, dt, k)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    /// `½ |v|²_{L²}` in the box-averaged normalisation.
    pub l2_energy: f64,
    pub hs_norms: Vec<(SobolevIndex, f64)>,
    /// Maximum advecting speed `|K*v|`, the quantity the CFL rule uses.
    pub max_velocity: f64,
    /// `max |xi . v_hat|`.
    pub divergence_residual: f64,
}

pub fn diagnostics(t: f64, v: &SpectralField, k: &KernelSpec, hs: &[SobolevIndex]) -> DiagnosticsRecord {
    let l2 = sobolev_norm(v, SobolevIndex::new(0.0).unwrap());
    DiagnosticsRecord {
        t,
        l2_energy: 0.5 * l2 * l2,
        hs_norms: hs.iter().map(|&s| (s, sobolev_norm(v, s))).collect(),
        max_velocity: max_advecting_speed(v, k),
        divergence_residual: v.divergence_residual(),
    }
}

/// CSV with columns `t, l2_energy, hs_norm_<s>..., max_velocity`.
pub fn write_diagnostics_csv<W: Write>(records: &[DiagnosticsRecord], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let mut header = vec!["t".to_string(), "l2_energy".to_string()];
    if let Some(first) = records.first() {
        header.extend(first.hs_norms.iter().map(|(s, _)| format!("hs_norm_{}", s.value())));
    }
    header.push("max_velocity".into());
    wtr.write_record(&header)?;
    for r in records {
        let mut row = vec![format!("{:.10e}", r.t), format!("{:.16e}", r.l2_energy)];
        row.extend(r.hs_norms.iter().map(|(_, v)| format!("{:.16e}", v)));
        row.push(format!("{:.16e}", r.max_velocity));
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub field: SpectralField,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub snapshots: Vec<Snapshot>,
    pub diagnostics: Vec<DiagnosticsRecord>,
    pub steps: usize,
}

impl Trajectory {
    pub fn final_state(&self) -> &SpectralField {
        &self.snapshots.last().expect("trajectory always holds the initial state").field
    }

    pub fn final_time(&self) -> f64 {
        self.snapshots.last().map(|s| s.t).unwrap_or(0.0)
    }
}

/// Time-stepping parameters for [`run`].
#[derive(Debug, Clone)]
pub struct RunSettings {
    pub kernel: KernelSpec,
    pub dt_policy: DtPolicy,
    pub t_end: f64,
    pub record_every: usize,
    pub hs_norms: Vec<SobolevIndex>,
    pub blowup_factor: f64,
    pub blowup_index: SobolevIndex,
}

impl RunSettings {
    pub fn from_config(cfg: &SolverConfig) -> Self {
        Self {
            kernel: cfg.kernel,
            dt_policy: cfg.dt_policy,
            t_end: cfg.t_end,
            record_every: cfg.record_every,
            hs_norms: cfg.hs_norms.clone(),
            blowup_factor: cfg.blowup_factor,
            blowup_index: cfg.blowup_index,
        }
    }
}

/// Integrates from `v0` to `settings.t_end`, recording a snapshot and a
/// diagnostics row at the start, every `record_every` steps, and at the end.
pub fn run(v0: &SpectralField, settings: &RunSettings) -> Result<Trajectory> {
    settings.dt_policy.validate()?;
    if !(settings.t_end >= 0.0) || settings.record_every == 0 {
        return Err(Error::Config("t_end must be nonnegative and record_every positive".into()));
    }
    let k = &settings.kernel;
    let threshold = settings.blowup_factor * sobolev_norm(v0, settings.blowup_index);
    let mut traj = Trajectory {
        snapshots: vec![Snapshot { t: 0.0, field: v0.clone() }],
        diagnostics: vec![diagnostics(0.0, v0, k, &settings.hs_norms)],
        steps: 0,
    };
    let mut state = v0.clone();
    let mut t = 0.0;

    // Fixed policy: uniform steps that land exactly on t_end.
    let fixed_steps = match settings.dt_policy {
        DtPolicy::Fixed(dt) => {
            let ratio = settings.t_end / dt;
            let n = if (ratio - ratio.round()).abs() < 1e-9 { ratio.round() } else { ratio.ceil() };
            Some(n as usize)
        }
        DtPolicy::Cfl(_) => None,
    };
    let end_tol = 1e-13 * settings.t_end.max(1.0);

    loop {
        let done = match fixed_steps {
            Some(n) => traj.steps >= n,
            None => t >= settings.t_end - end_tol,
        };
        if done {
            break;
        }
        let dt = match (settings.dt_policy, fixed_steps) {
            (_, Some(n)) => settings.t_end / n as f64,
            (DtPolicy::Cfl(safety), None) => {
                let limit = cfl_limit(&state, k, safety);
                if !(limit > 0.0) {
                    return Err(Error::CflViolation { dt: 0.0, limit });
                }
                limit.min(settings.t_end - t)
            }
            _ => unreachable!(),
        };
        state = step(&state, dt, k).map_err(|e| match e {
            Error::NonFinite { .. } => Error::NonFinite { t: t + dt },
            other => other,
        })?;
        traj.steps += 1;
        t = match fixed_steps {
            Some(n) => settings.t_end * traj.steps as f64 / n as f64,
            None => t + dt,
        };
        let norm = sobolev_norm(&state, settings.blowup_index);
        if norm > threshold {
            return Err(Error::BlowUp { t, norm, threshold });
        }
        let last = match fixed_steps {
            Some(n) => traj.steps >= n,
            None => t >= settings.t_end - end_tol,
        };
        if last || traj.steps % settings.record_every == 0 {
            traj.diagnostics.push(diagnostics(t, &state, k, &settings.hs_norms));
            traj.snapshots.push(Snapshot { t, field: state.clone() });
        }
    }
    Ok(traj)
}

/// Builds the grid and initial condition from `cfg` and integrates.
pub fn simulate(cfg: &SolverConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let grid = cfg.grid.build()?;
    let v0 = cfg.ic.generate(&grid)?;
    run(&v0, &RunSettings::from_config(cfg))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::dynamics::config::GridSpec;
    use crate::dynamics::initial::{taylor_green, InitialCondition};
    use crate::spectral::{sobolev, Grid};

    fn l2(f: &SpectralField) -> f64 {
        sobolev_norm(f, sobolev(0.0))
    }

    #[test]
    fn taylor_green_step_is_steady() {
        let g = Arc::new(Grid::periodic(2, 32).unwrap());
        let tg = taylor_green(&g);
        let k = KernelSpec::helmholtz(0.3).unwrap();
        let dt = 0.9 * cfl_limit(&tg, &k, 0.5);
        let next = checked_step(&tg, dt, &k, &DtPolicy::Cfl(0.5)).unwrap();
        assert!(l2(&next.sub(&tg).unwrap()) < 1e-10);
    }

    #[test]
    fn zero_dt_is_identity() {
        let g = Arc::new(Grid::periodic(2, 16).unwrap());
        let v = InitialCondition::random(3, 1.0, sobolev(0.0), 2).generate(&g).unwrap();
        let next = step(&v, 0.0, &KernelSpec::identity()).unwrap();
        assert_eq!(next.coeffs(), v.coeffs());
    }

    #[test]
    fn one_step_energy_drift_small() {
        let g = Arc::new(Grid::periodic(2, 64).unwrap());
        let v = InitialCondition::random(4, 1.0, sobolev(0.0), 21).generate(&g).unwrap();
        let next = step(&v, 1e-3, &KernelSpec::helmholtz(0.1).unwrap()).unwrap();
        let e0 = l2(&v).powi(2);
        assert!(((l2(&next).powi(2) - e0) / e0).abs() <= 1e-8);
    }

    #[test]
    fn cfl_violation_detected() {
        let g = Arc::new(Grid::periodic(2, 16).unwrap());
        let v = InitialCondition::random(3, 1.0, sobolev(0.0), 2).generate(&g).unwrap();
        let k = KernelSpec::identity();
        let limit = cfl_limit(&v, &k, 0.5);
        assert!(matches!(
            checked_step(&v, 2.0 * limit, &k, &DtPolicy::Cfl(0.5)),
            Err(Error::CflViolation { .. })
        ));
        assert!(checked_step(&v, 2.0 * limit, &k, &DtPolicy::Fixed(1.0)).is_ok());
    }

    #[test]
    fn blow_up_reported_as_error() {
        let g = Arc::new(Grid::periodic(2, 16).unwrap());
        let mut v = InitialCondition::random(3, 1.0, sobolev(0.0), 2).generate(&g).unwrap();
        v.coeffs_mut()[g.mode_index(&[1, 2]).unwrap()] = rustfft::num_complex::Complex64::new(f64::NAN, 0.0);
        v.set_divfree(true);
        let err = step(&v, 0.1, &KernelSpec::identity());
        assert!(err.is_err());
    }

    fn config(ic: InitialCondition, kernel: KernelSpec, t_end: f64) -> SolverConfig {
        SolverConfig {
            grid: GridSpec { dim: 2, n: 32, length: 2.0 * std::f64::consts::PI },
            kernel,
            dt_policy: DtPolicy::Cfl(0.5),
            t_end,
            ic,
            record_every: 4,
            hs_norms: vec![sobolev(1.0)],
            blowup_factor: 50.0,
            blowup_index: sobolev(3.0),
        }
    }

    #[test]
    fn zero_end_time_keeps_initial_state() {
        let traj = simulate(&config(InitialCondition::taylor_green(), KernelSpec::identity(), 0.0)).unwrap();
        assert_eq!(traj.snapshots.len(), 1);
        assert_eq!(traj.steps, 0);
    }

    #[test]
    fn simulate_hits_end_time_and_records() {
        let cfg = config(InitialCondition::random(3, 1.0, sobolev(0.0), 9), KernelSpec::helmholtz(0.2).unwrap(), 0.3);
        let traj = simulate(&cfg).unwrap();
        assert!((traj.final_time() - 0.3).abs() < 1e-12);
        assert!(traj.diagnostics.windows(2).all(|w| w[1].t >= w[0].t));
        assert_eq!(traj.snapshots.len(), traj.diagnostics.len());
        let mut buf = Vec::new();
        write_diagnostics_csv(&traj.diagnostics, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,l2_energy,hs_norm_1,max_velocity\n"));
    }

    #[test]
    fn blow_up_threshold_aborts() {
        let mut cfg = config(InitialCondition::random(3, 1.0, sobolev(0.0), 9), KernelSpec::identity(), 2.0);
        // A threshold barely above the initial norm trips on the first
        // step that moves energy to higher modes.
        cfg.blowup_factor = 1.0 + 1e-9;
        assert!(matches!(simulate(&cfg), Err(Error::BlowUp { .. })));
    }
}
