//! Shared driver: one Euler reference plus one trajectory per (kernel, alpha).

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use rayon::prelude::*;

use super::config::ExperimentConfig;
use crate::dynamics::{cfl_limit, run, DtPolicy, InitialCondition, RunSettings, Trajectory};
use crate::error::Result;
use crate::kernels::{KernelKind, KernelSpec};
use crate::spectral::{sobolev_norm, SpectralField};

/// Bitwise hash of the coefficients.
pub fn field_hash(f: &SpectralField) -> u64 {
    let mut h = DefaultHasher::new();
    f.components().hash(&mut h);
    for z in f.coeffs() {
        z.re.to_bits().hash(&mut h);
        z.im.to_bits().hash(&mut h);
    }
    h.finish()
}

#[derive(Debug)]
pub struct Branch {
    pub kernel: KernelSpec,
    pub alpha: f64,
    pub outcome: std::result::Result<Trajectory, String>,
}

#[derive(Debug)]
pub struct Family {
    pub v0: SpectralField,
    pub dt: f64,
    pub reference: Arc<Trajectory>,
    pub reference_hash: u64,
    pub branches: Vec<Branch>,
}

impl Family {
    /// The reference still hashes to the value taken before the branches ran.
    pub fn reference_intact(&self) -> bool {
        field_hash(self.reference.final_state()) == self.reference_hash
    }
}

/// Fixed step shared by every member: the configured value, or the CFL limit
/// of `v0` under every kernel involved, shortened to divide `t_eval`.
pub fn shared_dt(cfg: &ExperimentConfig, v0: &SpectralField) -> Result<f64> {
    let raw = match cfg.base.dt_policy {
        DtPolicy::Fixed(dt) => dt,
        DtPolicy::Cfl(safety) => {
            let mut lim = cfl_limit(v0, &KernelSpec::identity(), safety);
            for &kind in &cfg.kernel_kinds {
                for &a in &cfg.alpha_list {
                    if let Ok(k) = KernelSpec::new(kind, a) {
                        lim = lim.min(cfl_limit(v0, &k, safety));
                    }
                }
            }
            lim
        }
    };
    let steps = (cfg.t_eval / raw).ceil().max(1.0);
    Ok(cfg.t_eval / steps)
}

fn settings(cfg: &ExperimentConfig, kernel: KernelSpec, dt: f64) -> RunSettings {
    let mut s = RunSettings::from_config(&cfg.base);
    s.kernel = kernel;
    s.dt_policy = DtPolicy::Fixed(dt);
    s.t_end = cfg.t_eval;
    s
}

/// Initial data of the alpha branch.
pub fn branch_initial(cfg: &ExperimentConfig, v0: &SpectralField, alpha: f64) -> Result<SpectralField> {
    if cfg.same_ic_for_all {
        return Ok(v0.clone());
    }
    let mut ic = cfg.base.ic.clone();
    if ic.kind == crate::dynamics::IcKind::TaylorGreen {
        ic = InitialCondition::random(4, 1.0, cfg.s, 0);
    }
    ic.seed = ic.seed.wrapping_add(1);
    ic.target_norm = Some(sobolev_norm(v0, cfg.s));
    ic.s_norm = cfg.s;
    let w = ic.generate(v0.grid())?;
    v0.add_scaled(&w, cfg.perturbation * alpha * alpha)
}

/// Runs the reference and every `(kind, alpha)` branch; branches run in parallel.
pub fn run_family(cfg: &ExperimentConfig, kinds: &[KernelKind]) -> Result<Family> {
    cfg.validate()?;
    let grid = cfg.base.grid.build()?;
    let v0 = cfg.base.ic.generate(&grid)?;
    let dt = shared_dt(cfg, &v0)?;
    let reference = Arc::new(run(&v0, &settings(cfg, KernelSpec::identity(), dt))?);
    let reference_hash = field_hash(reference.final_state());

    let mut jobs = Vec::new();
    for &kind in kinds {
        for &alpha in &cfg.alpha_list {
            jobs.push((KernelSpec::new(kind, alpha)?, alpha));
        }
    }
    let branches = jobs
        .par_iter()
        .map(|&(kernel, alpha)| {
            let outcome = branch_initial(cfg, &v0, alpha)
                .and_then(|init| run(&init, &settings(cfg, kernel, dt)))
                .map_err(|e| e.to_string());
            Branch { kernel, alpha, outcome }
        })
        .collect();
    Ok(Family { v0, dt, reference, reference_hash, branches })
}

/// `|v_dt(t_eval) - v_{dt/2}(t_eval)|` for the reference, per index in `cfg.s_prime_list`.
pub fn halving_floor(cfg: &ExperimentConfig, family: &Family) -> Result<Vec<f64>> {
    let fine = run(&family.v0, &settings(cfg, KernelSpec::identity(), 0.5 * family.dt))?;
    let diff = family.reference.final_state().sub(fine.final_state())?;
    Ok(cfg.s_prime_list.iter().map(|&sp| sobolev_norm(&diff, sp)).collect())
}
