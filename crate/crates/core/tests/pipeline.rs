//! End-to-end use of the public API: configs, runs, checkpoints and analysis.

use leray_core::analysis::frequency_cutoff;
use leray_core::dynamics::{run, simulate, DtPolicy, RunSettings, SolverConfig};
use leray_core::littlewood_paley::decompose;
use leray_core::spectral::{read_checkpoint, sobolev, sobolev_norm, write_checkpoint};

const CONFIG: &str = r#"
t_end = 0.4
dt_policy = { fixed = 0.01 }
record_every = 10

[grid]
dim = 2
n = 32

[kernel]
kind = "helmholtz"
alpha = 0.2

[ic]
kind = "random_band_limited"
band = 5
target_norm = 1.0
s_norm = 1.0
seed = 11
"#;

#[test]
fn restart_from_checkpoint_reproduces_the_run() {
    let cfg = SolverConfig::from_toml_str(CONFIG).unwrap();
    let full = simulate(&cfg).unwrap();
    assert_eq!(full.steps, 40);

    let half = RunSettings { t_end: 0.2, ..RunSettings::from_config(&cfg) };
    let first = run(&cfg.ic.generate(&cfg.grid.build().unwrap()).unwrap(), &half).unwrap();
    let mut bytes = Vec::new();
    write_checkpoint(first.final_state(), &mut bytes).unwrap();
    let resumed = read_checkpoint(bytes.as_slice()).unwrap();
    let second = run(&resumed, &half).unwrap();

    // autonomous system, identical step sequence
    assert_eq!(second.final_state().coeffs(), full.final_state().coeffs());
}

#[test]
fn energy_and_incompressibility_along_a_run() {
    let mut cfg = SolverConfig::from_toml_str(CONFIG).unwrap();
    cfg.dt_policy = DtPolicy::Cfl(0.4);
    let traj = simulate(&cfg).unwrap();
    assert!((traj.final_time() - 0.4).abs() < 1e-12);
    let e0 = traj.diagnostics[0].l2_energy;
    for d in &traj.diagnostics {
        assert!(d.divergence_residual < 1e-12);
        // v is not the conserved quantity for alpha > 0, but it stays close
        assert!((d.l2_energy / e0 - 1.0).abs() < 0.05, "{}", d.l2_energy / e0);
    }
}

#[test]
fn analysis_of_a_final_state() {
    let cfg = SolverConfig::from_toml_str(CONFIG).unwrap();
    let v = simulate(&cfg).unwrap().final_state().clone();

    let dec = decompose(&v);
    assert!(dec.partition_residual() < 1e-14);
    let back = dec.sum().sub(&v).unwrap();
    assert!(sobolev_norm(&back, sobolev(0.0)) < 1e-13 * sobolev_norm(&v, sobolev(0.0)));

    let m = frequency_cutoff(&v, 0.25, sobolev(3.0), &[0.0, 1.0, 2.0]).unwrap();
    assert!(m.norm_budget.holds());
    assert!(m.field.is_divfree());
}
