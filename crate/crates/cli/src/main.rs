use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use leray_core::analysis::frequency_cutoff;
use leray_core::dynamics::{simulate, write_diagnostics_csv, SolverConfig};
use leray_core::experiments::{
    emit_report, run_corollary_experiment, run_rate_experiment, run_structure_experiment, ExperimentConfig,
    ExperimentResults,
};
use leray_core::littlewood_paley::{besov_norm, write_block_csv, BesovR};
use leray_core::spectral::{load_checkpoint, save_checkpoint, sobolev, SpectralField};

/// Worker threads for alpha sweeps and structure-function evaluation.
const WORKERS_ENV: &str = "LERAY_WORKERS";

#[derive(Parser)]
#[command(name = "leray", version, about = "Pseudospectral Euler / inviscid Leray-alpha solver and verification harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Checkpoints {
    None,
    Final,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one trajectory; writes diagnostics.csv and checkpoints.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "final")]
        checkpoints: Checkpoints,
    },
    /// Rate of convergence of the alpha family to the Euler reference.
    Converge {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Error against the kernel driver for each configured kernel.
    Corollary {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Structure functions and the H^-1 surrogate across the alpha family.
    Structure {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Re-emit CSV tables and SVG plots from saved results.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sharp spectral cutoff at 1/delta with its norm budget.
    Mollify {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 3.0)]
        s: f64,
        /// Indices l in [0, s] for the approximation estimate.
        #[arg(long, value_delimiter = ',', default_values_t = [0.0, 1.0, 2.0])]
        l: Vec<f64>,
        /// Checkpoint for the mollified field.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Littlewood–Paley block energies as CSV (stdout unless --out is given).
    LpAnalyze {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 0.0)]
        sigma: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Field checkpoint.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Solver config whose initial condition is used.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Source {
    fn load(&self) -> Result<SpectralField> {
        if let Some(p) = &self.input {
            return load_checkpoint(p).with_context(|| format!("reading {}", p.display()));
        }
        let p = self.config.as_ref().expect("clap enforces one source");
        let cfg = SolverConfig::load(p).with_context(|| format!("loading {}", p.display()))?;
        Ok(cfg.ic.generate(&cfg.grid.build()?)?)
    }
}

fn init_workers() -> Result<()> {
    if let Ok(text) = std::env::var(WORKERS_ENV) {
        let n: usize = text.trim().parse().with_context(|| format!("{WORKERS_ENV} must be a positive integer"))?;
        if n == 0 {
            bail!("{WORKERS_ENV} must be a positive integer");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn verdict(name: &str, ok: bool) -> bool {
    println!("{} {name}", if ok { "PASS" } else { "FAIL" });
    ok
}

fn finish(results: ExperimentResults, out: &Path) -> Result<bool> {
    let saved = results.save(out)?;
    let files = emit_report(std::slice::from_ref(&results), out)?;
    println!("results: {}", saved.display());
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(results.passed())
}

fn run_simulate(config: &Path, out: &Path, checkpoints: Checkpoints) -> Result<bool> {
    let cfg = SolverConfig::load(config).with_context(|| format!("loading {}", config.display()))?;
    let traj = simulate(&cfg)?;
    fs::create_dir_all(out)?;
    write_diagnostics_csv(&traj.diagnostics, BufWriter::new(File::create(out.join("diagnostics.csv"))?))?;
    let snaps: Vec<_> = match checkpoints {
        Checkpoints::None => vec![],
        Checkpoints::Final => traj.snapshots.last().into_iter().collect(),
        Checkpoints::All => traj.snapshots.iter().collect(),
    };
    for (i, s) in snaps.iter().enumerate() {
        let name = match checkpoints {
            Checkpoints::Final => "final.lasf".to_string(),
            _ => format!("snapshot_{i:05}.lasf"),
        };
        save_checkpoint(&s.field, &out.join(name))?;
    }
    let e0 = traj.diagnostics[0].l2_energy;
    let last = traj.diagnostics.last().unwrap();
    let div = traj.diagnostics.iter().map(|d| d.divergence_residual).fold(0.0, f64::max);
    println!(
        "t = {:.6}, {} steps, energy drift {:.3e}, max divergence residual {:.3e}",
        last.t,
        traj.steps,
        if e0 > 0.0 { (last.l2_energy - e0) / e0 } else { 0.0 },
        div
    );
    Ok(verdict("divergence-free", div <= 1e-10))
}

fn run_mollify(field: &SpectralField, delta: f64, s: f64, ls: &[f64], out: Option<&Path>) -> Result<bool> {
    let r = frequency_cutoff(field, delta, sobolev(s), ls)?;
    let b = &r.norm_budget;
    println!("stability     {:.6e} <= {:.6e}", b.stability.lhs, b.stability.rhs);
    println!("smoothing     {:.6e} <= {:.6e}", b.smoothing.lhs, b.smoothing.rhs);
    println!("smoothing (sharp constant) {:.6e} <= {:.6e}", b.smoothing_sharp.lhs, b.smoothing_sharp.rhs);
    for (l, x) in &b.approximation {
        println!("approx l={l}  {:.6e} <= {:.6e}", x.lhs, x.rhs);
    }
    if let Some(p) = out {
        save_checkpoint(&r.field, p)?;
    }
    Ok(verdict("norm budget", b.holds()))
}

fn run_lp(field: &SpectralField, sigma: f64, out: Option<&Path>) -> Result<bool> {
    match out {
        Some(p) => write_block_csv(field, sobolev(sigma), BufWriter::new(File::create(p)?))?,
        None => write_block_csv(field, sobolev(sigma), io::stdout().lock())?,
    }
    let s = sobolev(sigma);
    let norms = [BesovR::One, BesovR::Two, BesovR::Infinity].map(|r| besov_norm(field, s, r));
    eprintln!("besov norms (r = 1, 2, inf): {:.6e} {:.6e} {:.6e}", norms[0], norms[1], norms[2]);
    io::stdout().flush()?;
    Ok(true)
}

fn dispatch(cli: Cli) -> Result<bool> {
    init_workers()?;
    match cli.command {
        Command::Simulate { config, out, checkpoints } => run_simulate(&config, &out, checkpoints),
        Command::Converge { config, out } => {
            let report = run_rate_experiment(&ExperimentConfig::load(&config)?)?;
            for r in &report.results {
                println!(
                    "{} s'={}: iota_hat {} predicted {} monotone {} passed {}",
                    r.kernel,
                    r.s_prime.value(),
                    r.iota_hat.map_or("-".into(), |x| format!("{x:.4}")),
                    r.iota_predicted,
                    r.monotone,
                    r.passed
                );
            }
            let ok = finish(ExperimentResults::Rate(report), &out)?;
            Ok(verdict("converge", ok))
        }
        Command::Corollary { config, out } => {
            let report = run_corollary_experiment(&ExperimentConfig::load(&config)?)?;
            for g in &report.groups {
                println!(
                    "{} s'={}: spread {:.3} driver slope {} passed {}",
                    g.kernel,
                    g.s_prime.value(),
                    g.spread,
                    g.driver_slope.map_or("-".into(), |x| format!("{x:.4}")),
                    g.passed()
                );
            }
            println!("ceiling {:.6e}", report.ceiling);
            let ok = finish(ExperimentResults::Corollary(report), &out)?;
            Ok(verdict("corollary", ok))
        }
        Command::Structure { config, out } => {
            let report = run_structure_experiment(&ExperimentConfig::load(&config)?)?;
            for f in &report.fits {
                match &f.fit {
                    Some(x) => println!("alpha {}: gamma_hat {:.4} residual {:.2e}", f.alpha, x.gamma_hat, x.residual),
                    None => println!("alpha {}: no fit ({})", f.alpha, f.note.as_deref().unwrap_or("")),
                }
            }
            println!("surrogate spread {:.4}", report.surrogate_spread);
            let ok = finish(ExperimentResults::Structure(report), &out)?;
            Ok(verdict("structure", ok))
        }
        Command::Report { input, out } => {
            let results = ExperimentResults::load_dir(&input)?;
            for f in emit_report(&results, &out)? {
                println!("wrote {}", f.display());
            }
            Ok(verdict("report", results.iter().all(|r| r.passed())))
        }
        Command::Mollify { source, delta, s, l, out } => run_mollify(&source.load()?, delta, s, &l, out.as_deref()),
        Command::LpAnalyze { source, sigma, out } => run_lp(&source.load()?, sigma, out.as_deref()),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
