use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const SIM: &str = r#"
t_end = 0.2
dt_policy = { cfl = 0.5 }
record_every = 2

[grid]
dim = 2
n = 32

[kernel]
kind = "helmholtz"
alpha = 0.1

[ic]
kind = "random_band_limited"
band = 4
target_norm = 1.0
seed = 5
"#;

const RATE: &str = r#"
alpha_list = [0.1, 0.05, 0.025]
s = 4.0
s_prime_list = [0.0]
t_eval = 0.1

[checks]
slope_tol = 0.4

[base]
t_end = 0.1
dt_policy = { cfl = 0.5 }

[base.grid]
dim = 2
n = 64

[base.kernel]
kind = "identity"

[base.ic]
kind = "random_band_limited"
band = 4
target_norm = 1.0
s_norm = 1.0
seed = 7
"#;

fn leray(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_leray")).args(args).current_dir(dir).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn setup(name: &str, text: &str) -> TempDir {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join(name), text).unwrap();
    dir
}

#[test]
fn simulate_writes_diagnostics_and_checkpoint() {
    let dir = setup("sim.toml", SIM);
    let o = leray(&["simulate", "--config", "sim.toml", "--out", "run"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("run/diagnostics.csv")).unwrap();
    assert!(csv.starts_with("t,l2_energy,hs_norm_1,hs_norm_2,max_velocity"));
    let bytes = fs::read(dir.path().join("run/final.lasf")).unwrap();
    assert_eq!(&bytes[..4], b"LASF");
    let word = |i: usize| u32::from_le_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().unwrap());
    assert_eq!((word(1), word(2), word(3)), (2, 32, 2));
    assert_eq!(bytes.len(), 20 + 2 * 32 * 32 * 16);
}

#[test]
fn all_checkpoints_on_request() {
    let dir = setup("sim.toml", SIM);
    let o = leray(&["simulate", "--config", "sim.toml", "--out", "run", "--checkpoints", "all"], dir.path());
    assert_eq!(code(&o), 0);
    let n = fs::read_dir(dir.path().join("run")).unwrap().filter(|e| {
        e.as_ref().unwrap().path().extension().is_some_and(|x| x == "lasf")
    });
    assert!(n.count() >= 2);
}

#[test]
fn mollify_and_lp_analyze_read_checkpoints() {
    let dir = setup("sim.toml", SIM);
    assert_eq!(code(&leray(&["simulate", "--config", "sim.toml", "--out", "run"], dir.path())), 0);
    let o = leray(
        &["mollify", "--input", "run/final.lasf", "--delta", "0.25", "--s", "3", "--l", "0,1", "--out", "m.lasf"],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS norm budget"));
    assert!(dir.path().join("m.lasf").exists());

    let o = leray(&["lp-analyze", "--input", "m.lasf", "--sigma", "1"], dir.path());
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("j,block_l2,scaled_block_l2"));
    // cutoff at |xi| <= 4 leaves nothing in blocks j >= 3
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        let j: i32 = cols[0].parse().unwrap();
        let b: f64 = cols[1].parse().unwrap();
        if j >= 3 {
            assert_eq!(b, 0.0, "{line}");
        }
    }
}

#[test]
fn lp_analyze_from_config_to_file() {
    let dir = setup("sim.toml", SIM);
    let o = leray(&["lp-analyze", "--config", "sim.toml", "--out", "lp.csv"], dir.path());
    assert_eq!(code(&o), 0);
    assert!(fs::read_to_string(dir.path().join("lp.csv")).unwrap().starts_with("j,"));
}

#[test]
fn converge_then_report() {
    let dir = setup("rate.toml", RATE);
    let o = leray(&["converge", "--config", "rate.toml", "--out", "res"], dir.path());
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(dir.path().join("res/rate_results.toml").exists());
    assert!(dir.path().join("res/rate_helmholtz.csv").exists());

    let o = leray(&["report", "--in", "res", "--out", "again"], dir.path());
    assert_eq!(code(&o), 0);
    for f in ["rate_helmholtz.csv", "rate_helmholtz_sprime_0.svg"] {
        assert_eq!(
            fs::read(dir.path().join("res").join(f)).unwrap(),
            fs::read(dir.path().join("again").join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn failed_assertion_exits_one() {
    // a negative tolerance demands a slope above the prediction
    let dir = setup("rate.toml", &RATE.replace("slope_tol = 0.4", "slope_tol = -1.0"));
    let o = leray(&["converge", "--config", "rate.toml", "--out", "res"], dir.path());
    assert_eq!(code(&o), 1, "{}", stdout(&o));
    assert!(stdout(&o).contains("FAIL converge"));
}

#[test]
fn errors_exit_two() {
    let dir = setup("bad.toml", &SIM.replace("n = 32", "n = 0"));
    assert_eq!(code(&leray(&["simulate", "--config", "bad.toml"], dir.path())), 2);
    assert_eq!(code(&leray(&["simulate", "--config", "missing.toml"], dir.path())), 2);
    assert_eq!(code(&leray(&["report", "--in", ".", "--out", "r"], dir.path())), 2);
    let o = Command::new(env!("CARGO_BIN_EXE_leray"))
        .args(["lp-analyze", "--config", "bad.toml"])
        .env("LERAY_WORKERS", "zero")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn worker_count_does_not_change_results() {
    let dir = setup("rate.toml", RATE);
    let run = |workers: &str, out: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_leray"))
            .args(["converge", "--config", "rate.toml", "--out", out])
            .env("LERAY_WORKERS", workers)
            .current_dir(dir.path())
            .output()
            .unwrap();
        assert_eq!(code(&o), 0);
        fs::read_to_string(dir.path().join(out).join("rate_results.toml")).unwrap()
    };
    assert_eq!(run("1", "a"), run("3", "b"));
}
