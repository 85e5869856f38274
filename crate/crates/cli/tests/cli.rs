use std::path::Path;
use std::process::{Command, Output};

use dihs::meta::KeyValues;
use dihs::{dmx, store};
use dihs_core::solver::exact_ls;

fn dihs(dir: &Path, args: &[&str]) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_dihs"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "dihs {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn prepare(dir: &Path) {
    dihs(dir, &["generate", "--n", "4", "--m", "2", "--p", "3", "--seed", "9", "--out", "sys"]);
    dihs(dir, &["simulate", "--system", "sys", "--T", "4", "--N", "600", "--seed", "3", "--out", "data"]);
}

#[test]
fn generate_and_simulate_write_their_layouts() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    prepare(dir);
    for f in ["A.dmx", "B.dmx", "C.dmx", "D.dmx", store::SYSTEM_META] {
        assert!(dir.join("sys").join(f).exists(), "{f}");
    }
    let sys_meta = KeyValues::read(dir.join("sys").join(store::SYSTEM_META)).unwrap();
    assert_eq!(sys_meta.get::<usize>("n").unwrap(), 4);
    assert_eq!(sys_meta.get::<f64>("spectral_target").unwrap(), 0.95);

    let data = store::load_dataset(&dir.join("data")).unwrap();
    assert_eq!(data.u.shape(), (600, 8));
    assert_eq!(data.y.shape(), (600, 3));
    let cfg = data.config.unwrap();
    assert_eq!((cfg.horizon, cfg.samples, cfg.seed), (4, 600, 3));
    assert_eq!(data.truth.unwrap().matrix().shape(), (3, 8));
}

#[test]
fn baseline_matches_library_solution() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    prepare(dir);
    let out = dihs(dir, &["baseline", "--data", "data"]);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("rel_err_G="));
    let written = dmx::read(dir.join("data/X_ls.dmx")).unwrap();
    let data = store::load_dataset(&dir.join("data")).unwrap();
    assert_eq!(written, exact_ls(&data.u, &data.y).unwrap());
}

#[test]
fn solve_writes_final_iterate_and_trace() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    prepare(dir);
    dihs(
        dir,
        &["--no-timing", "solve", "--data", "data", "--sketch", "sjlt", "--s", "64", "--l", "4", "--workers", "3", "--out", "run"],
    );
    assert_eq!(dmx::read(dir.join("run/X_final.dmx")).unwrap().shape(), (8, 3));
    let trace = std::fs::read_to_string(dir.join("run/trace.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(lines.next(), Some("iter,wall_seconds,rel_err_ls,rel_err_G,grad_norm,step_norm"));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!((first[0], first[1]), ("1", "0"));
}

#[test]
fn config_file_supplies_flags_and_command_line_wins() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    prepare(dir);
    std::fs::write(
        dir.join("run.cfg"),
        "# solver settings\ndata = data\nsketch = gaussian\ns = 32\nworkers = 2\nno_timing = true\nout = from_file\n",
    )
    .unwrap();
    dihs(dir, &["--config", "run.cfg", "solve"]);
    dihs(dir, &["--config", "run.cfg", "solve", "--s", "48", "--out", "from_flags"]);
    dihs(dir, &["--no-timing", "solve", "--data", "data", "--sketch", "gaussian", "--s", "48", "--workers", "2", "--out", "explicit"]);
    assert!(dir.join("from_file/trace.csv").exists());
    let read = |d: &str| std::fs::read(dir.join(d).join("trace.csv")).unwrap();
    assert_eq!(read("from_flags"), read("explicit"));
    assert_ne!(read("from_file"), read("explicit"));
}

#[test]
fn diagnose_prints_one_line_per_repetition() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    prepare(dir);
    let out = dihs(dir, &["diagnose", "--u", "data/U.dmx", "--sketch", "ros", "--s", "300", "--reps", "3"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("rep=")).count(), 3);
    assert!(text.contains("pass_fraction="));
    assert!(text.contains("input_conditioning"));
}

#[test]
fn unknown_preset_is_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_dihs"))
        .current_dir(tmp.path())
        .args(["experiment", "fig9", "--out", "x"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown preset"));
}

#[test]
fn sweep_n_writes_points() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let out = dihs(dir, &["sweep-n", "--samples", "500,1000,2000", "--seeds", "2", "--out", "sweep.csv"]);
    let csv = std::fs::read_to_string(dir.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3 * 2);
    assert!(String::from_utf8_lossy(&out.stdout).contains("median_slope="));
}
