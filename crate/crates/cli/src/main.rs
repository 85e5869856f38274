use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use dihs::config::{expand_config_args, CONFIG_FLAG};
use dihs::harness::{self, ExperimentPreset, RunOptions, SweepNConfig};
use dihs::parallel::ThreadPool;
use dihs::{dmx, store, trace_csv};
use dihs_core::lti::{self, SimulationConfig};
use dihs_core::sketch::{SketchFamily, SketchSpec};
use dihs_core::solver::{self, SolveInputs, SolverConfig};

#[derive(Parser, Debug)]
#[command(name = "dihs", version, about = "Markov-parameter identification by distributed iterative Hessian sketching")]
#[command(args_override_self = true)]
struct Cli {
    /// key=value file whose keys mirror the long flags; flags win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write 0 for every wall_seconds entry so outputs are reproducible.
    #[arg(long, global = true)]
    no_timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw a random Schur-stable system and write A, B, C, D.
    Generate(GenerateArgs),
    /// Simulate a trajectory and write U, Y, G.
    Simulate(SimulateArgs),
    /// Exact least-squares solution of a dataset.
    Baseline(BaselineArgs),
    /// Run the sketched solver on a dataset.
    Solve(SolveArgs),
    /// Run a named experiment preset.
    Experiment(ExperimentArgs),
    /// Error against the number of samples, with a log-log slope fit.
    SweepN(SweepNArgs),
    /// Embedding distortion of a sketch on range(U).
    Diagnose(DiagnoseArgs),
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    p: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = lti::DEFAULT_SPECTRAL_TARGET)]
    spectral_target: f64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Directory written by `generate`.
    #[arg(long)]
    system: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    sigma_u: f64,
    #[arg(long, default_value_t = 0.1)]
    sigma_w: f64,
    #[arg(long, default_value_t = 0.1)]
    sigma_v: f64,
    /// Number of Markov parameter blocks.
    #[arg(long, visible_alias = "T")]
    horizon: usize,
    /// Number of regression rows.
    #[arg(long, visible_alias = "N")]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct BaselineArgs {
    /// Directory written by `simulate`.
    #[arg(long)]
    data: PathBuf,
    /// Defaults to `<data>/X_ls.dmx`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct SketchArgs {
    #[arg(long, value_name = "FAMILY")]
    sketch: SketchFamily,
    /// Sketch rows.
    #[arg(long)]
    s: usize,
    /// Nonzeros per column (sjlt, uniform+sjlt).
    #[arg(long)]
    l: Option<usize>,
    /// Rows of the uniform stage (uniform+sjlt).
    #[arg(long)]
    s1: Option<usize>,
}

impl SketchArgs {
    fn spec(&self) -> SketchSpec {
        let mut spec = SketchSpec::new(self.sketch, self.s);
        if let Some(l) = self.l {
            spec = spec.with_l(l);
        }
        if let Some(s1) = self.s1 {
            spec = spec.with_s1(s1);
        }
        spec
    }
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    sketch: SketchArgs,
    /// Number of workers r.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, default_value_t = 50)]
    max_iters: usize,
    #[arg(long, default_value_t = solver::DEFAULT_STOP_TOL)]
    stop_tol: f64,
    /// Master seed for the sketches.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Give every worker the same sketch seed.
    #[arg(long)]
    shared_seed: bool,
    /// Starting point (DMX1); zero by default.
    #[arg(long)]
    x0: Option<PathBuf>,
    /// Output directory for X_final.dmx and trace.csv.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    /// fig1-desk, fig2-desk, fig3-desk, fig1, fig2 or fig3.
    preset: String,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    repetitions: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_iters: Option<usize>,
}

#[derive(Args, Debug)]
struct SweepNArgs {
    #[arg(long, default_value_t = 6)]
    n: usize,
    #[arg(long, default_value_t = 4)]
    m: usize,
    #[arg(long, default_value_t = 5)]
    p: usize,
    #[arg(long, visible_alias = "T", default_value_t = 5)]
    horizon: usize,
    /// Comma-separated sample counts.
    #[arg(long, default_value = "2000,4000,8000,16000")]
    samples: String,
    #[arg(long, default_value_t = 5)]
    seeds: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    sigma_u: f64,
    #[arg(long, default_value_t = 0.1)]
    sigma_w: f64,
    #[arg(long, default_value_t = 0.1)]
    sigma_v: f64,
    #[arg(long, default_value = "uniform")]
    sketch: SketchFamily,
    /// Sketch rows; 4mT when omitted.
    #[arg(long)]
    s: Option<usize>,
    #[arg(long)]
    l: Option<usize>,
    #[arg(long)]
    s1: Option<usize>,
    #[arg(long, default_value_t = 5)]
    workers: usize,
    #[arg(long, default_value_t = 200)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-8)]
    stop_tol: f64,
    /// CSV of (N, error) points.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DiagnoseArgs {
    /// Input matrix U (DMX1).
    #[arg(long)]
    u: PathBuf,
    #[command(flatten)]
    sketch: SketchArgs,
    #[arg(long, default_value_t = 10)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    sigma_u: f64,
}

fn main() -> Result<()> {
    let argv = expand_config_args(std::env::args().collect(), &[CONFIG_FLAG, "--threads"])?;
    let cli = Cli::parse_from(argv);
    let opts = RunOptions {
        threads: cli.threads.unwrap_or_else(|| ThreadPool::available().threads()),
        timing: !cli.no_timing,
    };
    match cli.command {
        Command::Generate(a) => generate(a),
        Command::Simulate(a) => simulate(a),
        Command::Baseline(a) => baseline(a),
        Command::Solve(a) => solve(a, opts),
        Command::Experiment(a) => experiment(a, opts),
        Command::SweepN(a) => sweep_n(a, opts),
        Command::Diagnose(a) => diagnose(a),
    }
}

fn generate(a: GenerateArgs) -> Result<()> {
    let sys = lti::generate_system_with_target(a.n, a.m, a.p, a.seed, a.spectral_target)?;
    store::save_system(&a.out, &sys, a.seed, a.spectral_target)?;
    println!("spectral_radius={}", sys.spectral_radius());
    Ok(())
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let sys = store::load_system(&a.system).with_context(|| format!("loading {}", a.system.display()))?;
    let cfg = SimulationConfig {
        sigma_u: a.sigma_u,
        sigma_w: a.sigma_w,
        sigma_v: a.sigma_v,
        horizon: a.horizon,
        samples: a.samples,
        seed: a.seed,
    };
    let data = lti::simulate(&sys, &cfg)?;
    let g = lti::markov_params(&sys, a.horizon)?;
    store::save_dataset(&a.out, &data.u, &data.y, &g, &cfg)?;
    println!("U={}x{} Y={}x{}", data.u.rows(), data.u.cols(), data.y.rows(), data.y.cols());
    Ok(())
}

fn relative(err: f64, reference: f64) -> f64 {
    if reference > 0.0 {
        err / reference
    } else {
        err
    }
}

fn baseline(a: BaselineArgs) -> Result<()> {
    let data = store::load_dataset(&a.data)?;
    let x = solver::exact_ls(&data.u, &data.y)?;
    let out = a.out.unwrap_or_else(|| a.data.join("X_ls.dmx"));
    dmx::write(&out, &x)?;
    if let Some(g) = &data.truth {
        let gt = g.matrix().transpose();
        println!("rel_err_G={}", relative(x.frobenius_distance(&gt)?, gt.frobenius_norm()));
    }
    Ok(())
}

fn solve(a: SolveArgs, opts: RunOptions) -> Result<()> {
    let data = store::load_dataset(&a.data)?;
    let mut cfg = SolverConfig::new(a.sketch.spec(), a.workers, a.max_iters, a.seed);
    cfg.stop_tol = a.stop_tol;
    cfg.shared_seed = a.shared_seed;
    let x0 = a.x0.as_deref().map(dmx::read).transpose()?;
    let x_ls = solver::exact_ls(&data.u, &data.y)?;
    let inputs = SolveInputs {
        x0: x0.as_ref(),
        baseline: Some(&x_ls),
        truth: data.truth.as_ref(),
    };
    let out = harness::solve_with_options(&data.u, &data.y, &cfg, inputs, opts)?;
    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    dmx::write(a.out.join("X_final.dmx"), &out.x_final)?;
    trace_csv::write_trace(a.out.join("trace.csv"), &out.trace)?;
    if let Some(last) = out.trace.last() {
        println!(
            "iters={} rel_err_ls={} rel_err_G={} step_norm={}",
            last.iter,
            trace_csv::format_opt(last.rel_err_ls),
            trace_csv::format_opt(last.rel_err_g),
            last.step_norm
        );
    }
    Ok(())
}

fn experiment(a: ExperimentArgs, opts: RunOptions) -> Result<()> {
    let Some(mut preset) = ExperimentPreset::named(&a.preset) else {
        bail!("unknown preset {:?}; expected one of {:?}", a.preset, ExperimentPreset::NAMES);
    };
    if let Some(r) = a.repetitions {
        preset.repetitions = r;
    }
    if let Some(seed) = a.seed {
        preset.master_seed = seed;
    }
    if let Some(m) = a.max_iters {
        preset.max_iters = m;
    }
    let result = harness::run_preset(&preset, Some(&a.out), opts)?;
    for row in &result.rows {
        println!(
            "{} s={} r={} seed={} iters={} rel_err_ls={:.3e} rel_err_G={:.3e} contraction={}",
            row.family,
            row.s,
            row.r,
            row.seed,
            row.iters,
            row.rel_err_ls,
            row.rel_err_g,
            trace_csv::format_opt(row.contraction)
        );
    }
    Ok(())
}

fn parse_counts(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|t| t.trim().parse::<usize>().with_context(|| format!("bad sample count {t:?}")))
        .collect()
}

fn sweep_n(a: SweepNArgs, opts: RunOptions) -> Result<()> {
    let mut sketch = SketchSpec::new(a.sketch, a.s.unwrap_or(4 * a.m * a.horizon));
    if let Some(l) = a.l {
        sketch = sketch.with_l(l);
    }
    if let Some(s1) = a.s1 {
        sketch = sketch.with_s1(s1);
    }
    let cfg = SweepNConfig {
        n: a.n,
        m: a.m,
        p: a.p,
        horizon: a.horizon,
        sigma_u: a.sigma_u,
        sigma_w: a.sigma_w,
        sigma_v: a.sigma_v,
        sample_counts: parse_counts(&a.samples)?,
        seeds: a.seeds,
        master_seed: a.seed,
        sketch,
        workers: a.workers,
        max_iters: a.max_iters,
        stop_tol: a.stop_tol,
        ..SweepNConfig::standard()
    };
    let report = harness::sweep_n(&cfg, opts.threads)?;
    match &a.out {
        Some(path) => write_file(path, |f| report.write_csv_to(f))?,
        None => report.write_csv_to(std::io::stdout())?,
    }
    if report.noise_floor {
        println!("noise_floor=true (slope fit skipped)");
    }
    for (k, slope) in report.slopes.iter().enumerate() {
        println!("slope[{k}]={slope}");
    }
    println!("median_slope={}", trace_csv::format_opt(report.median_slope));
    Ok(())
}

fn write_file(path: &Path, write: impl FnOnce(std::fs::File) -> dihs::Result<()>) -> Result<()> {
    let file = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(write(file)?)
}

fn diagnose(a: DiagnoseArgs) -> Result<()> {
    let u = dmx::read(&a.u)?;
    let spec = a.sketch.spec().with_seed(a.seed);
    let report = harness::diagnose(&u, &spec, a.reps, a.sigma_u)?;
    for (k, rep) in report.reps.iter().enumerate() {
        match &rep.outcome {
            Ok(e) => println!(
                "rep={k} seed={} rho_hat={} min_sq_singular={} max_sq_singular={}",
                rep.seed, e.rho_hat, e.min_sq_singular, e.max_sq_singular
            ),
            Err(msg) => println!("rep={k} seed={} error={msg}", rep.seed),
        }
    }
    println!("pass_fraction={}", report.pass_fraction);
    let c = report.conditioning;
    println!(
        "input_conditioning lambda_min={} lambda_max={} lower_ok={} upper_ok={}",
        c.min_sq_singular, c.max_sq_singular, c.lower_ok, c.upper_ok
    );
    Ok(())
}
