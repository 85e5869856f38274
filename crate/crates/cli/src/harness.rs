//! Experiment presets, sweeps over the sample count and sketch diagnostics.

use std::path::Path;

use dihs_core::exec::NullClock;
use dihs_core::linalg::{gram, orthonormal_basis, Cholesky, DenseMatrix};
use dihs_core::lti::{
    generate_system_with_target, input_matrix_conditioning, markov_params, simulate,
    InputConditioning, MarkovParams, RegressionData, SimulationConfig,
};
use dihs_core::rng::derive_seed;
use dihs_core::sketch::{embedding_distortion, realize, EmbeddingReport, SketchFamily, SketchSpec};
use dihs_core::solver::{contraction_estimate, dihs_solve, exact_ls, DihsOutput, SolveInputs, SolverConfig};

use crate::parallel::{MonotonicClock, ThreadPool};
use crate::trace_csv::{format_opt, write_trace};
use crate::{Error, Result};

/// rel_err_G at or below this everywhere means the data carry no noise to fit.
pub const NOISE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPreset {
    pub name: String,
    pub n: usize,
    pub m: usize,
    pub p: usize,
    pub horizon: usize,
    pub samples: usize,
    pub sigma_u: f64,
    pub sigma_w: f64,
    pub sigma_v: f64,
    pub spectral_target: f64,
    pub variants: Vec<SketchSpec>,
    pub workers: Vec<usize>,
    pub repetitions: usize,
    pub master_seed: u64,
    pub max_iters: usize,
    pub stop_tol: f64,
}

impl ExperimentPreset {
    /// Benchmark preset: uniform, SJLT, Rademacher and uniform+SJLT with
    /// `s = s_ratio·mT` and `s1 = s1_ratio·s`, workers 5, 15 and 20.
    fn benchmark(name: &str, dims: [usize; 5], s_ratio: f64, s1_ratio: f64) -> Self {
        let [n, m, p, samples, horizon] = dims;
        let s = (s_ratio * (m * horizon) as f64).round() as usize;
        let s1 = (s1_ratio * s as f64).round() as usize;
        let variants = vec![
            SketchSpec::new(SketchFamily::Uniform, s),
            SketchSpec::new(SketchFamily::Sjlt, s),
            SketchSpec::new(SketchFamily::Rademacher, s),
            SketchSpec::new(SketchFamily::UniformThenSjlt, s).with_s1(s1),
        ];
        Self {
            name: name.to_string(),
            n,
            m,
            p,
            horizon,
            samples,
            sigma_u: 1.0,
            sigma_w: 0.1,
            sigma_v: 0.1,
            spectral_target: dihs_core::lti::DEFAULT_SPECTRAL_TARGET,
            variants,
            workers: vec![5, 15, 20],
            repetitions: 1,
            master_seed: 2021,
            max_iters: 100,
            stop_tol: dihs_core::solver::DEFAULT_STOP_TOL,
        }
    }

    pub const NAMES: [&'static str; 6] =
        ["fig1-desk", "fig2-desk", "fig3-desk", "fig1", "fig2", "fig3"];

    /// Desk presets keep the full-size `s/mT` and `s1/s` ratios
    /// (4 and 2, 3 and 1.5, 2 and 1.2).
    pub fn named(name: &str) -> Option<Self> {
        Some(match name {
            "fig1-desk" => Self::benchmark(name, [8, 4, 5, 3000, 6], 4.0, 2.0),
            "fig2-desk" => Self::benchmark(name, [10, 8, 7, 5000, 4], 3.0, 1.5),
            "fig3-desk" => Self::benchmark(name, [20, 15, 10, 6000, 4], 2.0, 1.2),
            "fig1" => Self::benchmark(name, [80, 60, 70, 29971, 30], 4.0, 2.0),
            "fig2" => Self::benchmark(name, [100, 80, 70, 49981, 20], 3.0, 1.5),
            "fig3" => Self::benchmark(name, [200, 150, 100, 59981, 20], 2.0, 1.2),
            _ => return None,
        })
    }

    pub fn regressors(&self) -> usize {
        self.m * self.horizon
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Format(format!("preset {}: {msg}", self.name)));
        if self.samples < self.regressors() {
            return bad("needs N >= mT");
        }
        if self.variants.is_empty() || self.workers.is_empty() || self.repetitions == 0 {
            return bad("needs at least one variant, worker count and repetition");
        }
        for spec in &self.variants {
            spec.validate(self.samples)?;
        }
        Ok(())
    }

    /// Seed of repetition `rep`; drives system, data and solver.
    pub fn repetition_seed(&self, rep: usize) -> u64 {
        derive_seed(self.master_seed, rep as u64, 0)
    }

    fn simulation(&self, seed: u64) -> SimulationConfig {
        SimulationConfig {
            sigma_u: self.sigma_u,
            sigma_w: self.sigma_w,
            sigma_v: self.sigma_v,
            horizon: self.horizon,
            samples: self.samples,
            seed,
        }
    }
}

/// Runtime knobs that do not change results.
#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub threads: usize,
    /// Record wall-clock seconds. Off makes every output file reproducible.
    pub timing: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            threads: 1,
            timing: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub preset: String,
    pub family: SketchFamily,
    pub s: usize,
    pub r: usize,
    pub seed: u64,
    pub rel_err_ls: f64,
    pub rel_err_g: f64,
    pub iters: usize,
    pub wall_seconds: f64,
    pub contraction: Option<f64>,
    pub converged: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

pub const AGGREGATE_HEADER: [&str; 11] = [
    "preset",
    "family",
    "s",
    "r",
    "seed",
    "rel_err_ls",
    "rel_err_G",
    "iters",
    "wall_seconds",
    "contraction",
    "converged",
];

impl SweepResult {
    pub fn write_csv_to<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(AGGREGATE_HEADER)?;
        for r in &self.rows {
            out.write_record([
                r.preset.clone(),
                r.family.to_string(),
                r.s.to_string(),
                r.r.to_string(),
                r.seed.to_string(),
                r.rel_err_ls.to_string(),
                r.rel_err_g.to_string(),
                r.iters.to_string(),
                r.wall_seconds.to_string(),
                format_opt(r.contraction),
                r.converged.to_string(),
            ])?;
        }
        out.flush().map_err(|e| Error::Format(e.to_string()))?;
        Ok(())
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv_to(file)
    }
}

/// Data shared by every cell of one repetition.
struct Repetition {
    seed: u64,
    data: RegressionData,
    truth: MarkovParams,
    baseline: DenseMatrix,
}

fn prepare(preset: &ExperimentPreset, rep: usize) -> Result<Repetition> {
    let seed = preset.repetition_seed(rep);
    let sys = generate_system_with_target(preset.n, preset.m, preset.p, seed, preset.spectral_target)?;
    let data = simulate(&sys, &preset.simulation(seed))?;
    let truth = markov_params(&sys, preset.horizon)?;
    let baseline = exact_ls(&data.u, &data.y)?;
    Ok(Repetition {
        seed,
        data,
        truth,
        baseline,
    })
}

fn solve_cell(
    preset: &ExperimentPreset,
    rep: &Repetition,
    spec: &SketchSpec,
    workers: usize,
    opts: RunOptions,
) -> Result<DihsOutput> {
    let mut cfg = SolverConfig::new(*spec, workers, preset.max_iters, rep.seed);
    cfg.stop_tol = preset.stop_tol;
    let inputs = SolveInputs {
        baseline: Some(&rep.baseline),
        truth: Some(&rep.truth),
        ..Default::default()
    };
    solve_with_options(&rep.data.u, &rep.data.y, &cfg, inputs, opts)
}

fn row_for(preset: &ExperimentPreset, rep: &Repetition, spec: &SketchSpec, r: usize, out: &DihsOutput) -> SweepRow {
    let last = out.trace.last().expect("at least one iteration");
    SweepRow {
        preset: preset.name.clone(),
        family: spec.family,
        s: spec.s,
        r,
        seed: rep.seed,
        rel_err_ls: last.rel_err_ls.unwrap_or(f64::NAN),
        rel_err_g: last.rel_err_g.unwrap_or(f64::NAN),
        iters: last.iter,
        wall_seconds: last.wall_seconds,
        contraction: contraction_estimate(&out.trace).ok(),
        converged: last.step_norm < preset.stop_tol,
    }
}

pub fn trace_file_name(spec: &SketchSpec, r: usize, seed: u64) -> String {
    format!("trace_{}_s{}_r{}_seed{}.csv", spec.family, spec.s, r, seed)
}

/// Runs every (variant × workers × repetition) cell. When `out_dir` is given,
/// writes one trace CSV per cell plus `aggregate.csv`.
pub fn run_preset(preset: &ExperimentPreset, out_dir: Option<&Path>, opts: RunOptions) -> Result<SweepResult> {
    preset.validate()?;
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut result = SweepResult::default();
    for rep_idx in 0..preset.repetitions {
        let rep = prepare(preset, rep_idx)
            .map_err(|e| e.context(format!("{} repetition {rep_idx}", preset.name)))?;
        for spec in &preset.variants {
            for &r in &preset.workers {
                let out = solve_cell(preset, &rep, spec, r, opts).map_err(|e| {
                    e.context(format!("{} {} s={} r={r} seed={}", preset.name, spec.family, spec.s, rep.seed))
                })?;
                if let Some(dir) = out_dir {
                    write_trace(dir.join(trace_file_name(spec, r, rep.seed)), &out.trace)?;
                }
                result.rows.push(row_for(preset, &rep, spec, r, &out));
            }
        }
    }
    if let Some(dir) = out_dir {
        result.write_csv(&dir.join("aggregate.csv"))?;
    }
    Ok(result)
}

/// Re-runs a single cell from scratch.
pub fn run_cell(
    preset: &ExperimentPreset,
    variant: usize,
    workers: usize,
    rep: usize,
    opts: RunOptions,
) -> Result<(SweepRow, DihsOutput)> {
    let spec = preset
        .variants
        .get(variant)
        .ok_or_else(|| Error::Format(format!("preset {} has no variant {variant}", preset.name)))?;
    let prepared = prepare(preset, rep)?;
    let out = solve_cell(preset, &prepared, spec, workers, opts)?;
    Ok((row_for(preset, &prepared, spec, workers, &out), out))
}

/// Ordinary least-squares slope of `ln err` against `ln N`. `None` with fewer
/// than two distinct `N`.
pub fn fit_loglog_slope(points: &[(usize, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let xs: Vec<f64> = points.iter().map(|(n, _)| (*n as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, e)| e.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Some(sxy / sxx)
}

fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    Some(if values.len() % 2 == 1 {
        values[mid]
    } else {
        0.5 * (values[mid - 1] + values[mid])
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepNConfig {
    pub n: usize,
    pub m: usize,
    pub p: usize,
    pub horizon: usize,
    pub sigma_u: f64,
    pub sigma_w: f64,
    pub sigma_v: f64,
    pub spectral_target: f64,
    pub sample_counts: Vec<usize>,
    pub seeds: usize,
    pub master_seed: u64,
    pub sketch: SketchSpec,
    pub workers: usize,
    pub max_iters: usize,
    pub stop_tol: f64,
}

impl SweepNConfig {
    /// `(n, m, p, T) = (6, 4, 5, 5)`, `N ∈ {2000, 4000, 8000, 16000}`, noise
    /// `σ_u = 1`, `σ_w = σ_v = 0.1`, uniform sketch `s = 4mT`, 5 workers.
    pub fn standard() -> Self {
        Self {
            n: 6,
            m: 4,
            p: 5,
            horizon: 5,
            sigma_u: 1.0,
            sigma_w: 0.1,
            sigma_v: 0.1,
            spectral_target: dihs_core::lti::DEFAULT_SPECTRAL_TARGET,
            sample_counts: vec![2000, 4000, 8000, 16000],
            seeds: 5,
            master_seed: 7,
            sketch: SketchSpec::new(SketchFamily::Uniform, 80),
            workers: 5,
            max_iters: 200,
            stop_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepNPoint {
    pub seed: u64,
    pub samples: usize,
    pub rel_err_g: f64,
    pub iters: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepNReport {
    pub points: Vec<SweepNPoint>,
    /// One fitted slope per seed (absent when the fit is skipped).
    pub slopes: Vec<f64>,
    pub median_slope: Option<f64>,
    /// Every error sat at the solver floor, so no slope was fitted.
    pub noise_floor: bool,
}

impl SweepNReport {
    pub fn write_csv_to<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["seed", "N", "log_N", "rel_err_G", "log_rel_err_G", "iters"])?;
        for p in &self.points {
            out.write_record([
                p.seed.to_string(),
                p.samples.to_string(),
                (p.samples as f64).ln().to_string(),
                p.rel_err_g.to_string(),
                p.rel_err_g.ln().to_string(),
                p.iters.to_string(),
            ])?;
        }
        out.flush().map_err(|e| Error::Format(e.to_string()))?;
        Ok(())
    }
}

/// For each seed: one system, fresh data per `N`, DIHS to convergence, then a
/// log-log slope fit of `rel_err_G` against `N`.
pub fn sweep_n(cfg: &SweepNConfig, threads: usize) -> Result<SweepNReport> {
    if let Some(&bad) = cfg.sample_counts.iter().find(|&&n| n < cfg.m * cfg.horizon) {
        return Err(Error::Format(format!("sample count {bad} is below mT")));
    }
    let pool = ThreadPool::new(threads);
    let mut points = Vec::new();
    let mut per_seed: Vec<Vec<(usize, f64)>> = Vec::new();
    for k in 0..cfg.seeds {
        let seed = derive_seed(cfg.master_seed, k as u64, 0);
        let sys = generate_system_with_target(cfg.n, cfg.m, cfg.p, seed, cfg.spectral_target)?;
        let truth = markov_params(&sys, cfg.horizon)?;
        let mut series = Vec::new();
        for (idx, &samples) in cfg.sample_counts.iter().enumerate() {
            let data_seed = derive_seed(seed, 1, samples as u64);
            let sim = SimulationConfig {
                sigma_u: cfg.sigma_u,
                sigma_w: cfg.sigma_w,
                sigma_v: cfg.sigma_v,
                horizon: cfg.horizon,
                samples,
                seed: data_seed,
            };
            let data = simulate(&sys, &sim)?;
            let mut solver = SolverConfig::new(cfg.sketch, cfg.workers, cfg.max_iters, derive_seed(seed, 2, idx as u64));
            solver.stop_tol = cfg.stop_tol;
            let inputs = SolveInputs {
                truth: Some(&truth),
                ..Default::default()
            };
            let out = dihs_solve(&data.u, &data.y, &solver, inputs, &pool, &NullClock)
                .map_err(|e| Error::from(e).context(format!("sweep-n seed={seed} N={samples}")))?;
            let last = out.trace.last().expect("at least one iteration");
            let rel_err_g = last.rel_err_g.expect("truth supplied");
            points.push(SweepNPoint {
                seed,
                samples,
                rel_err_g,
                iters: last.iter,
            });
            series.push((samples, rel_err_g));
        }
        per_seed.push(series);
    }
    let noise_floor = points.iter().all(|p| p.rel_err_g <= NOISE_FLOOR);
    let slopes: Vec<f64> = if noise_floor {
        Vec::new()
    } else {
        per_seed.iter().filter_map(|s| fit_loglog_slope(s)).collect()
    };
    let median_slope = median(&mut slopes.clone());
    Ok(SweepNReport {
        points,
        slopes,
        median_slope,
        noise_floor,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnoseRep {
    pub seed: u64,
    /// Distortion, or the reason the embedding could not be measured.
    pub outcome: std::result::Result<EmbeddingReport, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnoseReport {
    pub reps: Vec<DiagnoseRep>,
    /// Fraction of repetitions with `rho_hat <= 0.5`.
    pub pass_fraction: f64,
    pub conditioning: InputConditioning,
}

/// Embedding distortion of `reps` independent sketches on `range(U)`, plus
/// the input conditioning check. Undersized or invalid sketches are reported
/// per repetition instead of aborting.
pub fn diagnose(u: &DenseMatrix, spec: &SketchSpec, reps: usize, sigma_u: f64) -> Result<DiagnoseReport> {
    let q = orthonormal_basis(u)?;
    let conditioning = input_matrix_conditioning(u, sigma_u);
    let reps: Vec<DiagnoseRep> = (0..reps)
        .map(|k| {
            let seed = derive_seed(spec.seed, k as u64, 0);
            let outcome = realize(&spec.with_seed(seed), u.rows())
                .and_then(|op| {
                    let sq = op.apply(&q)?;
                    Cholesky::factor(&gram(&sq))?;
                    embedding_distortion(&op, &q)
                })
                .map_err(|e| e.to_string());
            DiagnoseRep { seed, outcome }
        })
        .collect();
    let passes = reps
        .iter()
        .filter(|r| matches!(&r.outcome, Ok(rep) if rep.rho_hat <= 0.5))
        .count();
    Ok(DiagnoseReport {
        pass_fraction: if reps.is_empty() { 0.0 } else { passes as f64 / reps.len() as f64 },
        reps,
        conditioning,
    })
}

/// Solves with a thread pool and, when timing is on, a wall clock.
pub fn solve_with_options(
    u: &DenseMatrix,
    y: &DenseMatrix,
    cfg: &SolverConfig,
    inputs: SolveInputs<'_>,
    opts: RunOptions,
) -> Result<DihsOutput> {
    let pool = ThreadPool::new(opts.threads);
    let out = if opts.timing {
        dihs_solve(u, y, cfg, inputs, &pool, &MonotonicClock::default())
    } else {
        dihs_solve(u, y, cfg, inputs, &pool, &NullClock)
    };
    Ok(out?)
}
