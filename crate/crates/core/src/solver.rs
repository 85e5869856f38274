//! Least-squares solvers for `min_X ‖Y − U X‖_F²`.
//!
//! [`dihs_solve`] runs the distributed iterative Hessian sketch: per iteration
//! the coordinator computes the gradient `g_t = Uᵀ(U X_t − Y)` once, each of
//! `r` workers draws a fresh sketch and returns
//! `X_t − (UᵀS_iᵀS_iU)⁻¹ g_t`, and the coordinator averages the `r` results.

use alloc::vec::Vec;

use crate::exec::{Clock, Executor};
use crate::linalg::{gram, qr_least_squares, Cholesky, DenseMatrix};
use crate::lti::MarkovParams;
use crate::rng::{derive_seed, splitmix64};
use crate::sketch::{realize, sketched_hessian, SketchOperator, SketchSpec};
use crate::{Error, Result};

pub const DEFAULT_STOP_TOL: f64 = 1e-3;
/// Errors at or below this are treated as converged by [`contraction_estimate`].
pub const CONTRACTION_FLOOR: f64 = 1e-12;
const RESAMPLE_SALT: u64 = 0x5EED_5A17_D1A6_0001;

/// `X^LS` through Householder QR. `Ĝ` is its transpose.
pub fn exact_ls(u: &DenseMatrix, y: &DenseMatrix) -> Result<DenseMatrix> {
    qr_least_squares(u, y)
}

/// `Uᵀ(U X − Y)`.
pub fn gradient(u: &DenseMatrix, y: &DenseMatrix, x: &DenseMatrix) -> Result<DenseMatrix> {
    let resid = u.matmul(x)?.sub(y)?;
    u.t_matmul(&resid)
}

/// Full Newton step with unit step size. On this quadratic it lands on
/// `X^LS` from any starting point.
pub fn newton_exact_step(u: &DenseMatrix, y: &DenseMatrix, x: &DenseMatrix) -> Result<DenseMatrix> {
    let g = gradient(u, y, x)?;
    let dir = Cholesky::factor(&gram(u))?.solve(&g)?;
    x.sub(&dir)
}

/// Minimizer of `½‖S U (X − X_t)‖² + ⟨g_t, X⟩`, i.e. `X_t − Ĥ⁻¹ g_t`.
pub fn worker_step(
    u: &DenseMatrix,
    g: &DenseMatrix,
    x: &DenseMatrix,
    op: &SketchOperator,
) -> Result<DenseMatrix> {
    let h = sketched_hessian(op, u)?;
    let dir = Cholesky::factor(&h)?.solve(g)?;
    x.sub(&dir)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Logical workers `r`.
    pub workers: usize,
    /// Iteration cap `M`.
    pub max_iters: usize,
    /// Stop once `‖X_{t+1} − X_t‖_F < stop_tol`.
    pub stop_tol: f64,
    /// Template; the seed is replaced per (worker, iteration).
    pub sketch: SketchSpec,
    pub master_seed: u64,
    pub resample_on_singular: bool,
    /// Optional per-worker sketch sizes overriding `sketch.s`.
    pub worker_sizes: Option<Vec<usize>>,
    /// Give every worker the same seed at a given iteration.
    pub shared_seed: bool,
}

impl SolverConfig {
    pub fn new(sketch: SketchSpec, workers: usize, max_iters: usize, master_seed: u64) -> Self {
        Self {
            workers,
            max_iters,
            stop_tol: DEFAULT_STOP_TOL,
            sketch,
            master_seed,
            resample_on_singular: true,
            worker_sizes: None,
            shared_seed: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.workers == 0 {
            return Err(Error::InvalidConfig("worker count must be at least 1"));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("iteration budget must be at least 1"));
        }
        if self.stop_tol.is_nan() || self.stop_tol <= 0.0 {
            return Err(Error::InvalidConfig("stop tolerance must be positive"));
        }
        if let Some(sizes) = &self.worker_sizes {
            if sizes.len() != self.workers {
                return Err(Error::InvalidConfig("worker_sizes needs one entry per worker"));
            }
        }
        Ok(())
    }

    /// Sketch spec for `worker` at iteration `iter` (0-based).
    pub fn worker_spec(&self, worker: usize, iter: usize) -> SketchSpec {
        let id = if self.shared_seed { 0 } else { worker as u64 };
        let mut spec = self.sketch.with_seed(derive_seed(self.master_seed, id, iter as u64));
        if let Some(sizes) = &self.worker_sizes {
            spec.s = sizes[worker];
        }
        spec
    }
}

/// Iterate and its gradient; `grad = Uᵀ(U x − Y)` always holds.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub x: DenseMatrix,
    pub grad: DenseMatrix,
    pub iter: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    pub wall_seconds: f64,
    /// `‖X_t − X^LS‖_F / ‖X^LS‖_F`.
    pub rel_err_ls: Option<f64>,
    /// `‖X_t − Gᵀ‖_F / ‖G‖_F`.
    pub rel_err_g: Option<f64>,
    /// `‖g_t‖_F` at the recorded iterate.
    pub grad_norm: f64,
    /// `‖X_t − X_{t−1}‖_F`.
    pub step_norm: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IterationTrace {
    pub records: Vec<IterationRecord>,
}

impl IterationTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }
}

/// One DIHS run, advanced an iteration at a time.
pub struct Dihs<'a> {
    u: &'a DenseMatrix,
    y: &'a DenseMatrix,
    cfg: &'a SolverConfig,
    state: SolverState,
}

impl<'a> Dihs<'a> {
    pub fn new(
        u: &'a DenseMatrix,
        y: &'a DenseMatrix,
        cfg: &'a SolverConfig,
        x0: Option<&DenseMatrix>,
    ) -> Result<Self> {
        cfg.validate()?;
        if u.rows() != y.rows() {
            return Err(u.mismatch("dihs", y));
        }
        let x = match x0 {
            Some(x0) if x0.shape() != (u.cols(), y.cols()) => return Err(u.mismatch("dihs x0", x0)),
            Some(x0) => x0.clone(),
            None => DenseMatrix::zeros(u.cols(), y.cols()),
        };
        let grad = gradient(u, y, &x)?;
        Ok(Self {
            u,
            y,
            cfg,
            state: SolverState { x, grad, iter: 0 },
        })
    }

    pub fn state(&self) -> &SolverState {
        &self.state
    }

    pub fn into_state(self) -> SolverState {
        self.state
    }

    /// Runs one worker phase plus averaging; returns `‖X_{t+1} − X_t‖_F`.
    pub fn step<E: Executor>(&mut self, exec: &E) -> Result<f64> {
        let iter = self.state.iter;
        let (u, state, cfg) = (self.u, &self.state, self.cfg);
        let n = u.rows();
        let results = exec.run_indexed(cfg.workers, |worker| {
            let spec = cfg.worker_spec(worker, iter);
            let attempt = |spec: &SketchSpec| -> Result<DenseMatrix> {
                worker_step(u, &state.grad, &state.x, &realize(spec, n)?)
            };
            match attempt(&spec) {
                Err(Error::NotPositiveDefinite { .. }) if cfg.resample_on_singular => {
                    let retry = spec.with_seed(splitmix64(spec.seed ^ RESAMPLE_SALT));
                    attempt(&retry).map_err(|e| match e {
                        Error::NotPositiveDefinite { .. } => Error::SingularSketch { worker, iter },
                        other => other,
                    })
                }
                Err(Error::NotPositiveDefinite { .. }) => Err(Error::SingularSketch { worker, iter }),
                other => other,
            }
        });

        // incremental mean in worker-id order: r identical inputs average to
        // exactly that input
        let mut mean: Option<DenseMatrix> = None;
        for (k, result) in results.into_iter().enumerate() {
            let xi = result?;
            mean = Some(match mean {
                None => xi,
                Some(mut m) => {
                    let inv = 1.0 / (k + 1) as f64;
                    for (a, b) in m.as_mut_slice().iter_mut().zip(xi.as_slice()) {
                        *a += (b - *a) * inv;
                    }
                    m
                }
            });
        }
        let next = mean.expect("at least one worker");
        let step = next.frobenius_distance(&self.state.x)?;
        self.state.grad = gradient(self.u, self.y, &next)?;
        self.state.x = next;
        self.state.iter += 1;
        Ok(step)
    }
}

/// Optional inputs to [`dihs_solve`].
#[derive(Debug, Clone, Copy, Default)]
pub struct SolveInputs<'a> {
    /// Starting iterate; zero when absent.
    pub x0: Option<&'a DenseMatrix>,
    /// `X^LS`, enables `rel_err_ls` in the trace.
    pub baseline: Option<&'a DenseMatrix>,
    /// Ground truth, enables `rel_err_G` in the trace.
    pub truth: Option<&'a MarkovParams>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DihsOutput {
    pub x_final: DenseMatrix,
    pub trace: IterationTrace,
}

pub fn dihs_solve<E: Executor, C: Clock>(
    u: &DenseMatrix,
    y: &DenseMatrix,
    cfg: &SolverConfig,
    inputs: SolveInputs<'_>,
    exec: &E,
    clock: &C,
) -> Result<DihsOutput> {
    let mut run = Dihs::new(u, y, cfg, inputs.x0)?;
    let baseline = inputs.baseline.map(|b| (b, b.frobenius_norm()));
    let truth = match inputs.truth {
        Some(g) => {
            let gt = g.matrix().transpose();
            let norm = gt.frobenius_norm();
            Some((gt, norm))
        }
        None => None,
    };
    let start = clock.now_seconds();
    let mut trace = IterationTrace::default();
    for _ in 0..cfg.max_iters {
        let step_norm = run.step(exec)?;
        let state = run.state();
        let rel = |reference: &DenseMatrix, norm: f64| -> Result<f64> {
            Ok(state.x.frobenius_distance(reference)? / norm)
        };
        trace.records.push(IterationRecord {
            iter: state.iter,
            wall_seconds: clock.now_seconds() - start,
            rel_err_ls: baseline.map(|(b, n)| rel(b, n)).transpose()?,
            rel_err_g: truth.as_ref().map(|(g, n)| rel(g, *n)).transpose()?,
            grad_norm: state.grad.frobenius_norm(),
            step_norm,
        });
        if step_norm < cfg.stop_tol {
            break;
        }
    }
    Ok(DihsOutput {
        x_final: run.into_state().x,
        trace,
    })
}

/// Geometric mean of consecutive baseline-error ratios over the leading run
/// of records whose error is above [`CONTRACTION_FLOOR`]; needs three.
pub fn contraction_estimate(trace: &IterationTrace) -> Result<f64> {
    let errors: Vec<f64> = trace
        .records
        .iter()
        .map_while(|r| r.rel_err_ls.filter(|e| *e > CONTRACTION_FLOOR))
        .collect();
    if errors.len() < 3 {
        return Err(Error::InsufficientTrace);
    }
    let first = errors[0];
    let last = errors[errors.len() - 1];
    Ok(libm::pow(last / first, 1.0 / (errors.len() - 1) as f64))
}
