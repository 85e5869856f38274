//! Ground-truth LTI systems, single-rollout simulation and the regression
//! data used to estimate Markov parameters.
//!
//! The system is
//!
//! ```text
//! x_{t+1} = A x_t + B u_t + w_t,    y_t = C x_t + D u_t + v_t
//! ```
//!
//! with `u_t ~ N(0, σ_u² I)`, `w_t ~ N(0, σ_w² I)`, `v_t ~ N(0, σ_v² I)`.
//! The rollout covers `t = 1..=N̄` with `N̄ = T + N − 1` and starts from
//! `x_1 = 0`. Row `j` of the regression pair uses time `i = T + j`:
//! `U_j = [u_iᵀ, u_{i−1}ᵀ, …, u_{i−T+1}ᵀ]` and `Y_j = y_iᵀ`.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{gram, spectral_radius_estimate, symmetric_extremes, DenseMatrix};
use crate::rng::{streams, Stream};
use crate::{Error, Result};

pub const DEFAULT_SPECTRAL_TARGET: f64 = 0.95;
/// Largest accepted spectral-radius estimate for a stable `A`.
pub const STABILITY_MARGIN: f64 = 1.0 - 1e-6;
pub const POWER_ITERS: usize = 200;
pub const POWER_TOL: f64 = 1e-8;
/// Simulation aborts once a state entry exceeds this magnitude.
pub const STATE_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct LtiSystem {
    a: DenseMatrix,
    b: DenseMatrix,
    c: DenseMatrix,
    d: DenseMatrix,
}

impl LtiSystem {
    /// Validates shapes (`A` n×n, `B` n×m, `C` p×n, `D` p×m, all ≥ 1) and
    /// Schur stability of `A`.
    pub fn new(a: DenseMatrix, b: DenseMatrix, c: DenseMatrix, d: DenseMatrix) -> Result<Self> {
        let n = a.rows();
        let (m, p) = (b.cols(), c.rows());
        if n == 0 || m == 0 || p == 0 {
            return Err(Error::InvalidConfig("system dimensions must be at least 1"));
        }
        if !a.is_square() {
            return Err(a.mismatch("system A", &a));
        }
        if b.rows() != n {
            return Err(a.mismatch("system B", &b));
        }
        if c.cols() != n {
            return Err(a.mismatch("system C", &c));
        }
        if d.shape() != (p, m) {
            return Err(c.mismatch("system D", &d));
        }
        let spectral_radius = spectral_radius_estimate(&a, POWER_ITERS, POWER_TOL);
        if spectral_radius.is_nan() || spectral_radius > STABILITY_MARGIN {
            return Err(Error::NotStable { spectral_radius });
        }
        Ok(Self { a, b, c, d })
    }

    pub fn a(&self) -> &DenseMatrix {
        &self.a
    }
    pub fn b(&self) -> &DenseMatrix {
        &self.b
    }
    pub fn c(&self) -> &DenseMatrix {
        &self.c
    }
    pub fn d(&self) -> &DenseMatrix {
        &self.d
    }

    /// State dimension `n`.
    pub fn n(&self) -> usize {
        self.a.rows()
    }
    /// Input dimension `m`.
    pub fn m(&self) -> usize {
        self.b.cols()
    }
    /// Output dimension `p`.
    pub fn p(&self) -> usize {
        self.c.rows()
    }

    pub fn spectral_radius(&self) -> f64 {
        spectral_radius_estimate(&self.a, POWER_ITERS, POWER_TOL)
    }
}

/// Random system with `A` entries in `{1..5}` and `B`, `C`, `D` entries in
/// `{−2..2}`, then `A` rescaled to spectral radius 0.95.
pub fn generate_system(n: usize, m: usize, p: usize, seed: u64) -> Result<LtiSystem> {
    generate_system_with_target(n, m, p, seed, DEFAULT_SPECTRAL_TARGET)
}

pub fn generate_system_with_target(
    n: usize,
    m: usize,
    p: usize,
    seed: u64,
    spectral_target: f64,
) -> Result<LtiSystem> {
    if n == 0 || m == 0 || p == 0 {
        return Err(Error::InvalidConfig("system dimensions must be at least 1"));
    }
    if !(spectral_target > 0.0 && spectral_target <= STABILITY_MARGIN) {
        return Err(Error::InvalidConfig("spectral target must lie in (0, 1 - 1e-6]"));
    }
    let mut rng = Stream::new(seed, streams::SYSTEM);
    let mut draw = |rows: usize, cols: usize, lo: i64, hi: i64| {
        DenseMatrix::from_fn(rows, cols, |_, _| rng.int_inclusive(lo, hi) as f64)
    };
    let raw_a = draw(n, n, 1, 5);
    let b = draw(n, m, -2, 2);
    let c = draw(p, n, -2, 2);
    let d = draw(p, m, -2, 2);
    // positive matrix: Perron root is real, simple and dominant
    let radius = spectral_radius_estimate(&raw_a, POWER_ITERS, POWER_TOL);
    let a = raw_a.scale(spectral_target / radius);
    LtiSystem::new(a, b, c, d)
}

/// `G = [D, CB, CAB, …, CA^{T−2}B]` (p × mT).
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovParams {
    g: DenseMatrix,
    horizon: usize,
}

impl MarkovParams {
    pub fn new(g: DenseMatrix, horizon: usize) -> Result<Self> {
        if horizon == 0 || !g.cols().is_multiple_of(horizon) {
            return Err(Error::InvalidConfig("G width must be a multiple of the horizon"));
        }
        Ok(Self { g, horizon })
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.g
    }

    pub fn into_matrix(self) -> DenseMatrix {
        self.g
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Block `k` (p × m).
    pub fn block(&self, k: usize) -> DenseMatrix {
        let m = self.g.cols() / self.horizon;
        self.g.column_block(k * m, m)
    }
}

pub fn markov_params(sys: &LtiSystem, horizon: usize) -> Result<MarkovParams> {
    if horizon == 0 {
        return Err(Error::InvalidConfig("horizon must be at least 1"));
    }
    let (m, p) = (sys.m(), sys.p());
    let mut g = DenseMatrix::zeros(p, m * horizon);
    let mut place = |k: usize, block: &DenseMatrix| {
        for i in 0..p {
            g.row_mut(i)[k * m..(k + 1) * m].copy_from_slice(block.row(i));
        }
    };
    place(0, sys.d());
    let mut power_b = sys.b().clone();
    for k in 1..horizon {
        place(k, &sys.c().matmul(&power_b)?);
        power_b = sys.a().matmul(&power_b)?;
    }
    MarkovParams::new(g, horizon)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationConfig {
    pub sigma_u: f64,
    pub sigma_w: f64,
    pub sigma_v: f64,
    /// Horizon `T`: number of Markov blocks estimated.
    pub horizon: usize,
    /// Regression rows `N`.
    pub samples: usize,
    pub seed: u64,
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        let nonneg = |v: f64| v.is_finite() && v >= 0.0;
        if !nonneg(self.sigma_u) || !nonneg(self.sigma_w) || !nonneg(self.sigma_v) {
            return Err(Error::InvalidConfig("noise levels must be finite and non-negative"));
        }
        if self.horizon == 0 || self.samples == 0 {
            return Err(Error::InvalidConfig("horizon and sample count must be at least 1"));
        }
        Ok(())
    }

    /// `N̄ = T + N − 1`.
    pub fn trajectory_len(&self) -> usize {
        self.horizon + self.samples - 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionData {
    /// N × mT stacked input windows.
    pub u: DenseMatrix,
    /// N × p outputs.
    pub y: DenseMatrix,
    pub config: SimulationConfig,
}

/// Runs one rollout and splices it into `(U, Y)`.
pub fn simulate(sys: &LtiSystem, cfg: &SimulationConfig) -> Result<RegressionData> {
    cfg.validate()?;
    let (n, m, p) = (sys.n(), sys.m(), sys.p());
    let horizon = cfg.horizon;
    let len = cfg.trajectory_len();

    let mut inputs_rng = Stream::new(cfg.seed, streams::INPUTS);
    let mut process_rng = Stream::new(cfg.seed, streams::PROCESS_NOISE);
    let mut measure_rng = Stream::new(cfg.seed, streams::MEASUREMENT_NOISE);

    // u[t-1] holds u_t for t = 1..=len
    let inputs: Vec<f64> = (0..len * m).map(|_| cfg.sigma_u * inputs_rng.normal()).collect();

    let mut x = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut y = DenseMatrix::zeros(cfg.samples, p);
    for t in 1..=len {
        let u_t = &inputs[(t - 1) * m..t * m];
        let w: Vec<f64> = (0..n).map(|_| cfg.sigma_w * process_rng.normal()).collect();
        let v: Vec<f64> = (0..p).map(|_| cfg.sigma_v * measure_rng.normal()).collect();
        if t >= horizon {
            let row = y.row_mut(t - horizon);
            for (i, out) in row.iter_mut().enumerate() {
                *out = dot(sys.c().row(i), &x) + dot(sys.d().row(i), u_t) + v[i];
            }
        }
        for (i, nx) in next.iter_mut().enumerate() {
            *nx = dot(sys.a().row(i), &x) + dot(sys.b().row(i), u_t) + w[i];
        }
        core::mem::swap(&mut x, &mut next);
        if x.iter().any(|v| !v.is_finite() || v.abs() > STATE_LIMIT) {
            return Err(Error::Overflow { step: t + 1 });
        }
    }

    let mut u = DenseMatrix::zeros(cfg.samples, m * horizon);
    for j in 0..cfg.samples {
        let i = horizon + j;
        let row = u.row_mut(j);
        for k in 0..horizon {
            let t = i - k;
            row[k * m..(k + 1) * m].copy_from_slice(&inputs[(t - 1) * m..t * m]);
        }
    }
    Ok(RegressionData {
        u,
        y,
        config: *cfg,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Extreme eigenvalues of `UᵀU` against the `[Nσ_u²/2, 2Nσ_u²]` sandwich.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputConditioning {
    pub min_sq_singular: f64,
    pub max_sq_singular: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
}

pub fn input_matrix_conditioning(u: &DenseMatrix, sigma_u: f64) -> InputConditioning {
    let (min, max) = symmetric_extremes(&gram(u));
    let scale = u.rows() as f64 * sigma_u * sigma_u;
    InputConditioning {
        min_sq_singular: min,
        max_sq_singular: max,
        lower_ok: min >= scale / 2.0,
        upper_ok: max <= 2.0 * scale,
    }
}
