//! Random embeddings `S ∈ ℝ^{s×N}` and the sketched Hessian `UᵀSᵀSU`.
//!
//! Every family is scaled so that `E[SᵀS] = I_N`:
//!
//! | family              | realization                                                |
//! |---------------------|------------------------------------------------------------|
//! | `gaussian`          | i.i.d. `N(0, 1/s)` entries                                 |
//! | `rademacher`        | i.i.d. `±1/√s` entries                                     |
//! | `uniform`           | rows `√(N/s) e_j`, `j` uniform with replacement            |
//! | `ros`               | `√(N'/s) R H E`: signs, zero pad to `N' = 2^k`, FWHT, sample |
//! | `sjlt`              | every column has exactly `l` nonzeros `±1/√l`              |
//! | `uniform+sjlt`      | SJLT with `s` rows applied to a uniform sketch with `s1` rows |
//! | `identity`          | `S = I_N` (reference operator for exact Newton steps)      |
//!
//! With this convention the sketched Hessian is an unbiased estimate of `UᵀU`
//! for every family, and the solver subproblem needs no extra `1/s` factor.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::linalg::{fwht_rows, gram, symmetric_extremes, DenseMatrix};
use crate::rng::{streams, Stream};
use crate::{Error, Result};

/// Nonzeros per SJLT column when the spec leaves `l` open (capped at `s`).
pub const DEFAULT_SJLT_NNZ: usize = 8;
/// Largest tolerated `‖QᵀQ − I‖_F` for [`embedding_distortion`].
pub const ORTHONORMAL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SketchFamily {
    Identity,
    Gaussian,
    Rademacher,
    Uniform,
    Ros,
    Sjlt,
    UniformThenSjlt,
}

impl SketchFamily {
    /// The randomized families, in a fixed order.
    pub const RANDOM: [SketchFamily; 6] = [
        SketchFamily::Gaussian,
        SketchFamily::Rademacher,
        SketchFamily::Uniform,
        SketchFamily::Ros,
        SketchFamily::Sjlt,
        SketchFamily::UniformThenSjlt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SketchFamily::Identity => "identity",
            SketchFamily::Gaussian => "gaussian",
            SketchFamily::Rademacher => "rademacher",
            SketchFamily::Uniform => "uniform",
            SketchFamily::Ros => "ros",
            SketchFamily::Sjlt => "sjlt",
            SketchFamily::UniformThenSjlt => "uniform+sjlt",
        }
    }

    pub fn uses_sjlt(self) -> bool {
        matches!(self, SketchFamily::Sjlt | SketchFamily::UniformThenSjlt)
    }
}

impl fmt::Display for SketchFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SketchFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "identity" => SketchFamily::Identity,
            "gaussian" => SketchFamily::Gaussian,
            "rademacher" => SketchFamily::Rademacher,
            "uniform" => SketchFamily::Uniform,
            "ros" => SketchFamily::Ros,
            "sjlt" => SketchFamily::Sjlt,
            "uniform+sjlt" | "uniform_then_sjlt" => SketchFamily::UniformThenSjlt,
            _ => return Err(Error::InvalidSpec("unknown sketch family")),
        })
    }
}

/// Declarative description of a sketch; [`realize`] turns it into an operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SketchSpec {
    pub family: SketchFamily,
    /// Output rows `s`. Ignored by `identity`.
    pub s: usize,
    /// Nonzeros per column for the SJLT families.
    pub l: Option<usize>,
    /// Intermediate uniform rows for `uniform+sjlt`; defaults to `2s`.
    pub s1: Option<usize>,
    pub seed: u64,
}

impl SketchSpec {
    pub fn new(family: SketchFamily, s: usize) -> Self {
        Self {
            family,
            s,
            l: None,
            s1: None,
            seed: 0,
        }
    }

    pub fn with_l(mut self, l: usize) -> Self {
        self.l = Some(l);
        self
    }

    pub fn with_s1(mut self, s1: usize) -> Self {
        self.s1 = Some(s1);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn nnz_per_column(&self) -> usize {
        self.l.unwrap_or(DEFAULT_SJLT_NNZ.min(self.s))
    }

    pub fn intermediate_rows(&self) -> usize {
        self.s1.unwrap_or(2 * self.s)
    }

    /// Rows of `S·A` for an input with `n` rows.
    pub fn output_rows(&self, n: usize) -> usize {
        match self.family {
            SketchFamily::Identity => n,
            _ => self.s,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if n == 0 {
            return Err(Error::InvalidSpec("ambient dimension N must be at least 1"));
        }
        if self.family == SketchFamily::Identity {
            return Ok(());
        }
        if self.s == 0 || self.s > n {
            return Err(Error::InvalidSpec("sketch size s must satisfy 1 <= s <= N"));
        }
        if self.family.uses_sjlt() {
            let l = self.nnz_per_column();
            if l == 0 || l > self.s {
                return Err(Error::InvalidSpec("SJLT nonzeros l must satisfy 1 <= l <= s"));
            }
        }
        if self.family == SketchFamily::UniformThenSjlt {
            let s1 = self.intermediate_rows();
            if s1 < self.s || s1 > n {
                return Err(Error::InvalidSpec("intermediate rows s1 must satisfy s <= s1 <= N"));
            }
        }
        Ok(())
    }
}

/// A realized sketch. Immutable; share freely across threads.
#[derive(Debug, Clone)]
pub struct SketchOperator {
    spec: SketchSpec,
    n: usize,
    kind: Kind,
}

#[derive(Debug, Clone)]
enum Kind {
    Identity,
    Dense(DenseMatrix),
    Uniform(RowSampler),
    Ros {
        signs: Vec<f64>,
        padded: usize,
        sampler: RowSampler,
    },
    Sjlt(SjltMap),
    UniformThenSjlt {
        first: RowSampler,
        second: SjltMap,
    },
}

/// `s` indices drawn uniformly with replacement, each row scaled by `scale`.
#[derive(Debug, Clone)]
struct RowSampler {
    picks: Vec<usize>,
    scale: f64,
}

impl RowSampler {
    fn draw(rng: &mut Stream, s: usize, n: usize) -> Self {
        Self {
            picks: (0..s).map(|_| rng.index(n)).collect(),
            scale: libm::sqrt(n as f64 / s as f64),
        }
    }

    fn gather(&self, a: &DenseMatrix) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.picks.len(), a.cols());
        for (k, &j) in self.picks.iter().enumerate() {
            for (dst, src) in out.row_mut(k).iter_mut().zip(a.row(j)) {
                *dst = self.scale * src;
            }
        }
        out
    }
}

/// Column-wise sparse map: input row `j` lands on output rows
/// `rows[j*l..(j+1)*l]` with weights `values[j*l..(j+1)*l]`.
#[derive(Debug, Clone)]
struct SjltMap {
    s: usize,
    l: usize,
    rows: Vec<usize>,
    values: Vec<f64>,
}

impl SjltMap {
    fn draw(rng: &mut Stream, s: usize, l: usize, n: usize) -> Self {
        let weight = 1.0 / libm::sqrt(l as f64);
        let mut perm: Vec<usize> = (0..s).collect();
        let mut rows = Vec::with_capacity(n * l);
        let mut values = Vec::with_capacity(n * l);
        for _ in 0..n {
            // partial Fisher-Yates: the first l slots become l distinct rows
            for k in 0..l {
                let j = k + rng.index(s - k);
                perm.swap(k, j);
                rows.push(perm[k]);
                values.push(weight * rng.sign());
            }
        }
        Self { s, l, rows, values }
    }

    fn scatter(&self, a: &DenseMatrix) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.s, a.cols());
        for j in 0..a.rows() {
            let src = a.row(j);
            let span = j * self.l..(j + 1) * self.l;
            for (&r, &w) in self.rows[span.clone()].iter().zip(&self.values[span]) {
                for (dst, x) in out.row_mut(r).iter_mut().zip(src) {
                    *dst += w * x;
                }
            }
        }
        out
    }
}

/// Draws the randomness for `spec` over `n` ambient rows.
pub fn realize(spec: &SketchSpec, n: usize) -> Result<SketchOperator> {
    spec.validate(n)?;
    let s = spec.s;
    let mut rng = Stream::new(spec.seed, streams::SKETCH_PRIMARY);
    let kind = match spec.family {
        SketchFamily::Identity => Kind::Identity,
        SketchFamily::Gaussian => {
            let scale = 1.0 / libm::sqrt(s as f64);
            Kind::Dense(DenseMatrix::from_fn(s, n, |_, _| scale * rng.normal()))
        }
        SketchFamily::Rademacher => {
            let scale = 1.0 / libm::sqrt(s as f64);
            Kind::Dense(DenseMatrix::from_fn(s, n, |_, _| scale * rng.sign()))
        }
        SketchFamily::Uniform => Kind::Uniform(RowSampler::draw(&mut rng, s, n)),
        SketchFamily::Ros => {
            let signs = (0..n).map(|_| rng.sign()).collect();
            let padded = n.next_power_of_two();
            Kind::Ros {
                signs,
                padded,
                sampler: RowSampler::draw(&mut rng, s, padded),
            }
        }
        SketchFamily::Sjlt => Kind::Sjlt(SjltMap::draw(&mut rng, s, spec.nnz_per_column(), n)),
        SketchFamily::UniformThenSjlt => {
            let s1 = spec.intermediate_rows();
            let first = RowSampler::draw(&mut rng, s1, n);
            let mut second_rng = Stream::new(spec.seed, streams::SKETCH_SECONDARY);
            let second = SjltMap::draw(&mut second_rng, s, spec.nnz_per_column(), s1);
            Kind::UniformThenSjlt { first, second }
        }
    };
    Ok(SketchOperator {
        spec: *spec,
        n,
        kind,
    })
}

impl SketchOperator {
    pub fn spec(&self) -> &SketchSpec {
        &self.spec
    }

    /// Ambient dimension `N`.
    pub fn input_rows(&self) -> usize {
        self.n
    }

    pub fn output_rows(&self) -> usize {
        self.spec.output_rows(self.n)
    }

    /// `S·A`.
    pub fn apply(&self, a: &DenseMatrix) -> Result<DenseMatrix> {
        if a.rows() != self.n {
            return Err(Error::DimensionMismatch {
                op: "sketch apply",
                left: (self.output_rows(), self.n),
                right: a.shape(),
            });
        }
        Ok(match &self.kind {
            Kind::Identity => a.clone(),
            Kind::Dense(s) => s.matmul(a)?,
            Kind::Uniform(sampler) => sampler.gather(a),
            Kind::Ros {
                signs,
                padded,
                sampler,
            } => {
                let cols = a.cols();
                let mut buf = vec![0.0; padded * cols];
                for (i, &sign) in signs.iter().enumerate() {
                    for (dst, x) in buf[i * cols..(i + 1) * cols].iter_mut().zip(a.row(i)) {
                        *dst = sign * x;
                    }
                }
                fwht_rows(&mut buf, *padded, cols)?;
                let mixed = DenseMatrix::new(*padded, cols, buf)?;
                sampler.gather(&mixed)
            }
            Kind::Sjlt(map) => map.scatter(a),
            Kind::UniformThenSjlt { first, second } => second.scatter(&first.gather(a)),
        })
    }

    /// Explicit `s × N` matrix, built by applying the operator to `I_N`.
    pub fn materialize(&self) -> DenseMatrix {
        self.apply(&DenseMatrix::identity(self.n))
            .expect("identity has N rows")
    }
}

/// `UᵀSᵀSU`, the sketched Hessian.
pub fn sketched_hessian(op: &SketchOperator, u: &DenseMatrix) -> Result<DenseMatrix> {
    Ok(gram(&op.apply(u)?))
}

/// Two-sided distortion of `S` on the span of an orthonormal `Q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbeddingReport {
    pub min_sq_singular: f64,
    pub max_sq_singular: f64,
    /// `max(1 − min_sq, max_sq − 1)`.
    pub rho_hat: f64,
}

pub fn embedding_distortion(op: &SketchOperator, q: &DenseMatrix) -> Result<EmbeddingReport> {
    let deviation = gram(q)
        .frobenius_distance(&DenseMatrix::identity(q.cols()))
        .unwrap_or(f64::INFINITY);
    if deviation.is_nan() || deviation > ORTHONORMAL_TOL {
        return Err(Error::NotOrthonormal { deviation });
    }
    let (min, max) = symmetric_extremes(&gram(&op.apply(q)?));
    Ok(EmbeddingReport {
        min_sq_singular: min,
        max_sq_singular: max,
        rho_hat: (1.0 - min).max(max - 1.0).max(0.0),
    })
}
