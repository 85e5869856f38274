use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Operand shapes do not fit together.
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    /// `data.len() != rows * cols`.
    BadLength { expected: usize, found: usize },
    NonFinite { index: usize },
    /// Cholesky pivot fell below the relative tolerance.
    NotPositiveDefinite { pivot: usize },
    /// QR diagonal entry below the relative tolerance.
    RankDeficient { column: usize },
    NotPowerOfTwo { len: usize },
    NotOrthonormal { deviation: f64 },
    InvalidSpec(&'static str),
    InvalidConfig(&'static str),
    /// Estimated spectral radius of `A` is not below `1 - 1e-6`.
    NotStable { spectral_radius: f64 },
    /// A simulated state entry exceeded `1e12` in magnitude.
    Overflow { step: usize },
    /// Sketched Hessian stayed singular after the allowed resample.
    SingularSketch { worker: usize, iter: usize },
    InsufficientTrace,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { op, left, right } => write!(
                f,
                "dimension mismatch in {op}: {}x{} vs {}x{}",
                left.0, left.1, right.0, right.1
            ),
            Error::BadLength { expected, found } => {
                write!(f, "matrix data has {found} entries, expected {expected}")
            }
            Error::NonFinite { index } => write!(f, "non-finite matrix entry at index {index}"),
            Error::NotPositiveDefinite { pivot } => {
                write!(f, "matrix is not positive definite (pivot {pivot})")
            }
            Error::RankDeficient { column } => {
                write!(f, "matrix is rank deficient (column {column})")
            }
            Error::NotPowerOfTwo { len } => write!(f, "length {len} is not a power of two"),
            Error::NotOrthonormal { deviation } => {
                write!(f, "basis is not orthonormal (|QtQ - I|_F = {deviation:e})")
            }
            Error::InvalidSpec(msg) => write!(f, "invalid sketch spec: {msg}"),
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::NotStable { spectral_radius } => {
                write!(f, "system matrix is not Schur stable (radius ~ {spectral_radius})")
            }
            Error::Overflow { step } => write!(f, "state overflow at time step {step}"),
            Error::SingularSketch { worker, iter } => write!(
                f,
                "sketched Hessian singular for worker {worker} at iteration {iter} after resampling"
            ),
            Error::InsufficientTrace => {
                f.write_str("trace has fewer than 3 iterations with measurable baseline error")
            }
        }
    }
}

impl core::error::Error for Error {}
