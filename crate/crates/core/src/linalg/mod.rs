//! Dense linear algebra: storage, Gram products, Cholesky, Householder QR,
//! the fast Walsh-Hadamard transform and small symmetric eigenproblems.

mod decomp;
mod eigen;
mod fwht;
mod matrix;

pub use decomp::{
    cholesky_solve, orthonormal_basis, qr_least_squares, Cholesky, HouseholderQr,
    CHOLESKY_PIVOT_TOL, QR_RANK_TOL,
};
pub use eigen::{spectral_norm, spectral_radius_estimate, symmetric_eigenvalues, symmetric_extremes};
pub use fwht::{fwht_inplace, fwht_rows};
pub use matrix::{gram, DenseMatrix};
