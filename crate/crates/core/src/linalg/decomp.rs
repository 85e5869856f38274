use alloc::vec;
use alloc::vec::Vec;

use super::matrix::{axpy, dot, DenseMatrix};
use crate::{Error, Result};

/// Relative pivot floor for Cholesky, against the largest diagonal entry.
pub const CHOLESKY_PIVOT_TOL: f64 = 1e-12;
/// Relative floor for `|R_kk|` in the Householder QR, against `max |R_jj|`.
pub const QR_RANK_TOL: f64 = 1e-12;

/// Lower-triangular Cholesky factor `H = L Lᵀ`, reusable across right-hand sides.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    // row-major lower triangle, upper part zero
    l: Vec<f64>,
}

impl Cholesky {
    /// Factors a symmetric matrix. Only the lower triangle of `h` is read.
    pub fn factor(h: &DenseMatrix) -> Result<Self> {
        if !h.is_square() {
            return Err(h.mismatch("cholesky", h));
        }
        let n = h.rows();
        let max_diag = (0..n).fold(0.0f64, |m, i| m.max(h[(i, i)]));
        let floor = CHOLESKY_PIVOT_TOL * max_diag;
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let (done, rest) = l.split_at_mut(j * n);
            let row_j = &mut rest[..n];
            for k in 0..j {
                let row_k = &done[k * n..k * n + k];
                row_j[k] = (h[(j, k)] - dot(&row_j[..k], row_k)) / done[k * n + k];
            }
            let pivot = h[(j, j)] - dot(&row_j[..j], &row_j[..j]);
            if pivot.is_nan() || pivot <= floor || max_diag <= 0.0 {
                return Err(Error::NotPositiveDefinite { pivot: j });
            }
            row_j[j] = libm::sqrt(pivot);
        }
        Ok(Self { n, l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `H X = B` column block by column block.
    pub fn solve(&self, b: &DenseMatrix) -> Result<DenseMatrix> {
        let n = self.n;
        if b.rows() != n {
            return Err(Error::DimensionMismatch {
                op: "cholesky_solve",
                left: (n, n),
                right: b.shape(),
            });
        }
        let k = b.cols();
        let mut x = b.clone();
        let data = x.as_mut_slice();
        // forward: L Z = B
        for i in 0..n {
            for j in 0..i {
                let lij = self.l[i * n + j];
                if lij != 0.0 {
                    let (head, tail) = data.split_at_mut(i * k);
                    axpy(-lij, &head[j * k..(j + 1) * k], &mut tail[..k]);
                }
            }
            let inv = 1.0 / self.l[i * n + i];
            data[i * k..(i + 1) * k].iter_mut().for_each(|v| *v *= inv);
        }
        // backward: Lᵀ X = Z
        for i in (0..n).rev() {
            for j in i + 1..n {
                let lji = self.l[j * n + i];
                if lji != 0.0 {
                    let (head, tail) = data.split_at_mut(j * k);
                    axpy(-lji, &tail[..k], &mut head[i * k..(i + 1) * k]);
                }
            }
            let inv = 1.0 / self.l[i * n + i];
            data[i * k..(i + 1) * k].iter_mut().for_each(|v| *v *= inv);
        }
        Ok(x)
    }
}

/// Solves `H X = B` for symmetric positive definite `H`.
pub fn cholesky_solve(h: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    Cholesky::factor(h)?.solve(b)
}

/// Householder QR of a tall matrix, keeping the reflectors.
#[derive(Debug, Clone)]
pub struct HouseholderQr {
    rows: usize,
    cols: usize,
    // reflector k acts on rows k.. and is stored unit-norm, length rows - k
    reflectors: Vec<Vec<f64>>,
    // upper-triangular cols x cols, row-major
    r: Vec<f64>,
}

impl HouseholderQr {
    /// Factors `A` (N×d, N ≥ d). Fails when `A` is numerically rank deficient.
    pub fn factor(a: &DenseMatrix) -> Result<Self> {
        Self::factor_with(a, None)
    }

    /// Factors `A` and applies `Qᵀ` to `B` on the way.
    fn factor_with(a: &DenseMatrix, mut b: Option<&mut DenseMatrix>) -> Result<Self> {
        let (rows, cols) = a.shape();
        if rows < cols || cols == 0 {
            return Err(Error::DimensionMismatch {
                op: "qr",
                left: a.shape(),
                right: a.shape(),
            });
        }
        // work column-major so reflector updates are contiguous
        let mut work: Vec<Vec<f64>> = (0..cols).map(|j| a.column(j)).collect();
        let mut reflectors = Vec::with_capacity(cols);
        let mut diag = vec![0.0; cols];
        for k in 0..cols {
            let x = &work[k][k..];
            let norm = libm::sqrt(dot(x, x));
            let alpha = if x[0] >= 0.0 { -norm } else { norm };
            let mut v: Vec<f64> = x.to_vec();
            v[0] -= alpha;
            let vnorm = libm::sqrt(dot(&v, &v));
            if vnorm > 0.0 {
                v.iter_mut().for_each(|e| *e /= vnorm);
                for col in work.iter_mut().skip(k + 1) {
                    let seg = &mut col[k..];
                    let t = 2.0 * dot(&v, seg);
                    axpy(-t, &v, seg);
                }
                if let Some(b) = b.as_deref_mut() {
                    apply_reflector_rows(b, k, &v);
                }
            } else {
                v.iter_mut().for_each(|e| *e = 0.0);
            }
            diag[k] = alpha;
            work[k][k] = alpha;
            reflectors.push(v);
        }
        let max_diag = diag.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if let Some(column) = diag
            .iter()
            .position(|v| v.is_nan() || v.abs() < QR_RANK_TOL * max_diag || max_diag == 0.0)
        {
            return Err(Error::RankDeficient { column });
        }
        let mut r = vec![0.0; cols * cols];
        for (j, col) in work.iter().enumerate() {
            for i in 0..=j {
                r[i * cols + j] = col[i];
            }
        }
        Ok(Self {
            rows,
            cols,
            reflectors,
            r,
        })
    }

    /// `R` (d×d upper triangular).
    pub fn r(&self) -> DenseMatrix {
        DenseMatrix::new(self.cols, self.cols, self.r.clone()).expect("finite R")
    }

    /// Thin `Q` (N×d) with orthonormal columns.
    pub fn thin_q(&self) -> DenseMatrix {
        let mut q = DenseMatrix::zeros(self.rows, self.cols);
        for j in 0..self.cols {
            q[(j, j)] = 1.0;
        }
        for (k, v) in self.reflectors.iter().enumerate().rev() {
            apply_reflector_rows(&mut q, k, v);
        }
        q
    }

    fn back_substitute(&self, qtb: &DenseMatrix) -> DenseMatrix {
        let d = self.cols;
        let k = qtb.cols();
        let mut x = DenseMatrix::zeros(d, k);
        for i in (0..d).rev() {
            let mut acc: Vec<f64> = qtb.row(i).to_vec();
            for j in i + 1..d {
                let rij = self.r[i * d + j];
                if rij != 0.0 {
                    axpy(-rij, x.row(j), &mut acc);
                }
            }
            let inv = 1.0 / self.r[i * d + i];
            for (dst, v) in x.row_mut(i).iter_mut().zip(acc) {
                *dst = v * inv;
            }
        }
        x
    }
}

/// Applies `I − 2vvᵀ` (acting on rows `k..`) to every column of `m`.
fn apply_reflector_rows(m: &mut DenseMatrix, k: usize, v: &[f64]) {
    let cols = m.cols();
    let mut proj = vec![0.0; cols];
    for (offset, &vi) in v.iter().enumerate() {
        if vi != 0.0 {
            axpy(vi, m.row(k + offset), &mut proj);
        }
    }
    for (offset, &vi) in v.iter().enumerate() {
        if vi != 0.0 {
            axpy(-2.0 * vi, &proj, m.row_mut(k + offset));
        }
    }
}

/// `argmin_X ‖A X − B‖_F` through Householder QR.
pub fn qr_least_squares(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    if a.rows() != b.rows() {
        return Err(a.mismatch("qr_least_squares", b));
    }
    let mut qtb = b.clone();
    let qr = HouseholderQr::factor_with(a, Some(&mut qtb))?;
    Ok(qr.back_substitute(&qtb))
}

/// Orthonormal basis of `range(A)`, as the thin `Q` factor.
pub fn orthonormal_basis(a: &DenseMatrix) -> Result<DenseMatrix> {
    Ok(HouseholderQr::factor(a)?.thin_q())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::gram;

    fn lcg_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
        let mut s = seed;
        DenseMatrix::from_fn(rows, cols, |_, _| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        })
    }

    #[test]
    fn cholesky_trivial_cases() {
        let b = lcg_matrix(3, 2, 4);
        let x = cholesky_solve(&DenseMatrix::identity(3), &b).unwrap();
        assert!(x.frobenius_distance(&b).unwrap() < 1e-15);

        let h = DenseMatrix::diag(&[2.0, 4.0]);
        let x = cholesky_solve(&h, &DenseMatrix::from_rows(&[[2.0], [8.0]])).unwrap();
        assert!(x.frobenius_distance(&DenseMatrix::from_rows(&[[1.0], [2.0]])).unwrap() < 1e-15);
    }

    #[test]
    fn cholesky_rejects_singular() {
        let h = DenseMatrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]]);
        assert!(matches!(
            Cholesky::factor(&h),
            Err(Error::NotPositiveDefinite { pivot: 1 })
        ));
        let neg = DenseMatrix::diag(&[1.0, -1.0]);
        assert!(Cholesky::factor(&neg).is_err());
        assert!(Cholesky::factor(&DenseMatrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn cholesky_matches_qr_normal_equations() {
        let a = lcg_matrix(20, 5, 9);
        let b = lcg_matrix(20, 1, 10);
        let h = gram(&a);
        let rhs = a.t_matmul(&b).unwrap();
        let via_chol = cholesky_solve(&h, &rhs).unwrap();
        let via_qr = qr_least_squares(&a, &b).unwrap();
        assert!(via_chol.frobenius_distance(&via_qr).unwrap() <= 1e-8 * via_qr.frobenius_norm());
    }

    #[test]
    fn qr_trivial_cases() {
        let b = lcg_matrix(4, 3, 1);
        let x = qr_least_squares(&DenseMatrix::identity(4), &b).unwrap();
        assert!(x.frobenius_distance(&b).unwrap() < 1e-14);

        let a = DenseMatrix::from_rows(&[[1.0], [1.0]]);
        let x = qr_least_squares(&a, &DenseMatrix::from_rows(&[[0.0], [2.0]])).unwrap();
        assert!((x[(0, 0)] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn qr_residual_is_orthogonal() {
        let a = lcg_matrix(50, 4, 3);
        let b = lcg_matrix(50, 3, 5);
        let x = qr_least_squares(&a, &b).unwrap();
        let resid = a.matmul(&x).unwrap().sub(&b).unwrap();
        let normal = a.t_matmul(&resid).unwrap();
        assert!(normal.frobenius_norm() <= 1e-8 * a.t_matmul(&b).unwrap().frobenius_norm());
        let oracle = cholesky_solve(&gram(&a), &a.t_matmul(&b).unwrap()).unwrap();
        assert!(x.frobenius_distance(&oracle).unwrap() <= 1e-8 * oracle.frobenius_norm());
    }

    #[test]
    fn qr_rank_deficient() {
        let a = DenseMatrix::from_rows(&[[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]]);
        assert!(matches!(
            qr_least_squares(&a, &DenseMatrix::zeros(3, 1)),
            Err(Error::RankDeficient { column: 1 })
        ));
        assert!(orthonormal_basis(&DenseMatrix::zeros(3, 2)).is_err());
    }

    #[test]
    fn orthonormal_basis_cases() {
        let q = orthonormal_basis(&DenseMatrix::identity(4).scale(3.0)).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((q[(i, j)].abs() - expect).abs() < 1e-14);
            }
        }

        let a = DenseMatrix::from_rows(&[[1.0, 0.0], [0.0, 2.0], [0.0, 0.0]]);
        let q = orthonormal_basis(&a).unwrap();
        assert!((q[(0, 0)].abs() - 1.0).abs() < 1e-15);
        assert!((q[(1, 1)].abs() - 1.0).abs() < 1e-15);
        assert!(q[(2, 0)].abs() < 1e-15 && q[(2, 1)].abs() < 1e-15);

        let a = lcg_matrix(30, 5, 21);
        let q = orthonormal_basis(&a).unwrap();
        let qtq = gram(&q);
        assert!(qtq.frobenius_distance(&DenseMatrix::identity(5)).unwrap() <= 1e-10);
        let proj = q.matmul(&q.t_matmul(&a).unwrap()).unwrap();
        assert!(proj.frobenius_distance(&a).unwrap() <= 1e-10 * a.frobenius_norm());
    }
}
