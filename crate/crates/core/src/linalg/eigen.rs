use alloc::vec::Vec;

use super::matrix::{gram, DenseMatrix};

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
///
/// Meant for the small `d × d` Gram matrices this crate produces; cost is
/// `O(d³)` per sweep.
pub fn symmetric_eigenvalues(h: &DenseMatrix) -> Vec<f64> {
    assert!(h.is_square(), "symmetric_eigenvalues needs a square matrix");
    let n = h.rows();
    let mut a = h.clone();
    let scale = a.frobenius_norm();
    if scale == 0.0 {
        return alloc::vec![0.0; n];
    }
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                off += a[(i, j)] * a[(i, j)];
            }
        }
        if libm::sqrt(off) <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    eig.sort_by(|x, y| x.total_cmp(y));
    eig
}

/// Smallest and largest eigenvalue of a symmetric matrix.
pub fn symmetric_extremes(h: &DenseMatrix) -> (f64, f64) {
    let eig = symmetric_eigenvalues(h);
    (eig[0], eig[eig.len() - 1])
}

/// Largest singular value, `√λ_max(AᵀA)`.
pub fn spectral_norm(a: &DenseMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let (_, max) = symmetric_extremes(&gram(a));
    libm::sqrt(max.max(0.0))
}

/// Power-iteration estimate of the spectral radius of a square matrix.
///
/// Tracks the growth factor `‖A x_k‖ / ‖x_k‖`. Stops once two successive
/// factors agree to `rel_tol`; otherwise (e.g. a dominant complex pair makes
/// the factor oscillate) returns the geometric mean of the last half.
pub fn spectral_radius_estimate(a: &DenseMatrix, max_iters: usize, rel_tol: f64) -> f64 {
    assert!(a.is_square(), "spectral radius needs a square matrix");
    let n = a.rows();
    if n == 0 {
        return 0.0;
    }
    // deterministic non-degenerate start vector
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i % 7) as f64)).collect();
    normalize(&mut x);
    let mut factors: Vec<f64> = Vec::with_capacity(max_iters);
    for _ in 0..max_iters {
        let mut y = alloc::vec![0.0; n];
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = a.row(i).iter().zip(&x).map(|(p, q)| p * q).sum();
        }
        let growth = normalize(&mut y);
        if growth == 0.0 {
            return 0.0;
        }
        if let Some(&prev) = factors.last() {
            if (growth - prev).abs() <= rel_tol * growth {
                return growth;
            }
        }
        factors.push(growth);
        x = y;
    }
    let tail = &factors[factors.len() / 2..];
    let log_mean = tail.iter().map(|f| libm::log(*f)).sum::<f64>() / tail.len() as f64;
    libm::exp(log_mean)
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = libm::sqrt(v.iter().map(|x| x * x).sum());
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}
