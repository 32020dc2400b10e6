//! Small dense linear-algebra helpers: a cyclic Jacobi eigensolver for
//! symmetric matrices. Matrices in this crate stay tiny (≤ 32×32), so the
//! O(n³)-per-sweep cost is irrelevant and the determinism is worth more than
//! speed.

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Eigendecomposition of a symmetric matrix via cyclic Jacobi rotations.
///
/// Returns `(eigenvalues, eigenvectors)` with eigenvalues ascending and
/// eigenvectors as the columns of the returned matrix, so
/// `m == V * diag(λ) * Vᵀ` up to round-off.
pub fn symmetric_eigen(m: &Tensor) -> Result<(Vec<f64>, Tensor)> {
    if m.rank() != 2 || m.rows() != m.cols() {
        return Err(Error::InvalidArgument(format!(
            "symmetric_eigen: expected square rank-2, got {:?}",
            m.shape()
        )));
    }
    let n = m.rows();
    let sym_tol = 1e-8 * (1.0 + m.max_abs());
    for i in 0..n {
        for j in (i + 1)..n {
            if (m.get2(i, j) - m.get2(j, i)).abs() > sym_tol {
                return Err(Error::InvalidArgument(format!(
                    "symmetric_eigen: matrix is not symmetric at ({i},{j})"
                )));
            }
        }
    }

    let mut a = m.clone();
    // Fold in any tiny asymmetry so rotations see an exactly symmetric matrix.
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (a.get2(i, j) + a.get2(j, i));
            a.set2(i, j, avg);
            a.set2(j, i, avg);
        }
    }
    let mut v = Tensor::identity(n);

    let max_sweeps = 64;
    for _ in 0..max_sweeps {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a.get2(i, j) * a.get2(i, j);
            }
        }
        if off.sqrt() <= 1e-14 * (1.0 + a.max_abs()) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get2(p, q);
                if apq == 0.0 {
                    continue;
                }
                let app = a.get2(p, p);
                let aqq = a.get2(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a.get2(k, p);
                    let akq = a.get2(k, q);
                    a.set2(k, p, c * akp - s * akq);
                    a.set2(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.get2(p, k);
                    let aqk = a.get2(q, k);
                    a.set2(p, k, c * apk - s * aqk);
                    a.set2(q, k, s * apk + c * aqk);
                }
                for k in 0..n {
                    let vkp = v.get2(k, p);
                    let vkq = v.get2(k, q);
                    v.set2(k, p, c * vkp - s * vkq);
                    v.set2(k, q, s * vkp + c * vkq);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a.get2(i, i)).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).expect("NaN eigenvalue"));

    let eigenvalues: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let mut vectors = Tensor::zeros(&[n, n]);
    for (new_col, &old_col) in order.iter().enumerate() {
        for k in 0..n {
            vectors.set2(k, new_col, v.get2(k, old_col));
        }
    }
    Ok((eigenvalues, vectors))
}

/// Symmetric positive semi-definite square root. Eigenvalues in
/// `[-clamp_tol, 0)` are clamped to zero; anything below `-clamp_tol` is an
/// error.
pub fn sqrt_psd(m: &Tensor, clamp_tol: f64) -> Result<Tensor> {
    let (eigenvalues, v) = symmetric_eigen(m)?;
    let n = m.rows();
    let mut sqrt_diag = Tensor::zeros(&[n, n]);
    for (i, &lambda) in eigenvalues.iter().enumerate() {
        if lambda < -clamp_tol {
            return Err(Error::NonPsdCovariance { eigenvalue: lambda });
        }
        sqrt_diag.set2(i, i, lambda.max(0.0).sqrt());
    }
    v.matmul(&sqrt_diag)?.matmul(&v.transpose()?)
}
