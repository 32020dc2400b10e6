//! Dense row-major tensors of `f64` plus the handful of numerically careful
//! primitives the rest of the crate is built on.
//!
//! Tensors are immutable values once constructed; every operation returns a
//! fresh tensor. Layout is row-major so serialized data is portable across
//! implementations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense multi-dimensional array of 64-bit reals, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    /// Builds a tensor, checking that `shape` is non-degenerate and matches
    /// the data length.
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        if shape.is_empty() || shape.iter().any(|&d| d == 0) {
            return Err(Error::InvalidArgument(format!(
                "invalid tensor shape {shape:?}: dimensions must be positive"
            )));
        }
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(Error::LengthMismatch {
                expected,
                got: data.len(),
            });
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: &[usize]) -> Self {
        let len: usize = shape.iter().product();
        assert!(
            !shape.is_empty() && len > 0,
            "zeros: invalid shape {shape:?}"
        );
        Self {
            shape: shape.to_vec(),
            data: vec![0.0; len],
        }
    }

    pub fn filled(shape: &[usize], value: f64) -> Self {
        let mut t = Self::zeros(shape);
        t.data.iter_mut().for_each(|x| *x = value);
        t
    }

    /// Identity matrix of side `n`.
    pub fn identity(n: usize) -> Self {
        let mut t = Self::zeros(&[n, n]);
        for i in 0..n {
            t.data[i * n + i] = 1.0;
        }
        t
    }

    /// Convenience rank-2 constructor from nested rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::EmptyInput("from_rows"));
        }
        let cols = rows[0].len();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(Error::LengthMismatch {
                    expected: cols,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Tensor::new(vec![rows.len(), cols], data)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    /// Rows of a rank-2 tensor. Panics on other ranks (programmer error).
    pub fn rows(&self) -> usize {
        assert_eq!(self.rank(), 2, "rows: tensor is not rank-2");
        self.shape[0]
    }

    pub fn cols(&self) -> usize {
        assert_eq!(self.rank(), 2, "cols: tensor is not rank-2");
        self.shape[1]
    }

    pub fn get2(&self, i: usize, j: usize) -> f64 {
        debug_assert_eq!(self.rank(), 2);
        self.data[i * self.shape[1] + j]
    }

    pub fn set2(&mut self, i: usize, j: usize, v: f64) {
        debug_assert_eq!(self.rank(), 2);
        self.data[i * self.shape[1] + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        debug_assert_eq!(self.rank(), 2);
        let c = self.shape[1];
        &self.data[i * c..(i + 1) * c]
    }

    pub fn same_shape(&self, other: &Tensor) -> bool {
        self.shape == other.shape
    }

    fn check_same_shape(&self, other: &Tensor) -> Result<()> {
        if !self.same_shape(other) {
            return Err(Error::ShapeMismatch {
                expected: self.shape.clone(),
                got: other.shape.clone(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Tensor) -> Result<Tensor> {
        self.check_same_shape(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Tensor {
            shape: self.shape.clone(),
            data,
        })
    }

    pub fn sub(&self, other: &Tensor) -> Result<Tensor> {
        self.check_same_shape(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Tensor {
            shape: self.shape.clone(),
            data,
        })
    }

    pub fn scale(&self, factor: f64) -> Tensor {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|a| a * factor).collect(),
        }
    }

    pub fn hadamard(&self, other: &Tensor) -> Result<Tensor> {
        self.check_same_shape(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a * b)
            .collect();
        Ok(Tensor {
            shape: self.shape.clone(),
            data,
        })
    }

    /// Inner product of the flattened entries. Shapes must carry the same
    /// number of entries.
    pub fn dot(&self, other: &Tensor) -> Result<f64> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a * b)
            .sum())
    }

    /// Rank-2 matrix product.
    pub fn matmul(&self, other: &Tensor) -> Result<Tensor> {
        if self.rank() != 2 || other.rank() != 2 || self.cols() != other.rows() {
            return Err(Error::ShapeMismatch {
                expected: self.shape.clone(),
                got: other.shape.clone(),
            });
        }
        let (m, k, n) = (self.rows(), self.cols(), other.cols());
        let mut out = Tensor::zeros(&[m, n]);
        for i in 0..m {
            for p in 0..k {
                let a = self.data[i * k + p];
                if a == 0.0 {
                    continue;
                }
                let row = &other.data[p * n..(p + 1) * n];
                let dst = &mut out.data[i * n..(i + 1) * n];
                for j in 0..n {
                    dst[j] += a * row[j];
                }
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> Result<Tensor> {
        if self.rank() != 2 {
            return Err(Error::InvalidArgument(format!(
                "transpose: expected rank-2, got shape {:?}",
                self.shape
            )));
        }
        let (m, n) = (self.rows(), self.cols());
        let mut out = Tensor::zeros(&[n, m]);
        for i in 0..m {
            for j in 0..n {
                out.data[j * m + i] = self.data[i * n + j];
            }
        }
        Ok(out)
    }

    /// Square root of the sum of squared entries, any rank.
    pub fn frobenius_norm(&self) -> Result<f64> {
        if self.data.is_empty() {
            return Err(Error::EmptyInput("frobenius_norm"));
        }
        Ok(self.data.iter().map(|x| x * x).sum::<f64>().sqrt())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn is_all_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0.0)
    }
}

/// Root mean square of all entries.
pub fn rms(t: &Tensor) -> Result<f64> {
    if t.is_empty() {
        return Err(Error::EmptyInput("rms"));
    }
    let mean_sq = t.data().iter().map(|x| x * x).sum::<f64>() / t.len() as f64;
    Ok(mean_sq.sqrt())
}

/// Row-wise softmax of a rank-2 tensor, stabilized by per-row max
/// subtraction. Every output row sums to 1 and every entry is in (0, 1].
pub fn softmax_rows(m: &Tensor) -> Result<Tensor> {
    if m.is_empty() {
        return Err(Error::EmptyInput("softmax_rows"));
    }
    if m.rank() != 2 {
        return Err(Error::InvalidArgument(format!(
            "softmax_rows: expected rank-2, got shape {:?}",
            m.shape()
        )));
    }
    let (rows, cols) = (m.rows(), m.cols());
    let mut out = Tensor::zeros(&[rows, cols]);
    for i in 0..rows {
        let row = m.row(i);
        let max = row.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let mut sum = 0.0;
        for j in 0..cols {
            let e = (row[j] - max).exp();
            out.set2(i, j, e);
            sum += e;
        }
        for j in 0..cols {
            let v = out.get2(i, j) / sum;
            out.set2(i, j, v);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn softmax_symmetry() {
        let m = Tensor::from_rows(&[vec![1.0, 1.0]]).unwrap();
        let s = softmax_rows(&m).unwrap();
        assert_close(s.get2(0, 0), 0.5, 1e-15);
        assert_close(s.get2(0, 1), 0.5, 1e-15);
    }

    #[test]
    fn softmax_direct_evaluation() {
        // [[0, ln 3]] -> [0.25, 0.75]
        let m = Tensor::from_rows(&[vec![0.0, 3.0_f64.ln()]]).unwrap();
        let s = softmax_rows(&m).unwrap();
        assert_close(s.get2(0, 0), 0.25, 1e-12);
        assert_close(s.get2(0, 1), 0.75, 1e-12);
    }

    #[test]
    fn softmax_shift_invariance_constant() {
        let m = Tensor::from_rows(&[vec![5.0, 5.0], vec![5.0, 5.0]]).unwrap();
        let s = softmax_rows(&m).unwrap();
        for &v in s.data() {
            assert_close(v, 0.5, 1e-15);
        }
    }

    #[test]
    fn softmax_empty_is_error() {
        assert!(Tensor::new(vec![0, 2], vec![]).is_err());
    }

    #[test]
    fn rms_cases() {
        assert_close(rms(&Tensor::new(vec![3], vec![0.0; 3]).unwrap()).unwrap(), 0.0, 0.0);
        let t = Tensor::new(vec![2], vec![3.0, 4.0]).unwrap();
        assert_close(rms(&t).unwrap(), (12.5_f64).sqrt(), 1e-15);
        let c = Tensor::filled(&[7], -2.5);
        assert_close(rms(&c).unwrap(), 2.5, 1e-15);
    }

    #[test]
    fn frobenius_cases() {
        assert_close(
            Tensor::identity(2).frobenius_norm().unwrap(),
            2.0_f64.sqrt(),
            1e-15,
        );
        let m = Tensor::from_rows(&[vec![3.0, 4.0], vec![0.0, 0.0]]).unwrap();
        assert_close(m.frobenius_norm().unwrap(), 5.0, 1e-15);
        assert_close(Tensor::zeros(&[3, 3]).frobenius_norm().unwrap(), 0.0, 0.0);
    }

    #[test]
    fn matmul_identity_roundtrip() {
        let m = Tensor::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let i = Tensor::identity(2);
        assert_eq!(m.matmul(&i).unwrap(), m);
        assert_eq!(i.matmul(&m).unwrap(), m);
    }

    #[test]
    fn transpose_involution() {
        let m = Tensor::from_rows(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]).unwrap();
        assert_eq!(m.transpose().unwrap().transpose().unwrap(), m);
    }
}
