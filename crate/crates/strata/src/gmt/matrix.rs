//! Dense row-major matrices, just large enough for Jacobian work.
//!
//! Charts here live in ambient dimension at most a handful, so there is no
//! point pulling in a linear algebra crate: the only nontrivial operation
//! is the determinant of a small Gram matrix, done by LU with partial
//! pivoting.

use crate::error::{Error, Result};

/// Row-major `rows x cols` matrix of finite floats.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Builds a matrix from row-major data. Every entry must be finite.
    pub fn from_rows(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::contract(format!(
                "matrix data length {} does not match {}x{}",
                data.len(),
                rows,
                cols
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::contract("matrix entries must be finite"));
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Builds a matrix by evaluating `f(row, col)`.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::from_rows(rows, cols, data)
    }

    /// A matrix with a single column.
    pub fn column(entries: &[f64]) -> Result<Self> {
        Self::from_rows(entries.len(), 1, entries.to_vec())
    }

    /// A matrix with a single row.
    pub fn row(entries: &[f64]) -> Result<Self> {
        Self::from_rows(1, entries.len(), entries.to_vec())
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Matrix { rows: n, cols: n, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn transpose(&self) -> Matrix {
        let mut data = vec![0.0; self.data.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                data[j * self.rows + i] = self.get(i, j);
            }
        }
        Matrix { rows: self.cols, cols: self.rows, data }
    }

    pub fn scale(&self, c: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| c * v).collect(),
        }
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::contract(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = vec![0.0; self.rows * other.cols];
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        Matrix::from_rows(self.rows, other.cols, out)
    }

    /// The Gram matrix `A^T A` (square of side `cols`).
    pub fn gram_t(&self) -> Matrix {
        let n = self.cols;
        let mut out = vec![0.0; n * n];
        for a in 0..n {
            for b in a..n {
                let mut s = 0.0;
                for i in 0..self.rows {
                    s += self.get(i, a) * self.get(i, b);
                }
                out[a * n + b] = s;
                out[b * n + a] = s;
            }
        }
        Matrix { rows: n, cols: n, data: out }
    }

    /// Determinant by LU with partial pivoting. Square input only.
    pub fn det(&self) -> Result<f64> {
        if self.rows != self.cols {
            return Err(Error::contract("determinant of a non-square matrix"));
        }
        let n = self.rows;
        if n == 0 {
            // det of the empty matrix; makes 0-dimensional charts uniform.
            return Ok(1.0);
        }
        let mut a = self.data.clone();
        let mut det = 1.0;
        for col in 0..n {
            let mut pivot = col;
            let mut best = a[col * n + col].abs();
            for r in (col + 1)..n {
                let v = a[r * n + col].abs();
                if v > best {
                    best = v;
                    pivot = r;
                }
            }
            if best == 0.0 {
                return Ok(0.0);
            }
            if pivot != col {
                for j in 0..n {
                    a.swap(col * n + j, pivot * n + j);
                }
                det = -det;
            }
            let p = a[col * n + col];
            det *= p;
            for r in (col + 1)..n {
                let factor = a[r * n + col] / p;
                if factor == 0.0 {
                    continue;
                }
                for j in col..n {
                    a[r * n + j] -= factor * a[col * n + j];
                }
            }
        }
        Ok(det)
    }

    pub fn column_vec(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det_of_known_matrices() {
        let m = Matrix::from_rows(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!((m.det().unwrap() + 2.0).abs() < 1e-12);
        let id = Matrix::identity(4);
        assert!((id.det().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn det_of_empty_matrix_is_one() {
        let m = Matrix::from_rows(0, 0, vec![]).unwrap();
        assert_eq!(m.det().unwrap(), 1.0);
    }

    #[test]
    fn gram_matches_explicit_product() {
        let m = Matrix::from_rows(3, 2, vec![1.0, 2.0, 0.0, 1.0, 4.0, -1.0]).unwrap();
        let g = m.gram_t();
        let explicit = m.transpose().matmul(&m).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((g.get(i, j) - explicit.get(i, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn non_finite_entries_rejected() {
        assert!(Matrix::from_rows(1, 1, vec![f64::NAN]).is_err());
    }

    #[test]
    fn singular_matrix_has_zero_det() {
        let m = Matrix::from_rows(2, 2, vec![1.0, 2.0, 2.0, 4.0]).unwrap();
        assert_eq!(m.det().unwrap(), 0.0);
    }
}
