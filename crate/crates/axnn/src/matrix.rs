//! Dense row-major `f64` matrix and the handful of kernels the trainer needs.
//!
//! This is the sole numeric container in the crate. Shapes are validated at
//! the public API boundary and reported with both operand shapes in the error.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Dense 2-D array of `f64` in row-major order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Build from a row-major buffer; `data.len()` must equal `rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "buffer of length {} cannot form a {}x{} matrix",
                data.len(),
                rows,
                cols
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn identity(n: usize) -> Self {
        Matrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Sum of each row; length `rows`.
    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows).map(|i| self.row(i).iter().sum()).collect()
    }

    /// Sum of each column; length `cols`.
    pub fn col_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (o, v) in out.iter_mut().zip(self.row(i)) {
                *o += v;
            }
        }
        out
    }

    /// Copy the given rows into a new matrix (used for batching and splits).
    pub fn take_rows(&self, indices: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(indices.len(), self.cols);
        for (dst, &src) in indices.iter().enumerate() {
            out.row_mut(dst).copy_from_slice(self.row(src));
        }
        out
    }
}

/// General matrix multiply with transpose flags: `op(a) * op(b)`.
///
/// Inner dimensions must agree after applying the flags; the error message
/// reports both effective shapes.
pub fn gemm(a: &Matrix, b: &Matrix, transpose_a: bool, transpose_b: bool) -> Result<Matrix> {
    let (m, ka) = if transpose_a {
        (a.cols, a.rows)
    } else {
        (a.rows, a.cols)
    };
    let (kb, n) = if transpose_b {
        (b.cols, b.rows)
    } else {
        (b.rows, b.cols)
    };
    if ka != kb {
        return Err(Error::Shape(format!(
            "gemm inner dimensions disagree: op(a) is {}x{}, op(b) is {}x{}",
            m, ka, kb, n
        )));
    }
    let k = ka;
    let mut c = Matrix::zeros(m, n);

    match (transpose_a, transpose_b) {
        (false, false) => {
            // c[i,:] += a[i,l] * b[l,:]
            for i in 0..m {
                let arow = a.row(i);
                let crow = c.row_mut(i);
                for (l, &ail) in arow.iter().enumerate() {
                    if ail == 0.0 {
                        continue;
                    }
                    for (cv, &bv) in crow.iter_mut().zip(b.row(l)) {
                        *cv += ail * bv;
                    }
                }
            }
        }
        (false, true) => {
            // c[i,j] = dot(a.row(i), b.row(j))
            for i in 0..m {
                let arow = a.row(i);
                let crow = c.row_mut(i);
                for (j, cv) in crow.iter_mut().enumerate() {
                    let brow = b.row(j);
                    let mut acc = 0.0;
                    for (&av, &bv) in arow.iter().zip(brow) {
                        acc += av * bv;
                    }
                    *cv = acc;
                }
            }
        }
        (true, false) => {
            // c[i,:] += a[l,i] * b[l,:]
            for l in 0..k {
                let arow = a.row(l);
                let brow = b.row(l);
                for (i, &ali) in arow.iter().enumerate() {
                    if ali == 0.0 {
                        continue;
                    }
                    let crow = c.row_mut(i);
                    for (cv, &bv) in crow.iter_mut().zip(brow) {
                        *cv += ali * bv;
                    }
                }
            }
        }
        (true, true) => {
            for i in 0..m {
                for j in 0..n {
                    let mut acc = 0.0;
                    for l in 0..k {
                        acc += a.get(l, i) * b.get(j, l);
                    }
                    c.set(i, j, acc);
                }
            }
        }
    }
    Ok(c)
}
