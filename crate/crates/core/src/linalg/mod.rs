//! Dense real linear algebra: matrices, orthonormal bases grown by
//! Gram–Schmidt, a symmetric eigensolver and seeded Gaussian sampling.

mod basis;
mod eigen;
pub(crate) mod kernels;
mod random;

pub use basis::{orthogonalize, project_complement, OrthonormalBasis, RANK_TOLERANCE};
pub use eigen::{sym_eig_desc, SymEigen};
pub use kernels::{dot, norm};
pub use random::{sample_gaussian, RandomSource};

use crate::error::{check_dim, Error, Result};
use kernels::{gemm, View};

/// A real `rows × cols` matrix stored row-major. Every entry is finite.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::ContractViolation(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        check_dim(rows * cols, data.len())?;
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::ContractViolation(format!(
                "non-finite entry at ({}, {})",
                pos / cols,
                pos % cols
            )));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    /// Callers guarantee the invariants; only checked in debug builds.
    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert!(rows > 0 && cols > 0 && data.len() == rows * cols);
        DenseMatrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        DenseMatrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        m.data.fill(value);
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::new(rows, cols, data)
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            check_dim(cols, r.as_ref().len())?;
            data.extend_from_slice(r.as_ref());
        }
        Self::new(rows.len(), cols, data)
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

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn view(&self) -> View<'_> {
        View::row_major(&self.data, self.rows, self.cols)
    }

    /// Column submatrix `A_S`, columns in the order given.
    pub fn select_columns(&self, cols: &[usize]) -> Result<Self> {
        if cols.is_empty() {
            return Err(Error::ContractViolation("empty column selection".into()));
        }
        if let Some(&bad) = cols.iter().find(|&&c| c >= self.cols) {
            return Err(Error::ContractViolation(format!("column {bad} out of range")));
        }
        let mut data = Vec::with_capacity(self.rows * cols.len());
        for r in self.row_iter() {
            data.extend(cols.iter().map(|&c| r[c]));
        }
        Ok(Self::from_raw(self.rows, cols.len(), data))
    }

    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::ContractViolation("empty row selection".into()));
        }
        let mut data = Vec::with_capacity(rows.len() * self.cols);
        for &r in rows {
            if r >= self.rows {
                return Err(Error::ContractViolation(format!("row {r} out of range")));
            }
            data.extend_from_slice(self.row(r));
        }
        Ok(Self::from_raw(rows.len(), self.cols, data))
    }

    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.cols, x.len())?;
        Ok(self.row_iter().map(|r| dot(r, x)).collect())
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm(&self.data)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn transpose(&self) -> Self {
        let mut data = vec![0.0; self.data.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        Self::from_raw(self.cols, self.rows, data)
    }

    /// Matrix product `self * other`.
    pub fn matmul(&self, other: &DenseMatrix) -> Result<Self> {
        check_dim(self.cols, other.rows)?;
        let mut out = vec![0.0; self.rows * other.cols];
        gemm(1.0, self.view(), other.view(), 0.0, &mut out);
        Ok(Self::from_raw(self.rows, other.cols, out))
    }
}

/// Euclidean norm of every row.
pub fn row_norms(a: &DenseMatrix) -> Vec<f64> {
    a.row_iter().map(norm).collect()
}

/// `BᵀB`, symmetric positive semidefinite.
pub fn gram(b: &DenseMatrix) -> DenseMatrix {
    let n = b.cols;
    let mut out = vec![0.0; n * n];
    gemm(1.0, b.view().t(), b.view(), 0.0, &mut out);
    // gemm blocking can leave the two triangles a rounding apart
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (out[i * n + j] + out[j * n + i]);
            out[i * n + j] = avg;
            out[j * n + i] = avg;
        }
    }
    DenseMatrix::from_raw(n, n, out)
}

/// Row `i` of the result is `a_i (I - VᵀV)`.
pub fn project_rows_complement(a: &DenseMatrix, basis: &OrthonormalBasis) -> Result<DenseMatrix> {
    check_dim(basis.dim(), a.cols)?;
    let mut out = a.data.clone();
    if basis.is_empty() {
        return Ok(DenseMatrix::from_raw(a.rows, a.cols, out));
    }
    let l = basis.len();
    let v = View::row_major(basis.as_slice(), l, a.cols);
    let mut coef = vec![0.0; a.rows * l];
    gemm(1.0, a.view(), v.t(), 0.0, &mut coef);
    gemm(-1.0, View::row_major(&coef, a.rows, l), v, 1.0, &mut out);
    Ok(DenseMatrix::from_raw(a.rows, a.cols, out))
}
