//! Dense row-major matrices, vector helpers and a Cholesky factorization.
//!
//! Everything here is sized for desk-scale problems (n up to a few
//! thousand), so there is no blocking and no sparse storage.

use crate::error::{Error, Result};

/// A real vector. Kept as a plain `Vec<f64>` so callers can use slices and
/// iterators directly.
pub type Signal = Vec<f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// Builds a matrix from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch(format!(
                "matrix must be at least 1x1, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("matrix entries"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Self::from_row_major(rows.len(), ncols, rows.concat())
    }

    /// Builds a matrix column by column; `f(i, j)` gives entry (i, j).
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::from_row_major(rows, cols, data)
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self { rows: n, cols: n, data }
    }

    pub fn diag(values: &[f64]) -> Result<Self> {
        let n = values.len();
        let mut data = vec![0.0; n * n];
        for (i, v) in values.iter().enumerate() {
            data[i * n + i] = *v;
        }
        Self::from_row_major(n, n, data)
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
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Signal {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut data = vec![0.0; self.data.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                data[j * self.rows + i] = self.get(i, j);
            }
        }
        Self { rows: self.cols, cols: self.rows, data }
    }

    /// Columns listed in `indices`, in that order.
    pub fn select_columns(&self, indices: &[usize]) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&j| j >= self.cols) {
            return Err(Error::DimensionMismatch(format!(
                "column {bad} out of range for {} columns",
                self.cols
            )));
        }
        Self::from_fn(self.rows, indices.len(), |i, k| self.get(i, indices[k]))
    }

    /// `A x` written into `out`.
    pub fn mul_vec_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (o, row) in out.iter_mut().zip(self.data.chunks_exact(self.cols)) {
            *o = dot(row, x);
        }
    }

    /// `Aᵀ y` written into `out`.
    pub fn mul_t_vec_into(&self, y: &[f64], out: &mut [f64]) {
        debug_assert_eq!(y.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        out.fill(0.0);
        for (&yi, row) in y.iter().zip(self.data.chunks_exact(self.cols)) {
            if yi != 0.0 {
                axpy(yi, row, out);
            }
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Signal {
        let mut out = vec![0.0; self.rows];
        self.mul_vec_into(x, &mut out);
        out
    }

    pub fn mul_t_vec(&self, y: &[f64]) -> Signal {
        let mut out = vec![0.0; self.cols];
        self.mul_t_vec_into(y, &mut out);
        out
    }

    /// `A Aᵀ` (rows × rows).
    pub fn gram_rows(&self) -> Self {
        let m = self.rows;
        let mut data = vec![0.0; m * m];
        for i in 0..m {
            for k in 0..=i {
                let v = dot(self.row(i), self.row(k));
                data[i * m + k] = v;
                data[k * m + i] = v;
            }
        }
        Self { rows: m, cols: m, data }
    }

    /// `Aᵀ A` (cols × cols).
    pub fn gram_cols(&self) -> Self {
        self.transpose().gram_rows()
    }

    /// Adds `shift` to the diagonal of a square matrix.
    pub fn shifted_diagonal(mut self, shift: f64) -> Self {
        let n = self.rows.min(self.cols);
        for i in 0..n {
            self.data[i * self.cols + i] += shift;
        }
        self
    }
}

/// `A x`, checking dimensions.
pub fn matvec(a: &DenseMatrix, x: &[f64]) -> Result<Signal> {
    if x.len() != a.cols() {
        return Err(Error::DimensionMismatch(format!(
            "matvec: {}x{} matrix with vector of length {}",
            a.rows(),
            a.cols(),
            x.len()
        )));
    }
    Ok(a.mul_vec(x))
}

/// `Aᵀ y`, checking dimensions.
pub fn matvec_t(a: &DenseMatrix, y: &[f64]) -> Result<Signal> {
    if y.len() != a.rows() {
        return Err(Error::DimensionMismatch(format!(
            "matvec_t: {}x{} matrix with vector of length {}",
            a.rows(),
            a.cols(),
            y.len()
        )));
    }
    Ok(a.mul_t_vec(y))
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    // Independent accumulators let the compiler vectorize without fast-math.
    let mut acc = [0.0f64; 8];
    let (ca, cb) = (a.chunks_exact(8), b.chunks_exact(8));
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for k in 0..8 {
            acc[k] += x[k] * y[k];
        }
    }
    let mut s = ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]));
    for (x, y) in ra.iter().zip(rb) {
        s += x * y;
    }
    s
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

pub fn norm1(x: &[f64]) -> f64 {
    x.iter().map(|v| v.abs()).sum()
}

pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Cholesky factor `M = L Lᵀ` of a symmetric positive-definite matrix.
///
/// Immutable once built, so one factor can be shared by concurrent solves.
#[derive(Debug, Clone)]
pub struct SpdFactor {
    n: usize,
    // lower triangle, row-major, full n×n storage
    l: Vec<f64>,
}

impl SpdFactor {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `M x = r`.
    pub fn solve(&self, r: &[f64]) -> Signal {
        let mut x = r.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.n;
        debug_assert_eq!(x.len(), n);
        // L z = r
        for i in 0..n {
            let row = &self.l[i * n..i * n + i];
            let s = x[i] - dot(row, &x[..i]);
            x[i] = s / self.l[i * n + i];
        }
        // Lᵀ x = z
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..n {
                s -= self.l[k * n + i] * x[k];
            }
            x[i] = s / self.l[i * n + i];
        }
    }

    /// Diagonal of `M⁻¹`, computed column by column.
    pub fn inverse_diagonal(&self) -> Signal {
        let n = self.n;
        let mut out = Vec::with_capacity(n);
        let mut e = vec![0.0; n];
        for i in 0..n {
            e.fill(0.0);
            e[i] = 1.0;
            self.solve_in_place(&mut e);
            out.push(e[i]);
        }
        out
    }
}

/// Factors a symmetric positive-definite matrix.
pub fn factor_spd(m: &DenseMatrix) -> Result<SpdFactor> {
    let n = m.rows();
    if m.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "factor_spd needs a square matrix, got {}x{}",
            n,
            m.cols()
        )));
    }
    let scale = m.as_slice().iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1.0);
    for i in 0..n {
        for j in 0..i {
            if (m.get(i, j) - m.get(j, i)).abs() > 1e-12 * scale {
                return Err(Error::InvalidParameter(format!(
                    "matrix not symmetric at ({i}, {j})"
                )));
            }
        }
    }
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let s = m.get(i, j) - dot(&l[i * n..i * n + j], &l[j * n..j * n + j]);
            if i == j {
                // Pivots at rounding level relative to the diagonal mean the
                // matrix is singular in floating point.
                if s <= n as f64 * f64::EPSILON * m.get(i, i).abs() || !s.is_finite() {
                    return Err(Error::NotSpd { row: i, pivot: s });
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Ok(SpdFactor { n, l })
}

/// Strictly increasing set of indices below some ambient length.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct SupportSet {
    indices: Vec<usize>,
}

impl SupportSet {
    /// Sorts and validates `indices` against the ambient length `n`.
    pub fn new(mut indices: Vec<usize>, n: usize) -> Result<Self> {
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter("duplicate support index".into()));
        }
        if indices.last().is_some_and(|&j| j >= n) {
            return Err(Error::InvalidParameter(format!("support index out of range for n={n}")));
        }
        Ok(Self { indices })
    }

    /// Indices of the nonzero entries of `x`.
    pub fn of(x: &[f64]) -> Self {
        Self {
            indices: x.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(j, _)| j).collect(),
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, j: usize) -> bool {
        self.indices.binary_search(&j).is_ok()
    }

    /// Smallest wrap-around distance between two members on a circle of
    /// length `n`; `None` for fewer than two members.
    pub fn min_circular_gap(&self, n: usize) -> Option<usize> {
        if self.indices.len() < 2 {
            return None;
        }
        let mut best = n + self.indices[0] - self.indices[self.indices.len() - 1];
        for w in self.indices.windows(2) {
            best = best.min(w[1] - w[0]);
        }
        Some(best)
    }
}
