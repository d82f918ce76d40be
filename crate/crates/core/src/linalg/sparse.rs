//! Compressed sparse row storage with a compressed-column mirror.
//!
//! Every PDHG iteration needs both `K x` and `K^T y`. The column mirror is
//! built once at construction so the transpose product is a sequence of
//! contiguous dot products instead of a scatter.

use crate::error::DimensionError;

#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    // column mirror
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    col_values: Vec<f64>,
}

/// Problems found while building a matrix from triplets.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SparseBuildError {
    #[error("entry ({row}, {col}) outside a {rows}x{cols} matrix")]
    OutOfRange {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },
    #[error("entry ({row}, {col}) is not finite: {value}")]
    NonFinite { row: usize, col: usize, value: f64 },
}

impl SparseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            row_ptr: vec![0; rows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
            col_ptr: vec![0; cols + 1],
            row_idx: Vec::new(),
            col_values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, n, (0..n).map(|i| (i, i, 1.0))).expect("identity is well formed")
    }

    /// Builds a matrix from `(row, col, value)` triplets. Duplicate positions
    /// are summed and entries that end up exactly zero are dropped.
    pub fn from_triplets<I>(rows: usize, cols: usize, triplets: I) -> Result<Self, SparseBuildError>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut entries: Vec<(usize, usize, f64)> = Vec::new();
        for (row, col, value) in triplets {
            if row >= rows || col >= cols {
                return Err(SparseBuildError::OutOfRange { row, col, rows, cols });
            }
            if !value.is_finite() {
                return Err(SparseBuildError::NonFinite { row, col, value });
            }
            entries.push((row, col, value));
        }
        entries.sort_by_key(|a| (a.0, a.1));

        let mut row_ptr = vec![0usize; rows + 1];
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        let mut iter = entries.into_iter().peekable();
        while let Some((row, col, mut value)) = iter.next() {
            while let Some(&(r, c, v)) = iter.peek() {
                if r == row && c == col {
                    value += v;
                    iter.next();
                } else {
                    break;
                }
            }
            if value != 0.0 {
                row_ptr[row + 1] += 1;
                col_idx.push(col);
                values.push(value);
            }
        }
        for i in 0..rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(Self::from_csr_parts(rows, cols, row_ptr, col_idx, values))
    }

    /// Assembles from already-sorted CSR arrays and builds the column mirror.
    fn from_csr_parts(
        rows: usize,
        cols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Self {
        let nnz = values.len();
        let mut col_ptr = vec![0usize; cols + 1];
        for &c in &col_idx {
            col_ptr[c + 1] += 1;
        }
        for j in 0..cols {
            col_ptr[j + 1] += col_ptr[j];
        }
        let mut next = col_ptr.clone();
        let mut row_idx = vec![0usize; nnz];
        let mut col_values = vec![0.0; nnz];
        for i in 0..rows {
            for k in row_ptr[i]..row_ptr[i + 1] {
                let c = col_idx[k];
                let slot = next[c];
                row_idx[slot] = i;
                col_values[slot] = values[k];
                next[c] += 1;
            }
        }
        Self {
            rows,
            cols,
            row_ptr,
            col_idx,
            values,
            col_ptr,
            row_idx,
            col_values,
        }
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let triplets = rows
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().enumerate().map(move |(j, &v)| (i, j, v)));
        Self::from_triplets(nrows, ncols, triplets).expect("dense input must be finite and rectangular")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[range.clone()], &self.values[range])
    }

    /// Row indices and values of column `j`.
    pub fn col(&self, j: usize) -> (&[usize], &[f64]) {
        let range = self.col_ptr[j]..self.col_ptr[j + 1];
        (&self.row_idx[range.clone()], &self.col_values[range])
    }

    /// Iterates `(row, col, value)` in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&j, &v)| (i, j, v))
        })
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.cols]; self.rows];
        for (i, j, v) in self.triplets() {
            dense[i][j] = v;
        }
        dense
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    pub fn row_inf_norms(&self) -> Vec<f64> {
        (0..self.rows)
            .map(|i| self.row(i).1.iter().fold(0.0f64, |acc, v| acc.max(v.abs())))
            .collect()
    }

    pub fn col_inf_norms(&self) -> Vec<f64> {
        (0..self.cols)
            .map(|j| self.col(j).1.iter().fold(0.0f64, |acc, v| acc.max(v.abs())))
            .collect()
    }

    /// `M x`.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>, DimensionError> {
        DimensionError::check("matvec input", self.cols, x.len())?;
        let mut out = vec![0.0; self.rows];
        self.matvec_into(x, &mut out);
        Ok(out)
    }

    /// `M^T y`.
    pub fn matvec_transpose(&self, y: &[f64]) -> Result<Vec<f64>, DimensionError> {
        DimensionError::check("matvec_transpose input", self.rows, y.len())?;
        let mut out = vec![0.0; self.cols];
        self.matvec_transpose_into(y, &mut out);
        Ok(out)
    }

    /// Unchecked `out = M x` for the iteration hot path.
    pub fn matvec_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (i, o) in out.iter_mut().enumerate() {
            let range = self.row_ptr[i]..self.row_ptr[i + 1];
            *o = self.col_idx[range.clone()]
                .iter()
                .zip(&self.values[range])
                .map(|(&j, &v)| v * x[j])
                .sum();
        }
    }

    /// Unchecked `out = M^T y` for the iteration hot path.
    pub fn matvec_transpose_into(&self, y: &[f64], out: &mut [f64]) {
        debug_assert_eq!(y.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        for (j, o) in out.iter_mut().enumerate() {
            let range = self.col_ptr[j]..self.col_ptr[j + 1];
            *o = self.row_idx[range.clone()]
                .iter()
                .zip(&self.col_values[range])
                .map(|(&i, &v)| v * y[i])
                .sum();
        }
    }

    /// Returns `diag(row_scale) * M * diag(col_scale)`.
    pub fn scaled(&self, row_scale: &[f64], col_scale: &[f64]) -> Self {
        assert_eq!(row_scale.len(), self.rows);
        assert_eq!(col_scale.len(), self.cols);
        let mut values = self.values.clone();
        for i in 0..self.rows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                values[k] *= row_scale[i] * col_scale[self.col_idx[k]];
            }
        }
        let mut col_values = self.col_values.clone();
        for j in 0..self.cols {
            for k in self.col_ptr[j]..self.col_ptr[j + 1] {
                col_values[k] *= row_scale[self.row_idx[k]] * col_scale[j];
            }
        }
        Self {
            values,
            col_values,
            ..self.clone()
        }
    }

    /// Stacks `self` on top of `other`.
    pub fn vstack(&self, other: &SparseMatrix) -> Result<Self, DimensionError> {
        DimensionError::check("vstack column count", self.cols, other.cols)?;
        let mut row_ptr = self.row_ptr.clone();
        let base = self.nnz();
        row_ptr.extend(other.row_ptr[1..].iter().map(|p| p + base));
        let mut col_idx = self.col_idx.clone();
        col_idx.extend_from_slice(&other.col_idx);
        let mut values = self.values.clone();
        values.extend_from_slice(&other.values);
        Ok(Self::from_csr_parts(
            self.rows + other.rows,
            self.cols,
            row_ptr,
            col_idx,
            values,
        ))
    }

    /// Rows `start..end` as a new matrix.
    pub fn row_block(&self, start: usize, end: usize) -> Self {
        assert!(start <= end && end <= self.rows);
        let offset = self.row_ptr[start];
        let row_ptr = self.row_ptr[start..=end].iter().map(|p| p - offset).collect();
        let range = self.row_ptr[start]..self.row_ptr[end];
        Self::from_csr_parts(
            end - start,
            self.cols,
            row_ptr,
            self.col_idx[range.clone()].to_vec(),
            self.values[range].to_vec(),
        )
    }

    /// Checks the structural invariants: monotone offsets, in-range and
    /// strictly increasing column indices, finite nonzero values.
    pub fn is_well_formed(&self) -> bool {
        if self.row_ptr.len() != self.rows + 1 || self.row_ptr[self.rows] != self.nnz() {
            return false;
        }
        (0..self.rows).all(|i| {
            let (cols, vals) = self.row(i);
            self.row_ptr[i] <= self.row_ptr[i + 1]
                && cols.windows(2).all(|w| w[0] < w[1])
                && cols.iter().all(|&c| c < self.cols)
                && vals.iter().all(|v| v.is_finite() && *v != 0.0)
        })
    }
}
