//! Dense matrices over a single GF(2^m).

use std::fmt;

use thiserror::Error;

use crate::gf::Field;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("linear system has no solution")]
    NoSolution,
    #[error("dimension mismatch: {0}")]
    Shape(String),
    #[error("matrix is singular")]
    Singular,
    #[error("operands belong to different fields")]
    FieldMismatch,
    #[error("entry {0} out of range for the field")]
    OutOfRange(u32),
}

/// Row-major dense matrix with entries in one field.
#[derive(Clone)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<u16>,
    field: Field,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} over {:?}", self.rows, self.cols, self.field)?;
        for r in 0..self.rows.min(16) {
            writeln!(f, "  {:?}", &self.row(r)[..self.cols.min(16)])?;
        }
        Ok(())
    }
}

impl PartialEq for Matrix {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self.field == other.field
            && self.data == other.data
    }
}

impl Eq for Matrix {}

impl Matrix {
    pub fn zeros(field: &Field, rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0; rows * cols],
            field: field.clone(),
        }
    }

    pub fn identity(field: &Field, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    /// Builds a matrix from raw rows, validating shape and entry range.
    pub fn from_rows<R: AsRef<[u16]>>(field: &Field, rows: &[R]) -> Result<Self, LinalgError> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        Self::from_rows_with_cols(field, rows, cols)
    }

    /// Like [`Matrix::from_rows`], but keeps the column count when `rows` is empty.
    pub fn from_rows_with_cols<R: AsRef<[u16]>>(
        field: &Field,
        rows: &[R],
        cols: usize,
    ) -> Result<Self, LinalgError> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(LinalgError::Shape(format!(
                    "ragged rows: expected {cols} columns, found {}",
                    r.len()
                )));
            }
            if let Some(&bad) = r.iter().find(|&&v| !field.contains(v as u32)) {
                return Err(LinalgError::OutOfRange(bad as u32));
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
            field: field.clone(),
        })
    }

    pub fn from_vec(field: &Field, rows: usize, cols: usize, data: Vec<u16>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::Shape(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(&bad) = data.iter().find(|&&v| !field.contains(v as u32)) {
            return Err(LinalgError::OutOfRange(bad as u32));
        }
        Ok(Matrix {
            rows,
            cols,
            data,
            field: field.clone(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn data(&self) -> &[u16] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u16 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u16) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[u16] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [u16] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<u16> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<u16>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn push_row(&mut self, row: &[u16]) {
        assert_eq!(row.len(), self.cols, "row length mismatch");
        self.data.extend_from_slice(row);
        self.rows += 1;
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(&self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.get(r, c);
            }
        }
        t
    }

    /// Sub-matrix made of the given columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(&self.field, self.rows, cols.len());
        for r in 0..self.rows {
            let src = self.row(r);
            let dst = out.row_mut(r);
            for (d, &c) in dst.iter_mut().zip(cols) {
                *d = src[c];
            }
        }
        out
    }

    pub fn select_rows(&self, rows: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(&self.field, rows.len(), self.cols);
        for (i, &r) in rows.iter().enumerate() {
            out.row_mut(i).copy_from_slice(self.row(r));
        }
        out
    }

    fn check_field(&self, other: &Matrix) -> Result<(), LinalgError> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(LinalgError::FieldMismatch)
        }
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        self.check_field(other)?;
        if self.cols != other.rows {
            return Err(LinalgError::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(&self.field, self.rows, other.cols);
        for r in 0..self.rows {
            let (lhs, acc) = (self.row(r), &mut out.data[r * other.cols..(r + 1) * other.cols]);
            for (k, &a) in lhs.iter().enumerate() {
                self.field.axpy(acc, other.row(k), a);
            }
        }
        Ok(out)
    }

    /// Row vector times matrix: v * M.
    pub fn left_mul_vec(&self, v: &[u16]) -> Result<Vec<u16>, LinalgError> {
        if v.len() != self.rows {
            return Err(LinalgError::Shape(format!(
                "vector of length {} against {} rows",
                v.len(),
                self.rows
            )));
        }
        let mut out = vec![0u16; self.cols];
        for (r, &a) in v.iter().enumerate() {
            self.field.axpy(&mut out, self.row(r), a);
        }
        Ok(out)
    }

    /// Matrix times column vector: M * v.
    pub fn mul_vec(&self, v: &[u16]) -> Result<Vec<u16>, LinalgError> {
        if v.len() != self.cols {
            return Err(LinalgError::Shape(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows).map(|r| self.field.dot(self.row(r), v)).collect())
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let (lo, hi) = (a.min(b), a.max(b));
        let (head, tail) = self.data.split_at_mut(hi * self.cols);
        head[lo * self.cols..(lo + 1) * self.cols].swap_with_slice(&mut tail[..self.cols]);
    }

    /// `rows[dst] += f * rows[src]`.
    fn add_row_multiple(&mut self, dst: usize, src: usize, f: u16) {
        debug_assert_ne!(dst, src);
        let cols = self.cols;
        let (d, s) = if dst < src {
            let (head, tail) = self.data.split_at_mut(src * cols);
            (&mut head[dst * cols..(dst + 1) * cols], &tail[..cols])
        } else {
            let (head, tail) = self.data.split_at_mut(dst * cols);
            (&mut tail[..cols], &head[src * cols..(src + 1) * cols])
        };
        self.field.axpy(d, s, f);
    }

    /// In-place elimination visiting columns in `order`. Pivot rows are
    /// normalized to 1; with `reduced` every other row is cleared in the
    /// pivot column, otherwise only the rows below. Returns the pivot
    /// columns (first nonzero entry wins).
    pub fn eliminate_in_place(&mut self, order: &[usize], reduced: bool) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut next = 0;
        for &c in order {
            if next == self.rows {
                break;
            }
            let Some(p) = (next..self.rows).find(|&r| self.get(r, c) != 0) else {
                continue;
            };
            self.swap_rows(p, next);
            let inv = self.field.inv(self.get(next, c)).expect("nonzero pivot");
            let field = self.field.clone();
            field.scale(self.row_mut(next), inv);
            let start = if reduced { 0 } else { next + 1 };
            for r in start..self.rows {
                if r == next {
                    continue;
                }
                let f = self.get(r, c);
                if f != 0 {
                    self.add_row_multiple(r, next, f);
                }
            }
            pivots.push(c);
            next += 1;
        }
        pivots
    }

    /// Reduced row-echelon form and the pivot columns.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let order: Vec<usize> = (0..self.cols).collect();
        let pivots = m.eliminate_in_place(&order, true);
        (m, pivots)
    }

    /// RREF with zero rows removed.
    pub fn row_basis(&self) -> Matrix {
        let (mut m, pivots) = self.rref();
        m.truncate_rows(pivots.len());
        m
    }

    pub fn truncate_rows(&mut self, rows: usize) {
        if rows < self.rows {
            self.rows = rows;
            self.data.truncate(rows * self.cols);
        }
    }

    pub fn rank(&self) -> usize {
        let mut basis = EchelonBasis::new(&self.field, self.cols);
        for r in 0..self.rows {
            basis.insert(self.row(r).to_vec());
            if basis.rank() == self.cols {
                break;
            }
        }
        basis.rank()
    }

    /// Basis of {v : M v^T = 0}, one vector per row.
    pub fn right_kernel(&self) -> Matrix {
        let (r, pivots) = self.rref();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let free: Vec<usize> = (0..self.cols).filter(|&c| !is_pivot[c]).collect();
        let mut k = Matrix::zeros(&self.field, free.len(), self.cols);
        for (i, &f) in free.iter().enumerate() {
            k.set(i, f, 1);
            // characteristic 2: -x = x
            for (pr, &pc) in pivots.iter().enumerate() {
                k.set(i, pc, r.get(pr, f));
            }
        }
        k
    }

    /// Some x with M x = b, or [`LinalgError::NoSolution`]. Free variables are set to zero.
    pub fn solve(&self, b: &[u16]) -> Result<Vec<u16>, LinalgError> {
        if b.len() != self.rows {
            return Err(LinalgError::Shape(format!(
                "right-hand side of length {} for {} equations",
                b.len(),
                self.rows
            )));
        }
        let mut aug = Matrix::zeros(&self.field, self.rows, self.cols + 1);
        for r in 0..self.rows {
            aug.row_mut(r)[..self.cols].copy_from_slice(self.row(r));
            aug.set(r, self.cols, b[r]);
        }
        let order: Vec<usize> = (0..=self.cols).collect();
        let pivots = aug.eliminate_in_place(&order, true);
        if pivots.last() == Some(&self.cols) {
            return Err(LinalgError::NoSolution);
        }
        let mut x = vec![0u16; self.cols];
        for (r, &c) in pivots.iter().enumerate() {
            x[c] = aug.get(r, self.cols);
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<Matrix, LinalgError> {
        if self.rows != self.cols {
            return Err(LinalgError::Shape("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut aug = Matrix::zeros(&self.field, n, 2 * n);
        for r in 0..n {
            aug.row_mut(r)[..n].copy_from_slice(self.row(r));
            aug.set(r, n + r, 1);
        }
        let order: Vec<usize> = (0..n).collect();
        let pivots = aug.eliminate_in_place(&order, true);
        if pivots.len() < n {
            return Err(LinalgError::Singular);
        }
        let cols: Vec<usize> = (n..2 * n).collect();
        Ok(aug.select_columns(&cols))
    }

    /// True when both matrices span the same row space.
    pub fn same_row_space(&self, other: &Matrix) -> bool {
        self.cols == other.cols && self.field == other.field && self.row_basis() == other.row_basis()
    }
}

/// Incrementally built semi-echelon basis: each stored row is zero at the
/// pivots of the rows inserted before it, so reducing a candidate against
/// the rows in insertion order is exact.
pub struct EchelonBasis {
    field: Field,
    cols: usize,
    rows: Vec<Vec<u16>>,
    pivots: Vec<usize>,
}

impl EchelonBasis {
    pub fn new(field: &Field, cols: usize) -> Self {
        EchelonBasis {
            field: field.clone(),
            cols,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Reduces `v` in place against the basis; the residual is zero iff `v`
    /// was in the span.
    pub fn reduce(&self, v: &mut [u16]) {
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            let f = v[p];
            if f != 0 {
                self.field.axpy(v, row, f);
            }
        }
    }

    pub fn contains(&self, v: &[u16]) -> bool {
        let mut w = v.to_vec();
        self.reduce(&mut w);
        w.iter().all(|&x| x == 0)
    }

    /// Adds `v` to the basis if it is independent. Returns whether the rank grew.
    pub fn insert(&mut self, mut v: Vec<u16>) -> bool {
        debug_assert_eq!(v.len(), self.cols);
        self.reduce(&mut v);
        let Some(p) = v.iter().position(|&x| x != 0) else {
            return false;
        };
        let inv = self.field.inv(v[p]).expect("nonzero pivot");
        self.field.scale(&mut v, inv);
        self.rows.push(v);
        self.pivots.push(p);
        true
    }

    pub fn into_matrix(self) -> Matrix {
        let mut m = Matrix::zeros(&self.field, 0, self.cols);
        for r in &self.rows {
            m.push_row(r);
        }
        m
    }
}
