//! Linear codes with position labels, and the operators the attack is built
//! from: puncturing, restriction, shortening, duality and Schur products.
//!
//! Every position carries the label it had in the code it was derived from,
//! so a set of positions always refers to the original code no matter how
//! many punctures or shortenings were applied in between.

use std::collections::HashMap;
use std::sync::OnceLock;

use thiserror::Error;

use crate::gf::Field;
use crate::linalg::{EchelonBasis, Matrix};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodeError {
    #[error("position {0} is not a label of this code")]
    UnknownPosition(usize),
    #[error("codes have different lengths or position labels")]
    LengthMismatch,
    #[error("duplicate position label {0}")]
    DuplicateLabel(usize),
    #[error("generator has {cols} columns but {labels} labels")]
    LabelCount { cols: usize, labels: usize },
}

/// A code given by a (possibly rank-deficient) generator matrix.
#[derive(Clone, Debug)]
pub struct LinearCode {
    generator: Matrix,
    labels: Vec<usize>,
    dim: OnceLock<usize>,
}

impl PartialEq for LinearCode {
    /// Same labels and same row space.
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels && self.generator.same_row_space(&other.generator)
    }
}

impl LinearCode {
    /// Code with labels 0..n.
    pub fn new(generator: Matrix) -> Self {
        let labels = (0..generator.cols()).collect();
        LinearCode {
            generator,
            labels,
            dim: OnceLock::new(),
        }
    }

    pub fn with_labels(generator: Matrix, labels: Vec<usize>) -> Result<Self, CodeError> {
        if labels.len() != generator.cols() {
            return Err(CodeError::LabelCount {
                cols: generator.cols(),
                labels: labels.len(),
            });
        }
        let mut seen = std::collections::HashSet::with_capacity(labels.len());
        if let Some(&dup) = labels.iter().find(|&&l| !seen.insert(l)) {
            return Err(CodeError::DuplicateLabel(dup));
        }
        Ok(LinearCode {
            generator,
            labels,
            dim: OnceLock::new(),
        })
    }

    /// The whole space F_q^n.
    pub fn full_space(field: &Field, n: usize) -> Self {
        Self::new(Matrix::identity(field, n))
    }

    pub fn zero_code(field: &Field, labels: Vec<usize>) -> Self {
        let g = Matrix::zeros(field, 0, labels.len());
        Self::with_labels(g, labels).expect("labels are distinct")
    }

    pub fn generator(&self) -> &Matrix {
        &self.generator
    }

    pub fn field(&self) -> &Field {
        self.generator.field()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        *self.dim.get_or_init(|| self.generator.rank())
    }

    fn label_index(&self) -> HashMap<usize, usize> {
        self.labels.iter().enumerate().map(|(i, &l)| (l, i)).collect()
    }

    /// Column indices of `positions`, in the order given.
    pub fn columns_of(&self, positions: &[usize]) -> Result<Vec<usize>, CodeError> {
        let index = self.label_index();
        positions
            .iter()
            .map(|p| index.get(p).copied().ok_or(CodeError::UnknownPosition(*p)))
            .collect()
    }

    fn split_columns(&self, positions: &[usize]) -> Result<(Vec<usize>, Vec<usize>), CodeError> {
        let picked = self.columns_of(positions)?;
        let mut mask = vec![false; self.len()];
        for &c in &picked {
            mask[c] = true;
        }
        let rest = (0..self.len()).filter(|&c| !mask[c]).collect();
        Ok((picked, rest))
    }

    fn from_columns(&self, generator: Matrix, cols: &[usize]) -> LinearCode {
        LinearCode {
            generator,
            labels: cols.iter().map(|&c| self.labels[c]).collect(),
            dim: OnceLock::new(),
        }
    }

    /// Removes the positions in `positions`.
    pub fn puncture(&self, positions: &[usize]) -> Result<LinearCode, CodeError> {
        let (_, keep) = self.split_columns(positions)?;
        Ok(self.from_columns(self.generator.select_columns(&keep), &keep))
    }

    /// Keeps only the positions in `positions` (in the code's own order).
    pub fn restrict(&self, positions: &[usize]) -> Result<LinearCode, CodeError> {
        let (mut keep, _) = self.split_columns(positions)?;
        keep.sort_unstable();
        keep.dedup();
        Ok(self.from_columns(self.generator.select_columns(&keep), &keep))
    }

    /// Subcode vanishing on `positions`, punctured there.
    pub fn shorten(&self, positions: &[usize]) -> Result<LinearCode, CodeError> {
        let (cols, keep) = self.split_columns(positions)?;
        let mut g = self.generator.clone();
        // after eliminating on the shortened columns, the rows below the
        // pivots vanish there and span the subcode
        let pivots = g.eliminate_in_place(&cols, false);
        let survivors: Vec<usize> = (pivots.len()..g.rows()).collect();
        let sub = g.select_rows(&survivors).select_columns(&keep);
        Ok(self.from_columns(sub, &keep))
    }

    /// The dual code, generated by a parity-check matrix of `self`.
    pub fn dual(&self) -> LinearCode {
        LinearCode {
            generator: self.generator.right_kernel(),
            labels: self.labels.clone(),
            dim: OnceLock::new(),
        }
    }

    /// Reduced basis of the code (rank many rows).
    pub fn basis(&self) -> Matrix {
        self.generator.row_basis()
    }

    /// Relabels position `labels[i]` as `sigma(labels[i])`.
    pub fn permute(&self, sigma: impl Fn(usize) -> usize) -> LinearCode {
        LinearCode {
            generator: self.generator.clone(),
            labels: self.labels.iter().map(|&l| sigma(l)).collect(),
            dim: self.dim.clone(),
        }
    }

    /// Same code with columns sorted by label.
    pub fn sorted_by_label(&self) -> LinearCode {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by_key(|&c| self.labels[c]);
        self.from_columns(self.generator.select_columns(&order), &order)
    }

    pub fn contains(&self, word: &[u16]) -> bool {
        let mut basis = EchelonBasis::new(self.field(), self.len());
        for r in 0..self.generator.rows() {
            basis.insert(self.generator.row(r).to_vec());
        }
        basis.contains(word)
    }

    /// Schur product: span of all componentwise products of codewords.
    pub fn star_product(&self, other: &LinearCode) -> Result<LinearCode, CodeError> {
        if self.labels != other.labels || self.field() != other.field() {
            return Err(CodeError::LengthMismatch);
        }
        let a = self.basis();
        let b = if std::ptr::eq(self, other) {
            a.clone()
        } else {
            other.basis()
        };
        let symmetric = std::ptr::eq(self, other) || a == b;
        let basis = span_of_products(&a, &b, symmetric);
        let dim = basis.rank();
        Ok(LinearCode {
            generator: basis.into_matrix(),
            labels: self.labels.clone(),
            dim: OnceLock::from(dim),
        })
    }

    pub fn square(&self) -> LinearCode {
        self.star_product(self).expect("a code matches itself")
    }

    /// Dimension of the square code without keeping its generator.
    pub fn square_dim(&self) -> usize {
        let a = self.basis();
        span_of_products(&a, &a, true).rank()
    }
}

/// Inserts the products a_i * b_j (i <= j when symmetric) into an echelon
/// basis, stopping early once the span fills the ambient space.
fn span_of_products(a: &Matrix, b: &Matrix, symmetric: bool) -> EchelonBasis {
    let field = a.field();
    let n = a.cols();
    let mut basis = EchelonBasis::new(field, n);
    let mut prod = vec![0u16; n];
    'outer: for i in 0..a.rows() {
        let start = if symmetric { i } else { 0 };
        for j in start..b.rows() {
            if basis.rank() == n {
                break 'outer;
            }
            field.hadamard(a.row(i), b.row(j), &mut prod);
            basis.insert(prod.clone());
        }
    }
    basis
}
