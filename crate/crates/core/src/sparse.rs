//! Compressed sparse row storage with a structurally symmetric pattern.
//!
//! Explicit zeros are kept so that every stored `(i, j)` has a stored
//! partner `(j, i)`; the position of that partner is precomputed.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Sparsity pattern shared between `A`, `D` and `B(U)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    diag: Vec<usize>,
    transpose: Vec<usize>,
}

impl Pattern {
    /// Builds a pattern from per-row neighbor lists; the diagonal is always
    /// included and the result is symmetrized.
    pub fn from_neighbors(neighbors: &[Vec<usize>]) -> Result<Self> {
        let n = neighbors.len();
        let mut rows: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        for (i, nb) in neighbors.iter().enumerate() {
            for &j in nb {
                if j >= n {
                    return Err(Error::InvalidArgument(format!("column {j} out of range for n = {n}")));
                }
                rows[i].push(j);
                rows[j].push(i);
            }
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for row in &mut rows {
            row.sort_unstable();
            row.dedup();
            col_idx.extend_from_slice(row);
            row_ptr.push(col_idx.len());
        }
        let mut p = Self {
            n,
            row_ptr,
            col_idx,
            diag: vec![0; n],
            transpose: Vec::new(),
        };
        for i in 0..n {
            p.diag[i] = p.position(i, i).expect("diagonal is always stored");
        }
        let mut transpose = vec![0; p.col_idx.len()];
        for i in 0..n {
            for k in p.row_ptr[i]..p.row_ptr[i + 1] {
                let j = p.col_idx[k];
                transpose[k] = p.position(j, i).expect("pattern is symmetric");
            }
        }
        p.transpose = transpose;
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    #[inline]
    pub fn row_range(&self, i: usize) -> std::ops::Range<usize> {
        self.row_ptr[i]..self.row_ptr[i + 1]
    }

    #[inline]
    pub fn col(&self, k: usize) -> usize {
        self.col_idx[k]
    }

    pub fn cols(&self, i: usize) -> &[usize] {
        &self.col_idx[self.row_range(i)]
    }

    #[inline]
    pub fn diag(&self, i: usize) -> usize {
        self.diag[i]
    }

    /// Position of the entry `(j, i)` given the position `k` of `(i, j)`.
    #[inline]
    pub fn transpose(&self, k: usize) -> usize {
        self.transpose[k]
    }

    pub fn position(&self, i: usize, j: usize) -> Option<usize> {
        let r = self.row_range(i);
        self.col_idx[r.clone()].binary_search(&j).ok().map(|o| r.start + o)
    }
}

/// `N x N` real matrix in CSR form over a shared [`Pattern`].
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix<T> {
    pattern: Arc<Pattern>,
    values: Vec<T>,
}

impl<T: Scalar> SparseMatrix<T> {
    pub fn zeros(pattern: Arc<Pattern>) -> Self {
        let values = vec![T::zero(); pattern.nnz()];
        Self { pattern, values }
    }

    /// Builds a matrix from a dense row-major array, storing every pair
    /// `(i, j)` for which either `a[i][j]` or `a[j][i]` is nonzero.
    pub fn from_dense(a: &[Vec<T>]) -> Result<Self> {
        let n = a.len();
        if a.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidArgument("dense matrix must be square".into()));
        }
        let neighbors: Vec<Vec<usize>> = (0..n)
            .map(|i| (0..n).filter(|&j| j != i && (a[i][j] != T::zero() || a[j][i] != T::zero())).collect())
            .collect();
        let mut m = Self::zeros(Arc::new(Pattern::from_neighbors(&neighbors)?));
        for i in 0..n {
            for k in m.pattern.row_range(i) {
                m.values[k] = a[i][m.pattern.col(k)];
            }
        }
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.pattern.n
    }

    pub fn pattern(&self) -> &Arc<Pattern> {
        &self.pattern
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    /// Entry `(i, j)`, zero if not stored.
    pub fn get(&self, i: usize, j: usize) -> T {
        self.pattern.position(i, j).map_or(T::zero(), |k| self.values[k])
    }

    /// Adds `v` to a stored entry; errors if `(i, j)` is outside the pattern.
    pub fn add_to(&mut self, i: usize, j: usize, v: T) -> Result<()> {
        match self.pattern.position(i, j) {
            Some(k) => {
                self.values[k] += v;
                Ok(())
            }
            None => Err(Error::InvalidArgument(format!("entry ({i}, {j}) is not in the pattern"))),
        }
    }

    /// Iterates `(column, value)` over the stored entries of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        self.pattern.row_range(i).map(move |k| (self.pattern.col(k), self.values[k]))
    }

    pub fn diag(&self, i: usize) -> T {
        self.values[self.pattern.diag(i)]
    }

    pub fn row_sum(&self, i: usize) -> T {
        self.row(i).fold(T::zero(), |s, (_, v)| s + v)
    }

    /// `(A x)_i`.
    pub fn row_dot(&self, i: usize, x: &[T]) -> T {
        self.row(i).fold(T::zero(), |s, (j, v)| s + v * x[j])
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.n()).map(|i| self.row_dot(i, x)).collect()
    }

    /// `x^T A y`.
    pub fn bilinear(&self, x: &[T], y: &[T]) -> T {
        (0..self.n()).fold(T::zero(), |s, i| s + x[i] * self.row_dot(i, y))
    }

    /// Entrywise sum with another matrix on the same pattern.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if !Arc::ptr_eq(&self.pattern, &other.pattern) && self.pattern != other.pattern {
            return Err(Error::InvalidArgument("matrices have different patterns".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| a + b).collect();
        Ok(Self {
            pattern: self.pattern.clone(),
            values,
        })
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Maximum of `|a_ij - a_ji|` over stored entries.
    pub fn asymmetry(&self) -> T {
        (0..self.values.len()).fold(T::zero(), |m, k| {
            m.max((self.values[k] - self.values[self.pattern.transpose(k)]).abs())
        })
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let n = self.n();
        let mut d = vec![vec![T::zero(); n]; n];
        for (i, row) in d.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        d
    }
}
