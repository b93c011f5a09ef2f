//! Dense row-major matrices and reversible transition matrices.

use crate::error::{Error, Result};
use crate::scalar::{KahanSum, Real};
use std::sync::atomic::{AtomicUsize, Ordering};

/// Worker threads used by matrix products (1 = fully sequential).
/// Output rows are computed independently, so the result is identical
/// for every thread count.
static MATMUL_THREADS: AtomicUsize = AtomicUsize::new(1);

/// Set the matrix-product thread count (clamped to at least 1).
pub fn set_matmul_threads(threads: usize) {
    MATMUL_THREADS.store(threads.max(1), Ordering::Relaxed);
}

/// Current matrix-product thread count.
pub fn matmul_threads() -> usize {
    MATMUL_THREADS.load(Ordering::Relaxed)
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<F> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

impl<F: Real> DenseMatrix<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![F::zero(); rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<F>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        debug_assert!(rows.iter().all(|row| row.len() == c));
        Self {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            *m.at_mut(i, i) = F::one();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> F {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut F {
        &mut self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[F] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [F] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Matrix product with Kahan-compensated accumulation per output
    /// entry (ikj loop order, one compensation array per output row).
    /// Rows are split across [`matmul_threads`] workers; each row is
    /// computed by exactly one worker, so results do not depend on the
    /// thread count.
    pub fn matmul(&self, other: &DenseMatrix<F>) -> DenseMatrix<F> {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        if other.cols == 0 || self.rows == 0 {
            return out;
        }
        let threads = matmul_threads().min(self.rows);
        if threads <= 1 {
            let mut comp = vec![F::zero(); other.cols];
            for i in 0..self.rows {
                Self::matmul_row(
                    self.row(i),
                    other,
                    &mut out.data[i * other.cols..(i + 1) * other.cols],
                    &mut comp,
                );
            }
            return out;
        }
        let chunk_rows = self.rows.div_ceil(threads);
        std::thread::scope(|scope| {
            for (c, out_chunk) in out.data.chunks_mut(chunk_rows * other.cols).enumerate() {
                let first = c * chunk_rows;
                scope.spawn(move || {
                    let mut comp = vec![F::zero(); other.cols];
                    for (r, out_row) in out_chunk.chunks_mut(other.cols).enumerate() {
                        Self::matmul_row(self.row(first + r), other, out_row, &mut comp);
                    }
                });
            }
        });
        out
    }

    fn matmul_row(a_row: &[F], other: &DenseMatrix<F>, out_row: &mut [F], comp: &mut [F]) {
        comp.iter_mut().for_each(|c| *c = F::zero());
        for (k, &a) in a_row.iter().enumerate() {
            if a == F::zero() {
                continue;
            }
            let b_row = &other.data[k * other.cols..(k + 1) * other.cols];
            for j in 0..other.cols {
                let y = a * b_row[j] - comp[j];
                let t = out_row[j] + y;
                comp[j] = (t - out_row[j]) - y;
                out_row[j] = t;
            }
        }
    }

    /// Permute columns: `out[:, j] = self[:, perm[j]]`. This is
    /// multiplication on the right by the 0/1 matrix with a one at
    /// `(perm[j], j)`.
    pub fn permute_cols(&self, perm: &[usize]) -> DenseMatrix<F> {
        assert_eq!(perm.len(), self.cols);
        let mut out = DenseMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for (j, &src) in perm.iter().enumerate() {
                *out.at_mut(i, j) = self.at(i, src);
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &DenseMatrix<F>) -> F {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| (a - b).abs())
            .fold(F::zero(), |m, d| m.max(d))
    }
}

/// Which chain a transition matrix realizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainKind {
    /// Single-site heat bath on colorings.
    HeatBath,
    /// Swendsen-Wang on colorings.
    Sw,
    /// Swendsen-Wang on edge subsets.
    SwRc,
    /// Modified Swendsen-Wang with the dual-graph pass.
    ModifiedSw,
    /// Comparison composite: heat-bath, Swendsen-Wang, heat-bath.
    Composite,
    /// Pinned-slice composite built from flips and the restricted chain.
    PinnedComposite,
    /// Single-site chain restricted to a pinned vertex.
    RestrictedHb,
    /// A power or other derived reversible chain.
    Derived,
}

impl std::fmt::Display for ChainKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ChainKind::HeatBath => "hb",
            ChainKind::Sw => "sw",
            ChainKind::SwRc => "swrc",
            ChainKind::ModifiedSw => "msw",
            ChainKind::Composite => "q",
            ChainKind::PinnedComposite => "qtilde",
            ChainKind::RestrictedHb => "rhb",
            ChainKind::Derived => "derived",
        };
        f.write_str(s)
    }
}

/// Dense reversible transition matrix together with its stationary
/// distribution over the enumerated state space.
#[derive(Debug, Clone)]
pub struct ChainMatrix<F> {
    kind: ChainKind,
    matrix: DenseMatrix<F>,
    stationary: Vec<F>,
}

impl<F: Real> ChainMatrix<F> {
    pub fn new(kind: ChainKind, matrix: DenseMatrix<F>, stationary: Vec<F>) -> Result<Self> {
        if matrix.rows() != matrix.cols() {
            return Err(Error::InvalidInput("transition matrix must be square".into()));
        }
        if stationary.len() != matrix.rows() {
            return Err(Error::InvalidInput(
                "stationary vector length must match dimension".into(),
            ));
        }
        Ok(Self {
            kind,
            matrix,
            stationary,
        })
    }

    pub fn kind(&self) -> ChainKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn entry(&self, i: usize, j: usize) -> F {
        self.matrix.at(i, j)
    }

    pub fn row(&self, i: usize) -> &[F] {
        self.matrix.row(i)
    }

    pub fn matrix(&self) -> &DenseMatrix<F> {
        &self.matrix
    }

    pub fn stationary(&self) -> &[F] {
        &self.stationary
    }

    /// `self * other` as a chain with this stationary distribution.
    pub fn compose(&self, other: &ChainMatrix<F>, kind: ChainKind) -> Result<ChainMatrix<F>> {
        ChainMatrix::new(
            kind,
            self.matrix.matmul(&other.matrix),
            self.stationary.clone(),
        )
    }

    /// Square of the chain.
    pub fn squared(&self) -> ChainMatrix<F> {
        ChainMatrix {
            kind: ChainKind::Derived,
            matrix: self.matrix.matmul(&self.matrix),
            stationary: self.stationary.clone(),
        }
    }

    /// Max over rows of |row sum - 1| (compensated sums).
    pub fn max_row_sum_error(&self) -> F {
        let mut worst = F::zero();
        for i in 0..self.dim() {
            let mut acc = KahanSum::new();
            for &x in self.matrix.row(i) {
                acc.add(x);
            }
            worst = worst.max((acc.value() - F::one()).abs());
        }
        worst
    }

    /// Max over pairs of |pi(i) P(i,j) - pi(j) P(j,i)|.
    pub fn max_reversibility_error(&self) -> F {
        let mut worst = F::zero();
        for i in 0..self.dim() {
            for j in (i + 1)..self.dim() {
                let lhs = self.stationary[i] * self.matrix.at(i, j);
                let rhs = self.stationary[j] * self.matrix.at(j, i);
                worst = worst.max((lhs - rhs).abs());
            }
        }
        worst
    }

    /// Most negative entry (zero when all entries are nonnegative).
    pub fn min_entry(&self) -> F {
        self.matrix
            .data
            .iter()
            .copied()
            .fold(F::infinity(), F::min)
    }

    /// Check the row-sum and detailed-balance invariants at `tol`.
    pub fn validate(&self, tol: F) -> Result<()> {
        let row = self.max_row_sum_error();
        if row > tol {
            return Err(Error::Numerical(format!(
                "{} chain: row-sum error {row:e} exceeds {tol:e}",
                self.kind
            )));
        }
        let rev = self.max_reversibility_error();
        if rev > tol {
            return Err(Error::Numerical(format!(
                "{} chain: reversibility error {rev:e} exceeds {tol:e}",
                self.kind
            )));
        }
        Ok(())
    }
}
