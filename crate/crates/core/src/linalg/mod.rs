//! Dense and sparse matrix storage, the exact product oracle, and the
//! entrywise norms used by every error bound in the crate.
//!
//! Entries are addressed by [`Position`], whose derived ordering is the
//! position total order `(i1, j1) < (i2, j2)` iff `i1 * n + j1 < i2 * n + j2`.
//! That order is the single deterministic tie-break used throughout.

mod norm;
pub mod text;

use std::borrow::Cow;
use std::fmt;

pub use norm::{entrywise_norm, rank_of, CompensatedSum, NormReport, ResidualProfile};

use crate::error::{Error, Result};

/// A matrix entry `(row, col)`.
///
/// Ordering is lexicographic, which coincides with the position total order
/// for any fixed column count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Position {
    pub row: usize,
    pub col: usize,
}

impl Position {
    pub const fn new(row: usize, col: usize) -> Self {
        Position { row, col }
    }

    /// Linear index `row * cols + col`.
    pub fn linear(self, cols: usize) -> usize {
        self.row * cols + self.col
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.row, self.col)
    }
}

impl From<(usize, usize)> for Position {
    fn from((row, col): (usize, usize)) -> Self {
        Position { row, col }
    }
}

/// Storage order of a [`DenseMatrix`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Layout {
    #[default]
    RowMajor,
    ColumnMajor,
}

/// Real matrix with an explicit storage layout.
///
/// The left factor of a product is usually held column-major and the right
/// factor row-major so that the k-th outer product reads one contiguous
/// slice from each.
#[derive(Debug, Clone)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    layout: Layout,
    values: Vec<f64>,
    nonnegative: bool,
}

/// Equal shape and equal values in position order; layout and the
/// nonnegativity flag are ignored.
impl PartialEq for DenseMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.shape() == other.shape() && self.entries().eq(other.entries())
    }
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            layout: Layout::RowMajor,
            values: vec![0.0; rows * cols],
            nonnegative: false,
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.values[i * n + i] = 1.0;
        }
        m
    }

    /// Builds a matrix from row-major values.
    pub fn from_row_major(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        Self::with_values(rows, cols, Layout::RowMajor, values)
    }

    /// Builds a matrix from column-major values.
    pub fn from_col_major(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        Self::with_values(rows, cols, Layout::ColumnMajor, values)
    }

    fn with_values(rows: usize, cols: usize, layout: Layout, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::invalid(
                "values",
                format!(
                    "expected {} values for a {rows}x{cols} matrix, got {}",
                    rows * cols,
                    values.len()
                ),
            ));
        }
        let m = DenseMatrix {
            rows,
            cols,
            layout,
            values,
            nonnegative: false,
        };
        if let Some((p, _)) = m.entries().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: p.row,
                col: p.col,
            });
        }
        Ok(m)
    }

    /// Builds a row-major matrix from nested rows; all rows must share a length.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut values = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::invalid("rows", "ragged row lengths"));
            }
            values.extend_from_slice(r);
        }
        Self::from_row_major(rows.len(), cols, values)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                values.push(f(i, j));
            }
        }
        DenseMatrix {
            rows,
            cols,
            layout: Layout::RowMajor,
            values,
            nonnegative: false,
        }
    }

    /// Checks that every value is `>= 0` and sets the nonnegativity flag.
    pub fn require_nonnegative(mut self) -> Result<Self> {
        if let Some((p, value)) = self.entries().find(|(_, v)| *v < 0.0) {
            return Err(Error::NegativeValue {
                row: p.row,
                col: p.col,
                value,
            });
        }
        self.nonnegative = true;
        Ok(self)
    }

    /// Whether nonnegativity was verified at construction.
    pub fn is_nonnegative(&self) -> bool {
        self.nonnegative
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    /// Number of stored values, `rows * cols`.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Raw storage in the current layout.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn offset(&self, i: usize, j: usize) -> usize {
        match self.layout {
            Layout::RowMajor => i * self.cols + j,
            Layout::ColumnMajor => j * self.rows + i,
        }
    }

    /// Value at `(i, j)`. Panics when out of range, like slice indexing.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of range");
        self.values[self.offset(i, j)]
    }

    pub fn try_get(&self, i: usize, j: usize) -> Result<f64> {
        if i >= self.rows || j >= self.cols {
            return Err(Error::IndexOutOfRange {
                row: i,
                col: j,
                rows: self.rows,
                cols: self.cols,
            });
        }
        Ok(self.values[self.offset(i, j)])
    }

    pub(crate) fn set(&mut self, i: usize, j: usize, v: f64) {
        let o = self.offset(i, j);
        self.values[o] = v;
    }

    /// Returns the same matrix stored in `layout`.
    pub fn into_layout(self, layout: Layout) -> Self {
        if self.layout == layout {
            return self;
        }
        let mut values = Vec::with_capacity(self.values.len());
        match layout {
            Layout::RowMajor => {
                for i in 0..self.rows {
                    values.extend((0..self.cols).map(|j| self.get(i, j)));
                }
            }
            Layout::ColumnMajor => {
                for j in 0..self.cols {
                    values.extend((0..self.rows).map(|i| self.get(i, j)));
                }
            }
        }
        DenseMatrix {
            layout,
            values,
            ..self
        }
    }

    /// Column `j`; borrowed when stored column-major.
    pub fn column(&self, j: usize) -> Cow<'_, [f64]> {
        match self.layout {
            Layout::ColumnMajor => Cow::Borrowed(&self.values[j * self.rows..(j + 1) * self.rows]),
            Layout::RowMajor => Cow::Owned((0..self.rows).map(|i| self.get(i, j)).collect()),
        }
    }

    /// Row `i`; borrowed when stored row-major.
    pub fn row(&self, i: usize) -> Cow<'_, [f64]> {
        match self.layout {
            Layout::RowMajor => Cow::Borrowed(&self.values[i * self.cols..(i + 1) * self.cols]),
            Layout::ColumnMajor => Cow::Owned((0..self.cols).map(|j| self.get(i, j)).collect()),
        }
    }

    pub fn transpose(&self) -> Self {
        let layout = match self.layout {
            Layout::RowMajor => Layout::ColumnMajor,
            Layout::ColumnMajor => Layout::RowMajor,
        };
        DenseMatrix {
            rows: self.cols,
            cols: self.rows,
            layout,
            values: self.values.clone(),
            nonnegative: self.nonnegative,
        }
    }

    /// All entries in position order.
    pub fn entries(&self) -> impl Iterator<Item = (Position, f64)> + '_ {
        (0..self.rows)
            .flat_map(move |i| (0..self.cols).map(move |j| (Position::new(i, j), self.get(i, j))))
    }

    /// Whether every value is an integer small enough for exact f64 arithmetic.
    pub fn is_integral(&self) -> bool {
        self.values
            .iter()
            .all(|v| v.fract() == 0.0 && v.abs() < (1u64 << 40) as f64)
    }

    /// Number of nonzero values.
    pub fn nnz(&self) -> usize {
        self.values.iter().filter(|v| **v != 0.0).count()
    }

    /// Pads with zero rows and columns up to `rows x cols`.
    pub fn padded(&self, rows: usize, cols: usize) -> Self {
        assert!(rows >= self.rows && cols >= self.cols);
        let mut m = Self::zeros(rows, cols).into_layout(self.layout);
        for (p, v) in self.entries() {
            m.set(p.row, p.col, v);
        }
        m.nonnegative = self.nonnegative;
        m
    }

    /// Inner product of row `i` of `self` with column `j` of `other`.
    pub fn dot_row_col(&self, i: usize, other: &DenseMatrix, j: usize) -> f64 {
        debug_assert_eq!(self.cols, other.rows);
        let mut acc = CompensatedSum::default();
        for t in 0..self.cols {
            acc.add(self.get(i, t) * other.get(t, j));
        }
        acc.value()
    }
}

/// The exact product `A * B` by the column-row method: the sum over `t`
/// of the outer products `A[:, t] * B[t, :]`.
pub fn multiply_exact(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    if a.cols != b.rows {
        return Err(Error::DimensionMismatch {
            left_rows: a.rows,
            left_cols: a.cols,
            right_rows: b.rows,
            right_cols: b.cols,
        });
    }
    let mut c = DenseMatrix::zeros(a.rows, b.cols);
    for t in 0..a.cols {
        let u = a.column(t);
        let v = b.row(t);
        for (i, &ui) in u.iter().enumerate() {
            if ui == 0.0 {
                continue;
            }
            let out = &mut c.values[i * b.cols..(i + 1) * b.cols];
            for (o, &vj) in out.iter_mut().zip(v.iter()) {
                *o += ui * vj;
            }
        }
    }
    c.nonnegative = a.nonnegative && b.nonnegative;
    Ok(c)
}

/// Sparse matrix given by distinct `(row, col, weight)` triples, kept in position order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    triples: Vec<(Position, f64)>,
}

impl SparseMatrix {
    pub fn new(rows: usize, cols: usize, mut triples: Vec<(Position, f64)>) -> Result<Self> {
        for &(p, _) in &triples {
            if p.row >= rows || p.col >= cols {
                return Err(Error::IndexOutOfRange {
                    row: p.row,
                    col: p.col,
                    rows,
                    cols,
                });
            }
        }
        triples.sort_by_key(|t| t.0);
        if let Some(w) = triples.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::invalid(
                "triples",
                format!("duplicate position {}", w[0].0),
            ));
        }
        Ok(SparseMatrix {
            rows,
            cols,
            triples,
        })
    }

    pub fn empty(rows: usize, cols: usize) -> Self {
        SparseMatrix {
            rows,
            cols,
            triples: Vec::new(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn triples(&self) -> &[(Position, f64)] {
        &self.triples
    }

    pub fn nnz(&self) -> usize {
        self.triples.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.triples
            .binary_search_by(|(p, _)| p.cmp(&Position::new(i, j)))
            .map_or(0.0, |k| self.triples[k].1)
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.rows, self.cols);
        for &(p, w) in &self.triples {
            m.set(p.row, p.col, w);
        }
        m
    }
}

impl From<&DenseMatrix> for SparseMatrix {
    fn from(m: &DenseMatrix) -> Self {
        SparseMatrix {
            rows: m.rows,
            cols: m.cols,
            triples: m.entries().filter(|(_, v)| *v != 0.0).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triple_loop(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
        DenseMatrix::from_fn(a.rows(), b.cols(), |i, j| {
            (0..a.cols()).map(|t| a.get(i, t) * b.get(t, j)).sum()
        })
    }

    #[test]
    fn identity_times_identity() {
        let i = DenseMatrix::identity(4);
        assert_eq!(multiply_exact(&i, &i).unwrap(), i);
    }

    #[test]
    fn one_term_product() {
        let mut a = DenseMatrix::zeros(4, 4);
        a.set(1, 0, 2.0);
        let mut b = DenseMatrix::zeros(4, 4);
        b.set(0, 2, 3.0);
        let c = multiply_exact(&a, &b).unwrap();
        assert_eq!(c.nnz(), 1);
        assert_eq!(c.get(1, 2), 6.0);
    }

    #[test]
    fn random_integer_product_matches_triple_loop() {
        let mut state = 7u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 33) % 11) as f64 - 5.0
        };
        let a = DenseMatrix::from_fn(8, 8, |_, _| next()).into_layout(Layout::ColumnMajor);
        let b = DenseMatrix::from_fn(8, 8, |_, _| next());
        let c = multiply_exact(&a, &b).unwrap();
        let expected = triple_loop(&a, &b);
        for (p, v) in expected.entries() {
            assert_eq!(c.get(p.row, p.col), v);
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let a = DenseMatrix::zeros(3, 2);
        let b = DenseMatrix::zeros(3, 3);
        assert!(matches!(
            multiply_exact(&a, &b),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn nonnegative_flag_is_checked() {
        let m = DenseMatrix::from_rows(&[[1.0, -0.5], [0.0, 2.0]]).unwrap();
        assert!(matches!(
            m.require_nonnegative(),
            Err(Error::NegativeValue { row: 0, col: 1, .. })
        ));
    }

    #[test]
    fn layouts_agree() {
        let m = DenseMatrix::from_rows(&[[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]).unwrap();
        let c = m.clone().into_layout(Layout::ColumnMajor);
        assert_eq!(c.values(), &[1.0, 4.0, 2.0, 5.0, 3.0, 6.0]);
        assert_eq!(&*c.column(1), &[2.0, 5.0]);
        assert_eq!(&*m.row(1), &[4.0, 5.0, 6.0]);
        assert_eq!(c.into_layout(Layout::RowMajor), m);
        assert_eq!(m.transpose().get(2, 1), 6.0);
    }

    #[test]
    fn position_order_is_linear_order() {
        let n = 5;
        let mut ps: Vec<Position> = (0..n)
            .flat_map(|i| (0..n).map(move |j| Position::new(i, j)))
            .rev()
            .collect();
        ps.sort();
        for w in ps.windows(2) {
            assert!(w[0].linear(n) < w[1].linear(n));
        }
    }

    #[test]
    fn sparse_rejects_duplicates_and_out_of_range() {
        let p = Position::new(0, 1);
        assert!(SparseMatrix::new(2, 2, vec![(p, 1.0), (p, 2.0)]).is_err());
        assert!(SparseMatrix::new(2, 2, vec![(Position::new(2, 0), 1.0)]).is_err());
        let s = SparseMatrix::new(2, 2, vec![(p, 2.5)]).unwrap();
        assert_eq!(s.get(0, 1), 2.5);
        assert_eq!(s.get(1, 1), 0.0);
    }
}
