//! Exact integer and rational linear algebra.
//!
//! Everything here is arbitrary precision. Matrices are dense and row-major;
//! the matrices that come out of Bratteli diagrams are small, so no sparse
//! storage is attempted.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: {left_rows}x{left_cols} cannot be combined with {right_rows}x{right_cols}")]
    DimensionMismatch {
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },
    #[error("matrix is {rows}x{cols}, expected a square matrix")]
    NotSquare { rows: usize, cols: usize },
    #[error("expected {expected} entries, found {found}")]
    EntryCount { expected: usize, found: usize },
    #[error("row {row} has {found} entries, expected {expected}")]
    RaggedRow { row: usize, expected: usize, found: usize },
    #[error("vector of length {found} does not live in an ambient space of dimension {expected}")]
    AmbientMismatch { expected: usize, found: usize },
}

/// Dense integer matrix with arbitrary-precision entries.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigInt>,
}

impl IntMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<BigInt>) -> Result<Self, LinalgError> {
        if entries.len() != rows * cols {
            return Err(LinalgError::EntryCount {
                expected: rows * cols,
                found: entries.len(),
            });
        }
        Ok(Self { rows, cols, entries })
    }

    /// Builds a matrix from explicit rows. `cols` is needed so that a matrix
    /// with zero rows still has a well-defined shape.
    pub fn from_rows<T: Into<BigInt> + Clone>(cols: usize, rows: &[Vec<T>]) -> Result<Self, LinalgError> {
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(LinalgError::RaggedRow {
                    row: r,
                    expected: cols,
                    found: row.len(),
                });
            }
            entries.extend(row.iter().cloned().map(Into::into));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            entries,
        })
    }

    /// Convenience constructor for literals; panics on ragged input.
    pub fn from_i64_rows(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let owned: Vec<Vec<i64>> = rows.iter().map(|r| r.to_vec()).collect();
        Self::from_rows(cols, &owned).expect("ragged matrix literal")
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.entries[i * n + i] = BigInt::one();
        }
        m
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

    pub fn get(&self, row: usize, col: usize) -> &BigInt {
        &self.entries[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: BigInt) {
        self.entries[row * self.cols + col] = value;
    }

    pub fn row(&self, row: usize) -> &[BigInt] {
        &self.entries[row * self.cols..(row + 1) * self.cols]
    }

    pub fn column(&self, col: usize) -> Vec<BigInt> {
        (0..self.rows).map(|r| self.get(r, col).clone()).collect()
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.entries
    }

    pub fn to_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    pub fn zero_columns(&self) -> Vec<usize> {
        (0..self.cols)
            .filter(|&c| (0..self.rows).all(|r| self.get(r, c).is_zero()))
            .collect()
    }

    pub fn zero_rows(&self) -> Vec<usize> {
        (0..self.rows)
            .filter(|&r| self.row(r).iter().all(Zero::is_zero))
            .collect()
    }

    /// The submatrix on the given rows and columns, in the order given.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut entries = Vec::with_capacity(rows.len() * cols.len());
        for &r in rows {
            for &c in cols {
                entries.push(self.get(r, c).clone());
            }
        }
        Self {
            rows: rows.len(),
            cols: cols.len(),
            entries,
        }
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Result<Vec<BigInt>, LinalgError> {
        if v.len() != self.cols {
            return Err(LinalgError::DimensionMismatch {
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: v.len(),
                right_cols: 1,
            });
        }
        Ok((0..self.rows)
            .map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn multiply(&self, rhs: &IntMatrix) -> Result<IntMatrix, LinalgError> {
        multiply(self, rhs)
    }

    pub fn rank(&self) -> usize {
        rank(self)
    }

    /// `self^k`; `k = 0` gives the identity.
    pub fn power(&self, k: usize) -> Result<IntMatrix, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let mut acc = IntMatrix::identity(self.rows);
        for _ in 0..k {
            acc = multiply(&acc, self)?;
        }
        Ok(acc)
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntMatrix{:?}", self.to_rows())
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for r in 0..self.rows {
            if r > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for (c, x) in self.row(r).iter().enumerate() {
                if c > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

/// Exact product `a · b`.
pub fn multiply(a: &IntMatrix, b: &IntMatrix) -> Result<IntMatrix, LinalgError> {
    if a.cols != b.rows {
        return Err(LinalgError::DimensionMismatch {
            left_rows: a.rows,
            left_cols: a.cols,
            right_rows: b.rows,
            right_cols: b.cols,
        });
    }
    let mut out = IntMatrix::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        for k in 0..a.cols {
            let aik = a.get(i, k);
            if aik.is_zero() {
                continue;
            }
            for j in 0..b.cols {
                let bkj = b.get(k, j);
                if !bkj.is_zero() {
                    out.entries[i * b.cols + j] += aik * bkj;
                }
            }
        }
    }
    Ok(out)
}

/// Rank over Q by fraction-free (Bareiss) elimination.
///
/// Every intermediate entry is a minor of the input, so the division by the
/// previous pivot is always exact and no rationals are needed.
pub fn rank(m: &IntMatrix) -> usize {
    let (rows, cols) = m.shape();
    let mut a: Vec<Vec<BigInt>> = m.to_rows();
    let mut prev = BigInt::one();
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(pivot) = (rank..rows).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(rank, pivot);
        let (head, tail) = a.split_at_mut(rank + 1);
        let pivot_row = &head[rank];
        let p = &pivot_row[col];
        for row in tail.iter_mut() {
            let factor = row[col].clone();
            for c in col + 1..cols {
                let v = &row[c] * p - &factor * &pivot_row[c];
                row[c] = v / &prev;
            }
            row[col] = BigInt::zero();
        }
        prev = a[rank][col].clone();
        rank += 1;
    }
    rank
}

/// Stable rank of the powers of a square matrix: `rank(M^n)` for `n = dim`.
///
/// Once `rank(M^k) = rank(M^{k+1})` the image of `M^k` is mapped bijectively
/// onto itself, so the first plateau is final.
pub fn eventual_rank(m: &IntMatrix) -> Result<usize, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    let n = m.rows;
    let mut prev_rank = n;
    let mut power = m.clone();
    for k in 1..=n {
        let r = rank(&power);
        if r == prev_rank || r == 0 {
            return Ok(r);
        }
        prev_rank = r;
        if k < n {
            power = multiply(&power, m)?;
        }
    }
    Ok(prev_rank)
}

/// A linear subspace of `Q^ambient_dim`, stored as the basis in reduced row
/// echelon form. The representation is canonical, so `==` is equality of
/// subspaces.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Subspace {
    ambient_dim: usize,
    basis: Vec<Vec<BigRational>>,
}

impl Subspace {
    pub fn zero(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            basis: Vec::new(),
        }
    }

    pub fn full(ambient_dim: usize) -> Self {
        let basis = (0..ambient_dim)
            .map(|i| {
                (0..ambient_dim)
                    .map(|j| if i == j { BigRational::one() } else { BigRational::zero() })
                    .collect()
            })
            .collect();
        Self { ambient_dim, basis }
    }

    /// Span of arbitrary rational vectors.
    pub fn span(ambient_dim: usize, vectors: Vec<Vec<BigRational>>) -> Result<Self, LinalgError> {
        if let Some(v) = vectors.iter().find(|v| v.len() != ambient_dim) {
            return Err(LinalgError::AmbientMismatch {
                expected: ambient_dim,
                found: v.len(),
            });
        }
        Ok(Self {
            ambient_dim,
            basis: reduced_echelon(vectors, ambient_dim),
        })
    }

    pub fn span_integer(ambient_dim: usize, vectors: &[Vec<BigInt>]) -> Result<Self, LinalgError> {
        Self::span(
            ambient_dim,
            vectors
                .iter()
                .map(|v| v.iter().cloned().map(BigRational::from_integer).collect())
                .collect(),
        )
    }

    /// Column space of an integer matrix.
    pub fn column_space(m: &IntMatrix) -> Self {
        let cols: Vec<Vec<BigInt>> = (0..m.cols()).map(|c| m.column(c)).collect();
        Self::span_integer(m.rows(), &cols).expect("columns have length rows")
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<BigRational>] {
        &self.basis
    }

    pub fn contains(&self, v: &[BigRational]) -> bool {
        if v.len() != self.ambient_dim {
            return false;
        }
        let mut vectors = self.basis.clone();
        vectors.push(v.to_vec());
        reduced_echelon(vectors, self.ambient_dim).len() == self.dim()
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        self.ambient_dim == other.ambient_dim && self.basis.iter().all(|v| other.contains(v))
    }
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<String>> = self
            .basis
            .iter()
            .map(|v| v.iter().map(|x| x.to_string()).collect())
            .collect();
        write!(f, "Subspace(Q^{}, {:?})", self.ambient_dim, rows)
    }
}

/// `M · S` as a canonical subspace of `Q^{M.rows}`.
pub fn image_through(m: &IntMatrix, s: &Subspace) -> Result<Subspace, LinalgError> {
    if s.ambient_dim != m.cols() {
        return Err(LinalgError::DimensionMismatch {
            left_rows: m.rows(),
            left_cols: m.cols(),
            right_rows: s.ambient_dim,
            right_cols: s.dim(),
        });
    }
    let images = s
        .basis
        .iter()
        .map(|v| {
            (0..m.rows())
                .map(|r| {
                    m.row(r)
                        .iter()
                        .zip(v)
                        .filter(|(a, _)| !a.is_zero())
                        .map(|(a, x)| x * BigRational::from_integer(a.clone()))
                        .fold(BigRational::zero(), |acc, t| acc + t)
                })
                .collect()
        })
        .collect();
    Subspace::span(m.rows(), images)
}

/// Gauss-Jordan elimination to reduced row echelon form, dropping zero rows.
fn reduced_echelon(mut rows: Vec<Vec<BigRational>>, width: usize) -> Vec<Vec<BigRational>> {
    let mut pivot_row = 0;
    for col in 0..width {
        if pivot_row == rows.len() {
            break;
        }
        let Some(p) = (pivot_row..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(pivot_row, p);
        let inv = rows[pivot_row][col].recip();
        for x in rows[pivot_row].iter_mut() {
            *x = &*x * &inv;
        }
        let pivot = rows[pivot_row].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r == pivot_row || row[col].is_zero() {
                continue;
            }
            let factor = row[col].clone();
            for (x, px) in row.iter_mut().zip(&pivot) {
                if !px.is_zero() {
                    *x = &*x - &factor * px;
                }
            }
        }
        pivot_row += 1;
    }
    rows.truncate(pivot_row);
    rows
}

/// True when every entry is non-negative.
pub(crate) fn all_non_negative(entries: &[BigInt]) -> bool {
    !entries.iter().any(Signed::is_negative)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn rank_of_small_examples() {
        assert_eq!(rank(&IntMatrix::from_i64_rows(&[&[1, 0], &[1, 1]])), 2);
        assert_eq!(rank(&IntMatrix::from_i64_rows(&[&[1, 1], &[1, 1]])), 1);
        let phi = IntMatrix::from_i64_rows(&[&[1, 0, 0], &[1, 1, 0], &[2, 0, 1], &[0, 1, 2]]);
        assert_eq!(rank(&phi), 3);
        assert_eq!(rank(&IntMatrix::zeros(3, 2)), 0);
        assert_eq!(rank(&IntMatrix::zeros(0, 4)), 0);
    }

    #[test]
    fn rank_skips_empty_pivot_columns() {
        let m = IntMatrix::from_i64_rows(&[&[0, 2, 4, 1], &[0, 1, 2, 3], &[0, 3, 6, 4]]);
        assert_eq!(rank(&m), 2);
    }

    #[test]
    fn multiply_examples() {
        let a = IntMatrix::from_i64_rows(&[&[1, 0], &[1, 1]]);
        assert_eq!(
            multiply(&a, &a).unwrap(),
            IntMatrix::from_i64_rows(&[&[1, 0], &[2, 1]])
        );
        let phi = IntMatrix::from_i64_rows(&[&[1, 0, 0], &[1, 1, 0], &[2, 0, 1], &[0, 1, 2]]);
        assert_eq!(multiply(&IntMatrix::identity(4), &phi).unwrap(), phi);
        assert!(matches!(
            multiply(&phi, &phi),
            Err(LinalgError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn eventual_rank_examples() {
        assert_eq!(eventual_rank(&IntMatrix::from_i64_rows(&[&[0, 1], &[0, 0]])).unwrap(), 0);
        assert_eq!(eventual_rank(&IntMatrix::from_i64_rows(&[&[1, 0], &[1, 1]])).unwrap(), 2);
        assert_eq!(eventual_rank(&IntMatrix::from_i64_rows(&[&[1, 1], &[1, 1]])).unwrap(), 1);
        assert_eq!(eventual_rank(&IntMatrix::zeros(0, 0)).unwrap(), 0);
        assert!(matches!(
            eventual_rank(&IntMatrix::zeros(2, 3)),
            Err(LinalgError::NotSquare { rows: 2, cols: 3 })
        ));
    }

    #[test]
    fn eventual_rank_waits_for_long_nilpotent_tails() {
        // nilpotent Jordan block plus an invertible block
        let m = IntMatrix::from_i64_rows(&[
            &[0, 1, 0, 0],
            &[0, 0, 1, 0],
            &[0, 0, 0, 0],
            &[0, 0, 0, 3],
        ]);
        assert_eq!(eventual_rank(&m).unwrap(), 1);
    }

    #[test]
    fn image_through_examples() {
        let s = Subspace::span(2, vec![vec![q(1), q(0)]]).unwrap();
        assert_eq!(image_through(&IntMatrix::identity(2), &s).unwrap(), s);
        assert_eq!(
            image_through(&IntMatrix::zeros(3, 2), &s).unwrap(),
            Subspace::zero(3)
        );
        let m = IntMatrix::from_i64_rows(&[&[1, 0], &[1, 1]]);
        let expected = Subspace::span(2, vec![vec![q(1), q(1)]]).unwrap();
        assert_eq!(image_through(&m, &s).unwrap(), expected);
        assert!(image_through(&IntMatrix::identity(3), &s).is_err());
    }

    #[test]
    fn echelon_form_is_canonical() {
        let a = Subspace::span(3, vec![vec![q(1), q(2), q(3)], vec![q(0), q(1), q(1)]]).unwrap();
        let b = Subspace::span(
            3,
            vec![vec![q(2), q(5), q(7)], vec![q(1), q(3), q(4)], vec![q(1), q(1), q(2)]],
        )
        .unwrap();
        assert_eq!(a, b);
        assert_eq!(a.dim(), 2);
        assert!(a.contains(&[q(1), q(3), q(4)]));
        assert!(!a.contains(&[q(0), q(0), q(1)]));
    }

    #[test]
    fn column_space_matches_rank() {
        let m = IntMatrix::from_i64_rows(&[&[1, 2, 3], &[2, 4, 6], &[0, 1, 1]]);
        assert_eq!(Subspace::column_space(&m).dim(), rank(&m));
    }
}
