//! Dense square matrices tagged with their symmetry, plus a plain
//! rectangular matrix for off-diagonal blocks.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Rational, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    General,
    Symmetric,
    Skew,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::General => "general",
            Kind::Symmetric => "symmetric",
            Kind::Skew => "skew",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "general" => Ok(Kind::General),
            "symmetric" => Ok(Kind::Symmetric),
            "skew" => Ok(Kind::Skew),
            _ => Err(Error::invalid(format!("unknown matrix kind {s:?}"))),
        }
    }
}

/// Row-major `n x n` matrix. The kind is validated on construction and
/// preserved by every structure-preserving operation.
#[derive(Clone, Debug, PartialEq)]
pub struct SquareMatrix<T> {
    n: usize,
    data: Vec<T>,
    kind: Kind,
}

impl<T: Scalar> SquareMatrix<T> {
    pub fn new(n: usize, data: Vec<T>, kind: Kind) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::SizeMismatch(format!(
                "{} entries for a {n}x{n} matrix",
                data.len()
            )));
        }
        let m = SquareMatrix { n, data, kind };
        m.validate()?;
        Ok(m)
    }

    pub fn from_rows(rows: Vec<Vec<T>>, kind: Kind) -> Result<Self> {
        let n = rows.len();
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::SizeMismatch(format!(
                "row of length {} in a {n}-row matrix",
                r.len()
            )));
        }
        Self::new(n, rows.into_iter().flatten().collect(), kind)
    }

    pub fn general(rows: Vec<Vec<T>>) -> Result<Self> {
        Self::from_rows(rows, Kind::General)
    }

    pub fn symmetric(rows: Vec<Vec<T>>) -> Result<Self> {
        Self::from_rows(rows, Kind::Symmetric)
    }

    pub fn skew(rows: Vec<Vec<T>>) -> Result<Self> {
        Self::from_rows(rows, Kind::Skew)
    }

    /// Builds an `n x n` matrix from a closure. The kind is still validated.
    pub fn from_fn(n: usize, kind: Kind, mut f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self::new(n, data, kind)
    }

    pub fn zeros(n: usize, kind: Kind) -> Self {
        SquareMatrix {
            n,
            data: vec![T::zero(); n * n],
            kind,
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, Kind::Symmetric);
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        m
    }

    /// Diagonal matrix, tagged symmetric.
    pub fn diagonal(diag: Vec<T>) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, Kind::Symmetric);
        for (i, d) in diag.into_iter().enumerate() {
            m.data[i * n + i] = d;
        }
        m
    }

    fn validate(&self) -> Result<()> {
        let n = self.n;
        match self.kind {
            Kind::General => Ok(()),
            Kind::Symmetric => {
                for i in 0..n {
                    for j in i + 1..n {
                        if self.get(i, j) != self.get(j, i) {
                            return Err(Error::KindViolation {
                                expected: "symmetric",
                                row: i,
                                col: j,
                            });
                        }
                    }
                }
                Ok(())
            }
            Kind::Skew => {
                for i in 0..n {
                    if !self.get(i, i).is_zero() {
                        return Err(Error::KindViolation {
                            expected: "skew",
                            row: i,
                            col: i,
                        });
                    }
                    for j in i + 1..n {
                        if *self.get(i, j) != -self.get(j, i).clone() {
                            return Err(Error::KindViolation {
                                expected: "skew",
                                row: i,
                                col: j,
                            });
                        }
                    }
                }
                Ok(())
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn diag(&self) -> Vec<T> {
        (0..self.n).map(|i| self.get(i, i).clone()).collect()
    }

    /// Re-tags the matrix, validating the new kind.
    pub fn with_kind(self, kind: Kind) -> Result<Self> {
        Self::new(self.n, self.data, kind)
    }

    pub fn as_general(&self) -> Self {
        SquareMatrix {
            n: self.n,
            data: self.data.clone(),
            kind: Kind::General,
        }
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(self.get(j, i).clone());
            }
        }
        SquareMatrix {
            n,
            data,
            kind: self.kind,
        }
    }

    /// `A_{S,S}`; keeps the kind.
    pub fn principal(&self, idx: &[usize]) -> Self {
        let k = idx.len();
        let mut data = Vec::with_capacity(k * k);
        for &i in idx {
            for &j in idx {
                data.push(self.get(i, j).clone());
            }
        }
        SquareMatrix {
            n: k,
            data,
            kind: self.kind,
        }
    }

    /// `A_{S,T}` for `|S| = |T|`, tagged general.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Result<Self> {
        if rows.len() != cols.len() {
            return Err(Error::SizeMismatch(format!(
                "{}x{} submatrix is not square",
                rows.len(),
                cols.len()
            )));
        }
        let k = rows.len();
        let mut data = Vec::with_capacity(k * k);
        for &i in rows {
            for &j in cols {
                data.push(self.get(i, j).clone());
            }
        }
        Ok(SquareMatrix {
            n: k,
            data,
            kind: Kind::General,
        })
    }

    /// Simultaneous row and column permutation: entry `(i, j)` of the result
    /// is `a[perm[i]][perm[j]]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        self.principal(perm)
    }

    pub fn scaled(&self, s: &T) -> Self {
        let data = self
            .data
            .iter()
            .map(|x| {
                let mut y = x.clone();
                y *= s;
                y
            })
            .collect();
        SquareMatrix {
            n: self.n,
            data,
            kind: self.kind,
        }
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> SquareMatrix<U> {
        SquareMatrix {
            n: self.n,
            data: self.data.iter().map(f).collect(),
            kind: self.kind,
        }
    }

    pub fn to_f64(&self) -> SquareMatrix<f64> {
        self.map(|x| x.to_f64())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| i == j || self.get(i, j).is_zero()))
    }

    pub fn zero_rows(&self) -> Vec<usize> {
        (0..self.n)
            .filter(|&i| self.row(i).iter().all(|x| x.is_zero()))
            .collect()
    }

    /// Splits at `k` into `(A', B, A'')` with `A'` the leading `k x k` block
    /// and `B` the `k x (n-k)` upper-right block.
    pub fn split(&self, k: usize) -> Result<(Self, RectMatrix<T>, Self)> {
        if k > self.n {
            return Err(Error::invalid(format!(
                "split {k} beyond dimension {}",
                self.n
            )));
        }
        let lead: Vec<usize> = (0..k).collect();
        let tail: Vec<usize> = (k..self.n).collect();
        Ok((
            self.principal(&lead),
            RectMatrix::from_fn(k, self.n - k, |i, j| self.get(i, k + j).clone()),
            self.principal(&tail),
        ))
    }
}

impl SquareMatrix<Rational> {
    pub fn from_i64_rows(rows: &[Vec<i64>], kind: Kind) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| Rational::from_i64(x)).collect())
                .collect(),
            kind,
        )
    }
}

impl<T: Scalar> fmt::Display for SquareMatrix<T> {
    /// The matrix text format: `n kind` on the first line, then rows.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.n, self.kind)?;
        for i in 0..self.n {
            let row: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

/// Row-major `rows x cols` matrix without symmetry structure.
#[derive(Clone, Debug, PartialEq)]
pub struct RectMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> RectMatrix<T> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        RectMatrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::SizeMismatch("ragged rows".into()));
        }
        Ok(RectMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| T::zero())
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Result<SquareMatrix<T>> {
        if rows.len() != cols.len() {
            return Err(Error::SizeMismatch("non-square submatrix".into()));
        }
        let k = rows.len();
        let mut data = Vec::with_capacity(k * k);
        for &i in rows {
            for &j in cols {
                data.push(self.get(i, j).clone());
            }
        }
        SquareMatrix::new(k, data, Kind::General)
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> RectMatrix<U> {
        RectMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }
}

impl<T: Scalar> From<SquareMatrix<T>> for RectMatrix<T> {
    fn from(m: SquareMatrix<T>) -> Self {
        RectMatrix {
            rows: m.n,
            cols: m.n,
            data: m.data,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(rows: &[Vec<i64>], kind: Kind) -> Result<SquareMatrix<Rational>> {
        SquareMatrix::from_i64_rows(rows, kind)
    }

    #[test]
    fn kind_is_validated() {
        assert!(q(&[vec![1, 2], vec![2, 5]], Kind::Symmetric).is_ok());
        assert!(matches!(
            q(&[vec![1, 2], vec![3, 5]], Kind::Symmetric),
            Err(Error::KindViolation { row: 0, col: 1, .. })
        ));
        assert!(q(&[vec![0, 2], vec![-2, 0]], Kind::Skew).is_ok());
        assert!(q(&[vec![1, 2], vec![-2, 0]], Kind::Skew).is_err());
        assert!(q(&[vec![0, 2], vec![2, 0]], Kind::Skew).is_err());
        assert!(q(&[vec![1, 2]], Kind::General).is_err());
    }

    #[test]
    fn split_blocks() {
        let m = q(
            &[vec![1, 2, 3], vec![2, 4, 5], vec![3, 5, 6]],
            Kind::Symmetric,
        )
        .unwrap();
        let (a1, b, a2) = m.split(1).unwrap();
        assert_eq!(a1.n(), 1);
        assert_eq!((b.nrows(), b.ncols()), (1, 2));
        assert_eq!(b.get(0, 1), &Rational::from_i64(3));
        assert_eq!(a2.get(1, 1), &Rational::from_i64(6));
        assert_eq!(a2.kind(), Kind::Symmetric);
    }

    #[test]
    fn diagnostics_helpers() {
        let m = q(&[vec![0, 0], vec![0, 3]], Kind::Symmetric).unwrap();
        assert!(m.is_diagonal());
        assert_eq!(m.zero_rows(), vec![0]);
        assert_eq!(m.transpose(), m);
    }
}
