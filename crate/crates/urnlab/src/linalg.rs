//! Small dense square matrices over a generic [`Scalar`].
//!
//! The moment recurrences work on `r x r` matrices with `r` in the single
//! digits, so this is a plain row-major `Vec` implementation without any
//! attempt at being clever.

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<S> {
    n: usize,
    rows: Vec<Vec<S>>,
}

impl<S: Scalar> Matrix<S> {
    pub fn zeros(n: usize) -> Self {
        Matrix {
            n,
            rows: vec![vec![S::zero(); n]; n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.rows[i][i] = S::one();
        }
        m
    }

    /// Builds from rows; panics on a ragged or non-square layout.
    pub fn from_rows(rows: Vec<Vec<S>>) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        Matrix { n, rows }
    }

    pub fn from_int_rows(rows: &[Vec<i64>]) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| S::from_i64(v)).collect())
                .collect(),
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.rows[i][j]
    }

    pub fn rows(&self) -> &[Vec<S>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.rows[i]
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                out.rows[j][i] = self.rows[i][j].clone();
            }
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let mut out = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                let mut acc = S::zero();
                for k in 0..self.n {
                    acc = acc + self.rows[i][k].clone() * other.rows[k][j].clone();
                }
                out.rows[i][j] = acc;
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let mut out = self.clone();
        for i in 0..self.n {
            for j in 0..self.n {
                out.rows[i][j] = out.rows[i][j].clone() + other.rows[i][j].clone();
            }
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let mut out = self.clone();
        for i in 0..self.n {
            for j in 0..self.n {
                out.rows[i][j] = out.rows[i][j].clone() - other.rows[i][j].clone();
            }
        }
        out
    }

    pub fn scale(&self, s: &S) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            for j in 0..self.n {
                out.rows[i][j] = out.rows[i][j].clone() * s.clone();
            }
        }
        out
    }

    /// Row vector times matrix: `v * M`.
    pub fn vec_mul(&self, v: &[S]) -> Vec<S> {
        assert_eq!(v.len(), self.n);
        (0..self.n)
            .map(|j| {
                let mut acc = S::zero();
                for i in 0..self.n {
                    acc = acc + v[i].clone() * self.rows[i][j].clone();
                }
                acc
            })
            .collect()
    }

    /// Outer product `u^T v` of two row vectors.
    pub fn outer(u: &[S], v: &[S]) -> Self {
        assert_eq!(u.len(), v.len());
        let n = u.len();
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.rows[i][j] = u[i].clone() * v[j].clone();
            }
        }
        out
    }

    pub fn is_symmetric(&self) -> bool {
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if self.rows[i][j] != self.rows[j][i] {
                    return false;
                }
            }
        }
        true
    }

    pub fn row_sums(&self) -> Vec<S> {
        self.rows
            .iter()
            .map(|r| r.iter().cloned().fold(S::zero(), |a, b| a + b))
            .collect()
    }
}
