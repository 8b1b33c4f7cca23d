use num_traits::{One, Zero};

use super::matrix::{self, RationalMatrix};
use super::{FormError, Rational};

/// An invertible square matrix `T`, acting on coordinates by `x = T·y`.
/// Composing a form with it gives `(F∘T)(y) = F(T·y)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearChange {
    matrix: RationalMatrix,
}

impl LinearChange {
    pub fn new(matrix: RationalMatrix) -> Result<Self, FormError> {
        let n = matrix.len();
        if let Some(row) = matrix.iter().find(|r| r.len() != n) {
            return Err(FormError::NotSquare {
                rows: n,
                cols: row.len(),
            });
        }
        if n == 0 || matrix::determinant(&matrix).is_zero() {
            return Err(FormError::SingularChange);
        }
        Ok(Self { matrix })
    }

    /// Builds the matrix whose `j`-th column is `columns[j]`.
    pub fn from_columns(columns: &[Vec<Rational>]) -> Result<Self, FormError> {
        let n = columns.len();
        let rows = (0..n)
            .map(|i| {
                columns
                    .iter()
                    .map(|c| c.get(i).cloned().unwrap_or_else(Rational::zero))
                    .collect()
            })
            .collect();
        if columns.iter().any(|c| c.len() != n) {
            return Err(FormError::NotSquare {
                rows: n,
                cols: columns.iter().map(Vec::len).max().unwrap_or(0),
            });
        }
        Self::new(rows)
    }

    pub fn from_integers(rows: &[Vec<i64>]) -> Result<Self, FormError> {
        Self::new(
            rows.iter()
                .map(|r| r.iter().map(|&x| Rational::from_integer(x.into())).collect())
                .collect(),
        )
    }

    pub fn identity(n: usize) -> Self {
        Self {
            matrix: (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| if i == j { Rational::one() } else { Rational::zero() })
                        .collect()
                })
                .collect(),
        }
    }

    /// Maps `x_{perm[j]} = y_j`.
    pub fn permutation(perm: &[usize]) -> Result<Self, FormError> {
        let n = perm.len();
        let mut m = vec![vec![Rational::zero(); n]; n];
        for (j, &i) in perm.iter().enumerate() {
            if i >= n {
                return Err(FormError::SingularChange);
            }
            m[i][j] = Rational::one();
        }
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.matrix.len()
    }

    pub fn matrix(&self) -> &[Vec<Rational>] {
        &self.matrix
    }

    pub fn column(&self, j: usize) -> Vec<Rational> {
        self.matrix.iter().map(|row| row[j].clone()).collect()
    }

    pub fn determinant(&self) -> Rational {
        matrix::determinant(&self.matrix)
    }

    /// `T·y`.
    pub fn apply(&self, y: &[Rational]) -> Result<Vec<Rational>, FormError> {
        if y.len() != self.dim() {
            return Err(FormError::DimensionMismatch {
                expected: self.dim(),
                found: y.len(),
            });
        }
        Ok(self.matrix.iter().map(|row| super::dot(row, y)).collect())
    }

    /// Matrix product `self · other`, so that `(F∘self)∘other = F∘(self·other)`.
    pub fn compose(&self, other: &Self) -> Result<Self, FormError> {
        if self.dim() != other.dim() {
            return Err(FormError::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(Self {
            matrix: matrix::mat_mul(&self.matrix, &other.matrix),
        })
    }

    pub fn inverse(&self) -> Self {
        Self {
            matrix: matrix::inverse(&self.matrix).expect("LinearChange is invertible"),
        }
    }
}
