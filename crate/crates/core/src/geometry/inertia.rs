use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::forms::{FormError, HomogeneousForm, Rational, SymmetricMatrix};

/// Counts of positive, negative and zero squares in a diagonalization of a
/// real quadratic form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InertiaSignature {
    pub n_plus: usize,
    pub n_minus: usize,
    pub n_zero: usize,
}

impl InertiaSignature {
    /// Exact congruence (Lagrange) diagonalization. A zero diagonal with a
    /// nonzero off-diagonal entry `a_ij` is handled by the substitution
    /// `x_i ← x_i + x_j`, which puts `2·a_ij` on the diagonal.
    pub fn of_matrix(m: &SymmetricMatrix) -> Self {
        let n = m.dim();
        let mut a: Vec<Vec<Rational>> = m.entries().to_vec();
        let mut signs = Vec::with_capacity(n);
        let mut k = 0;
        while k < n {
            if let Some(p) = (k..n).find(|&i| !a[i][i].is_zero()) {
                a.swap(k, p);
                for row in a.iter_mut() {
                    row.swap(k, p);
                }
            } else if let Some((i, j)) = (k..n)
                .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                .find(|&(i, j)| !a[i][j].is_zero())
            {
                // Row/column operation i += j keeps the matrix symmetric.
                for c in 0..n {
                    let v = a[j][c].clone();
                    a[i][c] += v;
                }
                for r in 0..n {
                    let v = a[r][j].clone();
                    a[r][i] += v;
                }
                a.swap(k, i);
                for row in a.iter_mut() {
                    row.swap(k, i);
                }
            } else {
                break;
            }
            let pivot = a[k][k].clone();
            for i in k + 1..n {
                if a[i][k].is_zero() {
                    continue;
                }
                let factor = &a[i][k] / &pivot;
                for c in k..n {
                    let v = &factor * &a[k][c];
                    a[i][c] -= v;
                }
                for r in k..n {
                    let v = &factor * &a[r][k];
                    a[r][i] -= v;
                }
            }
            signs.push(pivot.is_positive());
            k += 1;
        }
        let n_plus = signs.iter().filter(|&&s| s).count();
        let n_minus = signs.len() - n_plus;
        Self {
            n_plus,
            n_minus,
            n_zero: n - signs.len(),
        }
    }

    pub fn of_quadratic_form(q: &HomogeneousForm) -> Result<Self, FormError> {
        Ok(Self::of_matrix(&q.gram_matrix()?))
    }

    pub fn dim(&self) -> usize {
        self.n_plus + self.n_minus + self.n_zero
    }

    pub fn rank(&self) -> usize {
        self.n_plus + self.n_minus
    }

    pub fn is_full_rank(&self) -> bool {
        self.n_zero == 0
    }

    pub fn is_definite(&self) -> bool {
        self.n_zero == 0 && (self.n_plus == 0 || self.n_minus == 0)
    }

    /// The signature is only defined up to an overall sign of the form.
    pub fn unordered(&self) -> (usize, usize) {
        (self.n_plus.min(self.n_minus), self.n_plus.max(self.n_minus))
    }
}
