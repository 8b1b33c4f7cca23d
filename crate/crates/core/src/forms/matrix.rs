//! Dense exact linear algebra over the rationals.

use num_traits::{One, Zero};

use super::{FormError, Rational};

pub type RationalMatrix = Vec<Vec<Rational>>;

/// Reduced row echelon form; returns the reduced rows (zero rows dropped)
/// and the pivot column of each.
pub fn reduced_row_echelon(rows: &[Vec<Rational>]) -> (RationalMatrix, Vec<usize>) {
    let mut m: RationalMatrix = rows.to_vec();
    let ncols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        if r == m.len() {
            break;
        }
        let Some(pivot) = (r..m.len()).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(r, pivot);
        let inv = m[r][col].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..m.len() {
            if i != r && !m[i][col].is_zero() {
                let factor = m[i][col].clone();
                for j in col..ncols {
                    let delta = &factor * &m[r][j];
                    m[i][j] -= delta;
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    m.truncate(r);
    (m, pivots)
}

pub fn rank(rows: &[Vec<Rational>]) -> usize {
    reduced_row_echelon(rows).1.len()
}

pub fn determinant(m: &[Vec<Rational>]) -> Rational {
    let n = m.len();
    let mut a: RationalMatrix = m.to_vec();
    let mut det = Rational::one();
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&i| !a[i][col].is_zero()) else {
            return Rational::zero();
        };
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        det *= &a[col][col];
        let inv = a[col][col].recip();
        for i in col + 1..n {
            if a[i][col].is_zero() {
                continue;
            }
            let factor = &a[i][col] * &inv;
            for j in col..n {
                let delta = &factor * &a[col][j];
                a[i][j] -= delta;
            }
        }
    }
    det
}

/// Gauss–Jordan inverse; `None` when singular.
pub fn inverse(m: &[Vec<Rational>]) -> Option<RationalMatrix> {
    let n = m.len();
    let augmented: RationalMatrix = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            r
        })
        .collect();
    let (reduced, pivots) = reduced_row_echelon(&augmented);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    Some(reduced.into_iter().map(|row| row[n..].to_vec()).collect())
}

pub fn mat_mul(a: &[Vec<Rational>], b: &[Vec<Rational>]) -> RationalMatrix {
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    row.iter()
                        .zip(b)
                        .fold(Rational::zero(), |acc, (x, brow)| acc + x * &brow[j])
                })
                .collect()
        })
        .collect()
}

/// Row vector times matrix, `v · M`.
pub fn row_times(v: &[Rational], m: &[Vec<Rational>]) -> Vec<Rational> {
    let cols = m.first().map_or(0, Vec::len);
    (0..cols)
        .map(|j| {
            v.iter()
                .zip(m)
                .fold(Rational::zero(), |acc, (x, row)| acc + x * &row[j])
        })
        .collect()
}

/// Symmetric rational matrix, e.g. a Hessian or the Gram matrix of a
/// quadratic form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymmetricMatrix {
    entries: RationalMatrix,
}

impl SymmetricMatrix {
    pub fn new(entries: RationalMatrix) -> Result<Self, FormError> {
        let n = entries.len();
        for (i, row) in entries.iter().enumerate() {
            if row.len() != n {
                return Err(FormError::NotSquare {
                    rows: n,
                    cols: row.len(),
                });
            }
            for j in 0..i {
                if entries[i][j] != entries[j][i] {
                    return Err(FormError::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(Self { entries })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            entries: vec![vec![Rational::zero(); n]; n],
        }
    }

    pub fn diagonal(values: &[Rational]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, v) in values.iter().enumerate() {
            m.entries[i][i] = v.clone();
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Vec<Rational>] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.entries[i][j]
    }

    pub fn rank(&self) -> usize {
        rank(&self.entries)
    }

    pub fn determinant(&self) -> Rational {
        determinant(&self.entries)
    }

    pub fn inverse(&self) -> Option<RationalMatrix> {
        inverse(&self.entries)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().flatten().all(Zero::is_zero)
    }

    pub fn scaled(&self, factor: &Rational) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .map(|row| row.iter().map(|x| x * factor).collect())
                .collect(),
        }
    }
}
