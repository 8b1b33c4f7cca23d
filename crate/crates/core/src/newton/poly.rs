use nalgebra::{DMatrix, DVector};
use num_traits::ToPrimitive;

use super::NewtonError;
use crate::forms::HomogeneousForm;

/// Sparse real polynomial (not necessarily homogeneous).
#[derive(Clone, Debug, PartialEq)]
pub struct RealPoly {
    num_vars: usize,
    terms: Vec<(Vec<u32>, f64)>,
}

impl RealPoly {
    pub fn new(num_vars: usize, terms: Vec<(Vec<u32>, f64)>) -> Result<Self, NewtonError> {
        let mut merged: std::collections::BTreeMap<Vec<u32>, f64> = Default::default();
        for (m, c) in terms {
            if m.len() != num_vars {
                return Err(NewtonError::DimensionMismatch {
                    expected: num_vars,
                    found: m.len(),
                });
            }
            if !c.is_finite() {
                return Err(NewtonError::NonFinite);
            }
            *merged.entry(m).or_insert(0.0) += c;
        }
        Ok(Self {
            num_vars,
            terms: merged.into_iter().filter(|(_, c)| *c != 0.0).collect(),
        })
    }

    pub fn zero(num_vars: usize) -> Self {
        Self {
            num_vars,
            terms: vec![],
        }
    }

    /// `a·x + b`.
    pub fn affine(a: &[f64], b: f64) -> Result<Self, NewtonError> {
        let n = a.len();
        let mut terms = vec![(vec![0; n], b)];
        for (i, &ai) in a.iter().enumerate() {
            let mut m = vec![0; n];
            m[i] = 1;
            terms.push((m, ai));
        }
        Self::new(n, terms)
    }

    pub fn from_form(f: &HomogeneousForm) -> Self {
        Self {
            num_vars: f.num_vars(),
            terms: f
                .terms()
                .map(|(m, c)| (m.clone(), c.to_f64().unwrap_or(f64::NAN)))
                .collect(),
        }
    }

    /// Sets `x_index = 1`, removing that variable.
    pub fn dehomogenize(f: &HomogeneousForm, index: usize) -> Self {
        let poly = Self::from_form(f);
        poly.substitute_one(index)
    }

    fn substitute_one(&self, index: usize) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| {
                let mut m = m.clone();
                m.remove(index);
                (m, *c)
            })
            .collect();
        Self::new(self.num_vars - 1, terms).expect("finite coefficients")
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn terms(&self) -> &[(Vec<u32>, f64)] {
        &self.terms
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .iter()
            .map(|(m, _)| m.iter().sum())
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                m.iter()
                    .zip(x)
                    .fold(*c, |acc, (&e, &xi)| acc * xi.powi(e as i32))
            })
            .sum()
    }

    pub fn partial(&self, index: usize) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| m[index] > 0)
            .map(|(m, c)| {
                let mut m = m.clone();
                let e = m[index];
                m[index] -= 1;
                (m, c * f64::from(e))
            })
            .collect();
        Self {
            num_vars: self.num_vars,
            terms,
        }
    }

    pub fn gradient(&self) -> Vec<Self> {
        (0..self.num_vars).map(|i| self.partial(i)).collect()
    }

    /// `Σ |c|·Π b_i^{e_i}`, an upper bound for `|p(x)|` whenever
    /// `|x_i| ≤ b_i`.
    pub fn majorant(&self, bounds: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                m.iter()
                    .zip(bounds)
                    .fold(c.abs(), |acc, (&e, &b)| acc * b.powi(e as i32))
            })
            .sum()
    }

    /// Maximum absolute coefficient.
    pub fn coefficient_norm(&self) -> f64 {
        self.terms.iter().map(|(_, c)| c.abs()).fold(0.0, f64::max)
    }

    pub fn add(&self, other: &Self) -> Result<Self, NewtonError> {
        if self.num_vars != other.num_vars {
            return Err(NewtonError::DimensionMismatch {
                expected: self.num_vars,
                found: other.num_vars,
            });
        }
        Self::new(
            self.num_vars,
            self.terms.iter().chain(&other.terms).cloned().collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Result<Self, NewtonError> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self::new(
            self.num_vars,
            self.terms.iter().map(|(m, c)| (m.clone(), c * factor)).collect(),
        )
        .expect("finite coefficients")
    }
}

/// A polynomial map `ℝⁿ → ℝᵐ`, with its Jacobian and second derivatives
/// precomputed symbolically.
#[derive(Clone, Debug, PartialEq)]
pub struct PolySystem {
    polys: Vec<RealPoly>,
    num_vars: usize,
    /// `jacobian[i][j] = ∂f_i/∂x_j`.
    jacobian: Vec<Vec<RealPoly>>,
}

impl PolySystem {
    pub fn new(polys: Vec<RealPoly>) -> Result<Self, NewtonError> {
        let num_vars = polys.first().map_or(0, RealPoly::num_vars);
        for p in &polys {
            if p.num_vars() != num_vars {
                return Err(NewtonError::DimensionMismatch {
                    expected: num_vars,
                    found: p.num_vars(),
                });
            }
            if p.terms.iter().any(|(_, c)| !c.is_finite()) {
                return Err(NewtonError::NonFinite);
            }
        }
        let jacobian = polys.iter().map(RealPoly::gradient).collect();
        Ok(Self {
            polys,
            num_vars,
            jacobian,
        })
    }

    pub fn polys(&self) -> &[RealPoly] {
        &self.polys
    }

    pub fn num_equations(&self) -> usize {
        self.polys.len()
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn is_square(&self) -> bool {
        self.polys.len() == self.num_vars
    }

    pub fn jacobian_polys(&self) -> &[Vec<RealPoly>] {
        &self.jacobian
    }

    pub fn eval(&self, x: &[f64]) -> DVector<f64> {
        DVector::from_iterator(self.polys.len(), self.polys.iter().map(|p| p.eval(x)))
    }

    /// `J(x)` with rows indexed by equations: `J_ij = ∂f_i/∂x_j`.
    pub fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(self.polys.len(), self.num_vars, |i, j| {
            self.jacobian[i][j].eval(x)
        })
    }

    /// `(f, J)` with the last equations replaced, used when completing
    /// systems.
    pub fn extended(&self, extra: &[RealPoly]) -> Result<Self, NewtonError> {
        let mut polys = self.polys.clone();
        polys.extend(extra.iter().cloned());
        Self::new(polys)
    }
}
