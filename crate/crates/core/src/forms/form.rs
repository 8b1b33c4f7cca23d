use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, ToPrimitive, Zero};

use super::linear::LinearChange;
use super::matrix::SymmetricMatrix;
use super::point::ProjectivePoint;
use super::{FormError, Rational};

/// Exponent vector of a monomial, one entry per variable.
pub type Monomial = Vec<u32>;

/// Sparse homogeneous polynomial with rational coefficients.
///
/// Terms are kept in a `BTreeMap` so iteration order (and therefore every
/// serialized form) is deterministic. Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HomogeneousForm {
    num_vars: usize,
    degree: u32,
    terms: BTreeMap<Monomial, Rational>,
}

/// Result of eliminating one variable along a hyperplane `L = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HyperplaneRestriction {
    /// The restricted form in `num_vars - 1` variables (the eliminated
    /// variable is removed, the others keep their relative order).
    pub form: HomogeneousForm,
    pub eliminated: usize,
    /// `T` with `L(T·y) = y_eliminated`; restricting `F∘T` to
    /// `y_eliminated = 0` gives `form`.
    pub change: LinearChange,
}

impl HomogeneousForm {
    pub fn zero(num_vars: usize, degree: u32) -> Self {
        Self {
            num_vars,
            degree,
            terms: BTreeMap::new(),
        }
    }

    /// Validates exponent vectors, merges repeated monomials and drops zeros.
    pub fn new<I>(num_vars: usize, degree: u32, terms: I) -> Result<Self, FormError>
    where
        I: IntoIterator<Item = (Monomial, Rational)>,
    {
        let mut form = Self::zero(num_vars, degree);
        for (exponents, coeff) in terms {
            if exponents.len() != num_vars {
                return Err(FormError::DimensionMismatch {
                    expected: num_vars,
                    found: exponents.len(),
                });
            }
            let total: u32 = exponents.iter().sum();
            if total != degree {
                return Err(FormError::DegreeMismatch {
                    exponents,
                    expected: degree,
                    found: total,
                });
            }
            form.add_term(exponents, coeff);
        }
        Ok(form)
    }

    pub fn from_integer_terms(
        num_vars: usize,
        degree: u32,
        terms: &[(i64, &[u32])],
    ) -> Result<Self, FormError> {
        Self::new(
            num_vars,
            degree,
            terms
                .iter()
                .map(|(c, e)| (e.to_vec(), Rational::from_integer((*c).into()))),
        )
    }

    /// The linear form `Σ coeffs[i]·x_i`.
    pub fn linear(coeffs: &[Rational]) -> Self {
        let n = coeffs.len();
        let mut form = Self::zero(n, 1);
        for (i, c) in coeffs.iter().enumerate() {
            let mut e = vec![0; n];
            e[i] = 1;
            form.add_term(e, c.clone());
        }
        form
    }

    pub fn variable(num_vars: usize, index: usize) -> Self {
        let mut coeffs = vec![Rational::zero(); num_vars];
        coeffs[index] = Rational::one();
        Self::linear(&coeffs)
    }

    fn add_term(&mut self, exponents: Monomial, coeff: Rational) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(exponents);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, exponents: &[u32]) -> Rational {
        self.terms
            .get(exponents)
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// Coefficient vector of a linear form.
    pub fn linear_coefficients(&self) -> Result<Vec<Rational>, FormError> {
        self.expect_degree(1)?;
        Ok((0..self.num_vars)
            .map(|i| {
                let mut e = vec![0; self.num_vars];
                e[i] = 1;
                self.coefficient(&e)
            })
            .collect())
    }

    pub(crate) fn expect_degree(&self, degree: u32) -> Result<(), FormError> {
        if self.degree != degree {
            return Err(FormError::WrongDegree {
                expected: degree,
                found: self.degree,
            });
        }
        Ok(())
    }

    fn check_len(&self, found: usize) -> Result<(), FormError> {
        if found != self.num_vars {
            return Err(FormError::DimensionMismatch {
                expected: self.num_vars,
                found,
            });
        }
        Ok(())
    }

    pub fn evaluate(&self, x: &[Rational]) -> Result<Rational, FormError> {
        self.check_len(x.len())?;
        let mut total = Rational::zero();
        for (e, c) in &self.terms {
            let mut term = c.clone();
            for (xi, &k) in x.iter().zip(e) {
                if k > 0 {
                    term *= num_traits::pow(xi.clone(), k as usize);
                }
            }
            total += term;
        }
        Ok(total)
    }

    /// Exact value at the canonical integer representative of `p`.
    pub fn evaluate_at(&self, p: &ProjectivePoint) -> Result<Rational, FormError> {
        self.evaluate(&p.to_rationals())
    }

    pub fn evaluate_f64(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                let c = c.to_f64().unwrap_or(f64::NAN);
                e.iter()
                    .zip(x)
                    .fold(c, |acc, (&k, xi)| acc * xi.powi(k as i32))
            })
            .sum()
    }

    /// Formal partial derivative with respect to `x_index`.
    pub fn partial(&self, index: usize) -> Self {
        let mut out = Self::zero(self.num_vars, self.degree.saturating_sub(1));
        for (e, c) in &self.terms {
            if e[index] == 0 {
                continue;
            }
            let mut d = e.clone();
            d[index] -= 1;
            out.add_term(d, c * Rational::from_integer(e[index].into()));
        }
        out
    }

    pub fn gradient(&self) -> Vec<Self> {
        (0..self.num_vars).map(|i| self.partial(i)).collect()
    }

    pub fn gradient_at(&self, p: &ProjectivePoint) -> Result<Vec<Rational>, FormError> {
        self.gradient_at_rational(&p.to_rationals())
    }

    pub fn gradient_at_rational(&self, x: &[Rational]) -> Result<Vec<Rational>, FormError> {
        self.check_len(x.len())?;
        let mut grad = vec![Rational::zero(); self.num_vars];
        for (e, c) in &self.terms {
            for (i, &ei) in e.iter().enumerate() {
                if ei == 0 {
                    continue;
                }
                let mut term = c * Rational::from_integer(ei.into());
                for (j, (xj, &k)) in x.iter().zip(e).enumerate() {
                    let k = if j == i { k - 1 } else { k };
                    if k > 0 {
                        term *= num_traits::pow(xj.clone(), k as usize);
                    }
                }
                grad[i] += term;
            }
        }
        Ok(grad)
    }

    /// Matrix of second partials evaluated at `p`.
    pub fn hessian_at(&self, p: &ProjectivePoint) -> Result<SymmetricMatrix, FormError> {
        self.hessian_at_rational(&p.to_rationals())
    }

    pub fn hessian_at_rational(&self, x: &[Rational]) -> Result<SymmetricMatrix, FormError> {
        self.check_len(x.len())?;
        let n = self.num_vars;
        let mut h = vec![vec![Rational::zero(); n]; n];
        for (e, c) in &self.terms {
            for i in 0..n {
                for j in i..n {
                    let factor = if i == j {
                        e[i] * e[i].saturating_sub(1)
                    } else {
                        e[i] * e[j]
                    };
                    if factor == 0 {
                        continue;
                    }
                    let mut d = e.clone();
                    d[i] -= 1;
                    d[j] -= 1;
                    let mut term = c * Rational::from_integer(factor.into());
                    for (xk, &k) in x.iter().zip(&d) {
                        if k > 0 {
                            term *= num_traits::pow(xk.clone(), k as usize);
                        }
                    }
                    h[i][j] += term;
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                h[i][j] = h[j][i].clone();
            }
        }
        SymmetricMatrix::new(h)
    }

    /// Gram matrix `A` of a quadratic form, `q(x) = xᵀ A x`.
    pub fn gram_matrix(&self) -> Result<SymmetricMatrix, FormError> {
        self.expect_degree(2)?;
        let n = self.num_vars;
        let half = Rational::new(1.into(), 2.into());
        let mut a = vec![vec![Rational::zero(); n]; n];
        for (e, c) in &self.terms {
            let vars: Vec<usize> = (0..n).filter(|&i| e[i] > 0).collect();
            match vars.as_slice() {
                [i] => a[*i][*i] = c.clone(),
                [i, j] => {
                    a[*i][*j] = c * &half;
                    a[*j][*i] = c * &half;
                }
                _ => unreachable!("quadratic monomial"),
            }
        }
        SymmetricMatrix::new(a)
    }

    pub fn scale(&self, factor: &Rational) -> Self {
        let mut out = Self::zero(self.num_vars, self.degree);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c * factor);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self, FormError> {
        self.check_len(other.num_vars)?;
        if other.is_zero() {
            return Ok(self.clone());
        }
        if self.is_zero() {
            return Ok(other.clone());
        }
        if self.degree != other.degree {
            return Err(FormError::WrongDegree {
                expected: self.degree,
                found: other.degree,
            });
        }
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, FormError> {
        self.add(&other.scale(&-Rational::one()))
    }

    pub fn mul(&self, other: &Self) -> Result<Self, FormError> {
        self.check_len(other.num_vars)?;
        let mut out = Self::zero(self.num_vars, self.degree + other.degree);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Monomial = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        Ok(out)
    }

    /// Substitutes `x_i ↦ subs[i]`, where every `subs[i]` is a linear form in
    /// a common set of variables.
    pub fn compose_linear(&self, subs: &[HomogeneousForm]) -> Result<Self, FormError> {
        self.check_len(subs.len())?;
        let target_vars = subs.first().map_or(0, |s| s.num_vars);
        for s in subs {
            s.expect_degree(1)?;
            if s.num_vars != target_vars {
                return Err(FormError::DimensionMismatch {
                    expected: target_vars,
                    found: s.num_vars,
                });
            }
        }
        let mut powers: BTreeMap<(usize, u32), HomogeneousForm> = BTreeMap::new();
        let mut out = Self::zero(target_vars, self.degree);
        for (e, c) in &self.terms {
            let mut term = Self::new(target_vars, 0, [(vec![0; target_vars], c.clone())])?;
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                if !powers.contains_key(&(i, k)) {
                    let mut p = subs[i].clone();
                    for _ in 1..k {
                        p = p.mul(&subs[i])?;
                    }
                    powers.insert((i, k), p);
                }
                term = term.mul(&powers[&(i, k)])?;
            }
            for (te, tc) in term.terms {
                out.add_term(te, tc);
            }
        }
        Ok(out)
    }

    /// `F∘T`, i.e. `y ↦ F(T·y)`.
    pub fn apply_linear_change(&self, change: &LinearChange) -> Result<Self, FormError> {
        self.check_len(change.dim())?;
        let subs: Vec<HomogeneousForm> = change
            .matrix()
            .iter()
            .map(|row| HomogeneousForm::linear(row))
            .collect();
        self.compose_linear(&subs)
    }

    /// Sets `x_index = 0` and removes that variable.
    pub fn drop_variable(&self, index: usize) -> Self {
        let mut out = Self::zero(self.num_vars - 1, self.degree);
        for (e, c) in &self.terms {
            if e[index] != 0 {
                continue;
            }
            let mut d = e.clone();
            d.remove(index);
            out.add_term(d, c.clone());
        }
        out
    }

    /// Restricts to the hyperplane `L = 0` by eliminating the variable with
    /// the largest-magnitude coefficient in `L` (lowest index on ties).
    pub fn restrict_to_hyperplane(
        &self,
        hyperplane: &HomogeneousForm,
    ) -> Result<HyperplaneRestriction, FormError> {
        self.check_len(hyperplane.num_vars)?;
        let coeffs = hyperplane.linear_coefficients()?;
        let mut pivot: Option<usize> = None;
        for (i, c) in coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if pivot.map_or(true, |p| c.abs() > coeffs[p].abs()) {
                pivot = Some(i);
            }
        }
        let k = pivot.ok_or(FormError::ZeroLinearForm)?;
        let n = self.num_vars;
        let lead = coeffs[k].clone();
        let columns: Vec<Vec<Rational>> = (0..n)
            .map(|j| {
                let mut col = vec![Rational::zero(); n];
                if j == k {
                    col[k] = lead.recip();
                } else {
                    col[j] = Rational::one();
                    col[k] = -(&coeffs[j] / &lead);
                }
                col
            })
            .collect();
        let change = LinearChange::from_columns(&columns)?;
        let form = self.apply_linear_change(&change)?.drop_variable(k);
        Ok(HyperplaneRestriction {
            form,
            eliminated: k,
            change,
        })
    }
}

impl fmt::Display for HomogeneousForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // Highest monomials first reads more naturally.
        for (idx, (e, c)) in self.terms.iter().rev().enumerate() {
            let negative = c.is_negative();
            let abs = c.abs();
            if idx == 0 {
                if negative {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if negative { '-' } else { '+' })?;
            }
            let vars: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| if k == 1 { format!("x{i}") } else { format!("x{i}^{k}") })
                .collect();
            if vars.is_empty() {
                write!(f, "{}", super::format_rational(&abs))?;
            } else if abs.is_one() {
                write!(f, "{}", vars.join("*"))?;
            } else {
                write!(f, "{}*{}", super::format_rational(&abs), vars.join("*"))?;
            }
        }
        Ok(())
    }
}
