use num_bigint::BigInt;
use num_traits::Zero;

use super::{ensure_cubic, GeometryError, ProjectiveLine};
use crate::forms::univariate::UniPoly;
use crate::forms::{dot, HomogeneousForm, ProjectivePoint, Rational};

/// Intersection divisor of a line with the cubic: rational points with
/// multiplicities plus the degrees of the irreducible non-linear factors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LineDivisor {
    /// Sorted by point.
    pub rational_points: Vec<(ProjectivePoint, u32)>,
    /// `(factor degree, multiplicity)`, sorted.
    pub irrational_part: Vec<(u32, u32)>,
}

impl LineDivisor {
    /// Divisor `Σ points`, repeated entries adding multiplicity.
    pub fn from_points(points: &[ProjectivePoint]) -> Self {
        let mut sorted = points.to_vec();
        sorted.sort();
        let mut rational_points: Vec<(ProjectivePoint, u32)> = Vec::new();
        for p in sorted {
            match rational_points.last_mut() {
                Some((last, m)) if *last == p => *m += 1,
                _ => rational_points.push((p, 1)),
            }
        }
        Self {
            rational_points,
            irrational_part: vec![],
        }
    }

    pub fn degree(&self) -> u32 {
        self.rational_points.iter().map(|(_, m)| m).sum::<u32>()
            + self.irrational_part.iter().map(|(d, m)| d * m).sum::<u32>()
    }

    pub fn multiplicity(&self, p: &ProjectivePoint) -> u32 {
        self.rational_points
            .iter()
            .find(|(q, _)| q == p)
            .map_or(0, |(_, m)| *m)
    }

    /// Rational points listed with multiplicity.
    pub fn points(&self) -> Vec<ProjectivePoint> {
        self.rational_points
            .iter()
            .flat_map(|(p, m)| std::iter::repeat(p.clone()).take(*m as usize))
            .collect()
    }
}

/// Coefficients `[a, b, c, d]` of `F(sA + tB) = as³ + bs²t + cst² + dt³` for
/// the line basis `A, B`.
pub fn restricted_cubic_coefficients(
    f: &HomogeneousForm,
    line: &ProjectiveLine,
) -> Result<[Rational; 4], GeometryError> {
    ensure_cubic(f)?;
    let [a, b] = line.basis();
    let (ra, rb) = (a.to_rationals(), b.to_rationals());
    Ok([
        f.evaluate(&ra)?,
        dot(&f.gradient_at_rational(&ra)?, &rb),
        dot(&f.gradient_at_rational(&rb)?, &ra),
        f.evaluate(&rb)?,
    ])
}

/// `ℓ·X` for a line not contained in `X`.
pub fn line_cubic_divisor(
    f: &HomogeneousForm,
    line: &ProjectiveLine,
) -> Result<LineDivisor, GeometryError> {
    let coeffs = restricted_cubic_coefficients(f, line)?;
    if coeffs.iter().all(Zero::is_zero) {
        return Err(GeometryError::LineContained);
    }
    let (roots, irrational_part) = split_binary_form(&coeffs);
    let mut rational_points: Vec<(ProjectivePoint, u32)> = roots
        .into_iter()
        .map(|((s, t), m)| Ok((line.point_at(&s, &t)?, m)))
        .collect::<Result<_, GeometryError>>()?;
    rational_points.sort();
    Ok(LineDivisor {
        rational_points,
        irrational_part,
    })
}

/// Splits a nonzero binary form `Σ c_i s^{k−i} t^i` over ℚ into rational
/// roots `(s : t)` with multiplicity and irreducible factors of higher
/// degree, reported as `(degree, multiplicity)`.
pub fn split_binary_form(coeffs: &[Rational]) -> (Vec<((BigInt, BigInt), u32)>, Vec<(u32, u32)>) {
    let mut roots = Vec::new();
    let mut irrational = Vec::new();
    let leading_zeros = coeffs.iter().take_while(|c| c.is_zero()).count();
    if leading_zeros == coeffs.len() {
        return (roots, irrational);
    }
    if leading_zeros > 0 {
        // t^m divides the form: the root (1 : 0).
        roots.push(((BigInt::from(1), BigInt::zero()), leading_zeros as u32));
    }
    // Dehomogenize at t = 1; x = s/t, ascending coefficients.
    let univariate = UniPoly::new(coeffs[leading_zeros..].iter().rev().cloned().collect());
    for (factor, multiplicity) in univariate.squarefree_decomposition() {
        let found = factor.rational_roots_squarefree();
        let deg = factor.degree().unwrap_or(0) - found.len();
        for x in found {
            roots.push(((x.numer().clone(), x.denom().clone()), multiplicity));
        }
        if deg > 0 {
            irrational.push((deg as u32, multiplicity));
        }
    }
    irrational.sort();
    (roots, irrational)
}
