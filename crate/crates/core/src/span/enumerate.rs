use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use super::{HeightBound, PointSet};
use crate::forms::{common_denominator, primitive_integer_vector, HomogeneousForm, ProjectivePoint, Rational};
use crate::geometry::{smooth_gradient, GeometryError};

const PRIMES: [i64; 3] = [101, 103, 107];

/// `F` with integer coefficients, terms split by the exponent of the last
/// variable.
struct IntegerForm {
    terms: Vec<(Vec<u32>, BigInt)>,
    last_degree: usize,
}

impl IntegerForm {
    fn new(f: &HomogeneousForm) -> Self {
        let coeffs: Vec<Rational> = f.terms().map(|(_, c)| c.clone()).collect();
        let den = common_denominator(&coeffs);
        let terms = f
            .terms()
            .map(|(m, c)| (m.clone(), (c * Rational::from_integer(den.clone())).to_integer()))
            .collect();
        Self {
            terms,
            last_degree: f.degree() as usize,
        }
    }

    fn evaluate(&self, x: &[BigInt]) -> BigInt {
        self.terms
            .iter()
            .map(|(m, c)| {
                m.iter()
                    .zip(x)
                    .fold(c.clone(), |acc, (&e, xi)| acc * xi.pow(e))
            })
            .sum()
    }

    /// Coefficients in the last variable after fixing the others to `prefix`.
    fn last_variable_poly(&self, prefix: &[BigInt]) -> Vec<BigInt> {
        let mut out = vec![BigInt::zero(); self.last_degree + 1];
        for (m, c) in &self.terms {
            let (last, rest) = m.split_last().expect("at least one variable");
            let v = rest
                .iter()
                .zip(prefix)
                .fold(c.clone(), |acc, (&e, xi)| acc * xi.pow(e));
            out[*last as usize] += v;
        }
        out
    }

    fn last_variable_poly_mod(&self, prefix: &[i64], p: i64) -> Vec<i64> {
        let mut out = vec![0i64; self.last_degree + 1];
        for (m, c) in &self.terms {
            let (last, rest) = m.split_last().expect("at least one variable");
            let mut v = c.mod_floor(&BigInt::from(p)).to_i64().expect("small residue");
            for (&e, &xi) in rest.iter().zip(prefix) {
                let xi = xi.rem_euclid(p);
                for _ in 0..e {
                    v = v * xi % p;
                }
            }
            let slot = &mut out[*last as usize];
            *slot = (*slot + v) % p;
        }
        out
    }
}

fn eval_mod(poly: &[i64], x: i64, p: i64) -> i64 {
    let x = x.rem_euclid(p);
    poly.iter().rev().fold(0, |acc, &c| (acc * x + c) % p)
}

fn eval_int(poly: &[BigInt], x: &BigInt) -> BigInt {
    poly.iter().rev().fold(BigInt::zero(), |acc, c| acc * x + c)
}

fn is_primitive(v: &[BigInt]) -> bool {
    v.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c)) == BigInt::from(1)
}

/// Steps an odometer over `[-h, h]^len`. Returns false once exhausted.
fn advance(digits: &mut [i64], h: i64) -> bool {
    for d in digits.iter_mut().rev() {
        if *d < h {
            *d += 1;
            return true;
        }
        *d = -h;
    }
    false
}

/// All rational points of `X` with naive height at most `H`.
///
/// The first `n − 1` coordinates are scanned exhaustively; for each prefix
/// the last coordinate is filtered by its residues modulo a few small primes
/// before the exact check.
pub fn enumerate_points(f: &HomogeneousForm, bound: HeightBound) -> PointSet {
    let n = f.num_vars();
    let mut out = PointSet::new();
    if n == 0 {
        return out;
    }
    let form = IntegerForm::new(f);
    let h = bound.get() as i64;
    let mut prefix = vec![-h; n - 1];
    loop {
        let leading = prefix.iter().find(|&&c| c != 0).copied();
        match leading {
            Some(c) if c > 0 => scan_last(&form, &prefix, h, &mut out),
            Some(_) => {}
            None => {
                let mut v = vec![BigInt::zero(); n];
                v[n - 1] = BigInt::from(1);
                if form.evaluate(&v).is_zero() {
                    out.insert(ProjectivePoint::new(v).expect("nonzero"));
                }
            }
        }
        if !advance(&mut prefix, h) {
            break;
        }
    }
    out
}

fn scan_last(form: &IntegerForm, prefix: &[i64], h: i64, out: &mut PointSet) {
    let residues: Vec<(i64, Vec<i64>)> = PRIMES
        .iter()
        .map(|&p| (p, form.last_variable_poly_mod(prefix, p)))
        .collect();
    let big_prefix: Vec<BigInt> = prefix.iter().map(|&c| BigInt::from(c)).collect();
    let mut exact: Option<Vec<BigInt>> = None;
    for x in -h..=h {
        if residues.iter().any(|(p, poly)| eval_mod(poly, x, *p) != 0) {
            continue;
        }
        let poly = exact.get_or_insert_with(|| form.last_variable_poly(&big_prefix));
        let bx = BigInt::from(x);
        if !eval_int(poly, &bx).is_zero() {
            continue;
        }
        let mut v = big_prefix.clone();
        v.push(bx);
        if is_primitive(&v) {
            out.insert(ProjectivePoint::new(v).expect("nonzero"));
        }
    }
}

/// Canonical points of height at most `H` on the hyperplane `l·x = 0`.
pub fn hyperplane_points(l: &[BigInt], bound: HeightBound) -> Vec<ProjectivePoint> {
    let mut out = Vec::new();
    hyperplane_scan(l, bound, |v| {
        out.push(ProjectivePoint::new(v.to_vec()).expect("nonzero"));
    });
    out.sort();
    out
}

/// Solves for the coordinate with the largest `|l_k|` and scans the rest.
fn hyperplane_scan(l: &[BigInt], bound: HeightBound, mut visit: impl FnMut(&[BigInt])) {
    let n = l.len();
    let Some(k) = (0..n)
        .filter(|&i| !l[i].is_zero())
        .max_by(|&a, &b| l[a].abs().cmp(&l[b].abs()).then(b.cmp(&a)))
    else {
        return;
    };
    let h = bound.get() as i64;
    let big_h = BigInt::from(h);
    let mut digits = vec![-h; n - 1];
    loop {
        let mut v: Vec<BigInt> = Vec::with_capacity(n);
        let mut it = digits.iter();
        for i in 0..n {
            if i == k {
                v.push(BigInt::zero());
            } else {
                v.push(BigInt::from(*it.next().expect("digit")));
            }
        }
        let rest: BigInt = (0..n).filter(|&i| i != k).map(|i| &l[i] * &v[i]).sum();
        let (q, r) = (-rest).div_rem(&l[k]);
        if r.is_zero() && q.abs() <= big_h {
            v[k] = q;
            let first = v.iter().find(|c| !c.is_zero());
            if first.is_some_and(|c| c.is_positive()) && is_primitive(&v) {
                visit(&v);
            }
        }
        if !advance(&mut digits, h) {
            break;
        }
    }
}

/// Points of `X` of height at most `H` on the hyperplane `l·x = 0`.
pub fn enumerate_points_on_hyperplane(
    f: &HomogeneousForm,
    l: &[BigInt],
    bound: HeightBound,
) -> PointSet {
    let form = IntegerForm::new(f);
    let mut out = PointSet::new();
    hyperplane_scan(l, bound, |v| {
        if form.evaluate(v).is_zero() {
            out.insert(ProjectivePoint::new(v.to_vec()).expect("nonzero"));
        }
    });
    out
}

/// `X_P(ℚ)` up to height `H`: the points of `X ∩ T_P X`.
pub fn tangent_section_points(
    f: &HomogeneousForm,
    p: &ProjectivePoint,
    bound: HeightBound,
) -> Result<PointSet, GeometryError> {
    let grad = smooth_gradient(f, p)?;
    let l = primitive_integer_vector(&grad).expect("nonzero gradient");
    Ok(enumerate_points_on_hyperplane(f, &l, bound))
}
