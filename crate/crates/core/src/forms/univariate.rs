//! Univariate polynomials over ℚ, used to split binary forms into rational
//! linear factors without any floating-point step.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::Rational;

/// Dense univariate polynomial, coefficients in ascending degree order.
/// The leading coefficient is never zero (the zero polynomial is empty).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniPoly {
    coeffs: Vec<Rational>,
}

impl UniPoly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the zero polynomial reported as `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&Rational> {
        self.coeffs.last()
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.coeffs
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * Rational::from_integer(i.into()))
                .collect(),
        )
    }

    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        let d = divisor.degree().expect("division by zero polynomial");
        let lead = divisor.leading().unwrap().clone();
        let mut rem = self.coeffs.clone();
        if rem.len() <= d {
            return (Self::new(vec![]), self.clone());
        }
        let mut quot = vec![Rational::zero(); rem.len() - d];
        for i in (0..quot.len()).rev() {
            let factor = &rem[i + d] / &lead;
            if factor.is_zero() {
                continue;
            }
            for (j, c) in divisor.coeffs.iter().enumerate() {
                rem[i + j] -= &factor * c;
            }
            quot[i] = factor;
        }
        rem.truncate(d);
        (Self::new(quot), Self::new(rem))
    }

    pub fn monic(&self) -> Self {
        match self.leading() {
            None => self.clone(),
            Some(l) => Self::new(self.coeffs.iter().map(|c| c / l).collect()),
        }
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Integer coefficients with the same roots and the same sign pattern
    /// (the scale factor is positive).
    pub fn primitive_integer_coeffs(&self) -> Vec<BigInt> {
        let den = super::common_denominator(&self.coeffs);
        let ints: Vec<BigInt> = self
            .coeffs
            .iter()
            .map(|c| c.numer() * (&den / c.denom()))
            .collect();
        let content = ints.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
        if content.is_zero() {
            return ints;
        }
        ints.into_iter().map(|v| v / &content).collect()
    }

    /// Square-free decomposition `p = c · Π f_i^i` (Yun). Returns `(f_i, i)`
    /// pairs for the non-constant factors.
    pub fn squarefree_decomposition(&self) -> Vec<(UniPoly, u32)> {
        let mut out = Vec::new();
        if self.degree().map_or(true, |d| d == 0) {
            return out;
        }
        let d = self.derivative();
        let a = self.gcd(&d);
        let mut b = self.div_rem(&a).0;
        let mut c = d.div_rem(&a).0;
        let mut d = c.sub(&b.derivative());
        let mut i = 1;
        loop {
            let factor = b.gcd(&d);
            if factor.degree().is_some_and(|deg| deg > 0) {
                out.push((factor.clone(), i));
            }
            b = b.div_rem(&factor).0;
            if b.degree().map_or(true, |deg| deg == 0) {
                break;
            }
            c = d.div_rem(&factor).0;
            d = c.sub(&b.derivative());
            i += 1;
        }
        out
    }

    fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new(
            (0..n)
                .map(|i| {
                    let a = self.coeffs.get(i).cloned().unwrap_or_else(Rational::zero);
                    let b = other.coeffs.get(i).cloned().unwrap_or_else(Rational::zero);
                    a - b
                })
                .collect(),
        )
    }

    /// All rational roots of a square-free polynomial, in increasing order.
    ///
    /// Real roots are isolated with a Sturm sequence and refined by exact
    /// bisection until an isolating interval is narrower than `1/a²` (`a` the
    /// leading coefficient of the primitive integer model); a rational root
    /// `p/q` must have `q | a`, so it is then the simplest fraction in the
    /// interval.
    pub fn rational_roots_squarefree(&self) -> Vec<Rational> {
        let Some(deg) = self.degree() else {
            return vec![];
        };
        if deg == 0 {
            return vec![];
        }
        let ints = self.primitive_integer_coeffs();
        let poly = IntPoly(ints);
        if deg == 1 {
            return vec![Rational::new(-poly.0[0].clone(), poly.0[1].clone())];
        }
        let lead = poly.0[deg].abs();
        let target_width = Rational::new(BigInt::one(), &lead * &lead);
        let sturm = poly.sturm_sequence();

        let bound = {
            let max = poly.0[..deg].iter().map(|c| c.abs()).max().unwrap();
            Rational::from_integer(BigInt::one() + max.div_ceil(&lead))
        };
        let mut roots = Vec::new();
        let mut stack = vec![(-bound.clone(), bound)];
        let two = Rational::from_integer(2.into());
        while let Some((lo, hi)) = stack.pop() {
            // Sturm counts distinct roots in (lo, hi].
            let count = sturm_variations(&sturm, &lo) - sturm_variations(&sturm, &hi);
            match count {
                0 => {}
                1 if poly.eval_sign(&hi) == 0 => roots.push(hi),
                1 => roots.extend(refine_single_root(&poly, lo, hi, &target_width)),
                _ => {
                    let mid = (&lo + &hi) / &two;
                    stack.push((lo, mid.clone()));
                    stack.push((mid, hi));
                }
            }
        }
        roots.sort();
        roots.dedup();
        roots
    }
}

/// Integer polynomial in ascending order, used for sign evaluation.
struct IntPoly(Vec<BigInt>);

impl IntPoly {
    /// Sign of `p(x)` computed from the homogenized integer evaluation.
    fn eval_sign(&self, x: &Rational) -> i32 {
        sign_of(&homogeneous_eval(&self.0, x.numer(), x.denom()))
    }

    fn sturm_sequence(&self) -> Vec<Vec<BigInt>> {
        let p0 = UniPoly::new(self.0.iter().map(|c| Rational::from_integer(c.clone())).collect());
        let p1 = p0.derivative();
        let mut seq = vec![p0, p1];
        loop {
            let n = seq.len();
            if seq[n - 1].degree().map_or(true, |d| d == 0) {
                break;
            }
            let (_, r) = seq[n - 2].div_rem(&seq[n - 1]);
            if r.is_zero() {
                break;
            }
            seq.push(r.scale_neg());
        }
        seq.iter().map(UniPoly::primitive_integer_coeffs).collect()
    }
}

impl UniPoly {
    fn scale_neg(&self) -> Self {
        Self::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

/// `Σ c_i p^i q^{d-i}` for `x = p/q`, `q > 0`; same sign as `p(x)`.
fn homogeneous_eval(coeffs: &[BigInt], p: &BigInt, q: &BigInt) -> BigInt {
    let d = coeffs.len().saturating_sub(1);
    let mut total = BigInt::zero();
    let mut p_pow = BigInt::one();
    let q_pows: Vec<BigInt> = {
        let mut v = vec![BigInt::one()];
        for _ in 0..d {
            let next = v.last().unwrap() * q;
            v.push(next);
        }
        v
    };
    for (i, c) in coeffs.iter().enumerate() {
        if !c.is_zero() {
            total += c * &p_pow * &q_pows[d - i];
        }
        p_pow *= p;
    }
    total
}

fn sign_of(v: &BigInt) -> i32 {
    if v.is_zero() {
        0
    } else if v.is_negative() {
        -1
    } else {
        1
    }
}

fn sturm_variations(seq: &[Vec<BigInt>], x: &Rational) -> i64 {
    let mut last = 0;
    let mut count = 0;
    for coeffs in seq {
        let s = sign_of(&homogeneous_eval(coeffs, x.numer(), x.denom()));
        if s == 0 {
            continue;
        }
        if last != 0 && s != last {
            count += 1;
        }
        last = s;
    }
    count
}

/// Refines an interval `(lo, hi]` holding exactly one simple root, with
/// `p(hi) != 0`.
fn refine_single_root(
    poly: &IntPoly,
    mut lo: Rational,
    mut hi: Rational,
    target_width: &Rational,
) -> Option<Rational> {
    let two = Rational::from_integer(2.into());
    let s_hi = poly.eval_sign(&hi);
    while &hi - &lo >= *target_width {
        let mid = (&lo + &hi) / &two;
        let s_mid = poly.eval_sign(&mid);
        if s_mid == 0 {
            return Some(mid);
        }
        if s_mid == s_hi {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let candidate = simplest_rational_between(&lo, &hi);
    (poly.eval_sign(&candidate) == 0).then_some(candidate)
}

/// The rational with the smallest denominator in the closed interval
/// `[lo, hi]` (Stern–Brocot descent).
pub fn simplest_rational_between(lo: &Rational, hi: &Rational) -> Rational {
    assert!(lo <= hi);
    if !lo.is_positive() && !hi.is_negative() {
        return Rational::zero();
    }
    if hi.is_negative() {
        return -simplest_rational_between(&-hi, &-lo);
    }
    let fl = lo.floor();
    if &fl == lo {
        return fl;
    }
    let next = &fl + Rational::one();
    if &next <= hi {
        return next;
    }
    let inner = simplest_rational_between(&(hi - &fl).recip(), &(lo - &fl).recip());
    fl + inner.recip()
}

/// Best rational approximation of `x` with denominator at most `max_den`
/// (continued fraction convergents and semiconvergents).
pub fn rationalize_f64(x: f64, max_den: u64) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    let exact = Rational::from_float(x)?;
    let max_den = BigInt::from(max_den);
    let (mut p0, mut q0) = (BigInt::zero(), BigInt::one());
    let (mut p1, mut q1) = (BigInt::one(), BigInt::zero());
    let mut rest = exact.clone();
    loop {
        let a = rest.floor().to_integer();
        let q2 = &a * &q1 + &q0;
        if q2 > max_den {
            // Largest admissible semiconvergent.
            let k = (&max_den - &q0) / &q1;
            let semi = Rational::new(&k * &p1 + &p0, &k * &q1 + &q0);
            let conv = Rational::new(p1.clone(), q1.clone());
            let better = if (&semi - &exact).abs() < (&conv - &exact).abs() {
                semi
            } else {
                conv
            };
            return Some(better);
        }
        let p2 = &a * &p1 + &p0;
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
        let frac = &rest - Rational::from_integer(a);
        if frac.is_zero() {
            return Some(Rational::new(p1, q1));
        }
        rest = frac.recip();
    }
}
