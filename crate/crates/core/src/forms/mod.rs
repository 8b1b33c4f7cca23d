//! Exact arithmetic for homogeneous forms over the rationals.
//!
//! Everything here is immutable after construction and every operation is
//! pure, so values can be shared freely between worker threads.

mod form;
mod linear;
pub mod matrix;
mod point;
pub mod univariate;

pub use form::{HomogeneousForm, HyperplaneRestriction, Monomial};
pub use linear::LinearChange;
pub use matrix::SymmetricMatrix;
pub use point::ProjectivePoint;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

/// Rational scalar with a positive denominator and reduced numerator.
pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormError {
    #[error("dimension mismatch: expected {expected} coordinates, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("monomial {exponents:?} has degree {found}, expected {expected}")]
    DegreeMismatch {
        exponents: Vec<u32>,
        expected: u32,
        found: u32,
    },
    #[error("projective point cannot have all coordinates zero")]
    ZeroPoint,
    #[error("linear change of coordinates is singular")]
    SingularChange,
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },
    #[error("linear form is identically zero")]
    ZeroLinearForm,
    #[error("expected a form of degree {expected}, found degree {found}")]
    WrongDegree { expected: u32, found: u32 },
    #[error("cannot parse {what} from {input:?}")]
    Parse { what: &'static str, input: String },
}

/// Least common multiple of the denominators of `values` (1 for an empty slice).
pub fn common_denominator(values: &[Rational]) -> BigInt {
    values
        .iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

/// Scales a rational vector to a primitive integer vector, preserving signs.
/// Returns `None` for the zero vector.
pub fn primitive_integer_vector(values: &[Rational]) -> Option<Vec<BigInt>> {
    let den = common_denominator(values);
    let ints: Vec<BigInt> = values
        .iter()
        .map(|v| v.numer() * (&den / v.denom()))
        .collect();
    let content = ints.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
    if content.is_zero() {
        return None;
    }
    Some(ints.into_iter().map(|v| v / &content).collect())
}

/// Parses `"p/q"`, `"p"` or a plain decimal literal such as `"-0.25"`.
pub fn parse_rational(input: &str) -> Result<Rational, FormError> {
    let err = || FormError::Parse {
        what: "rational",
        input: input.to_string(),
    };
    let s = input.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| err())?;
        let q: BigInt = q.trim().parse().map_err(|_| err())?;
        if q.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(p, q));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        let negative = int_part.starts_with('-');
        let digits = format!("{}{}", int_part.trim_start_matches(['-', '+']), frac_part);
        if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
            return Err(err());
        }
        let mut numer: BigInt = digits.parse().map_err(|_| err())?;
        if negative {
            numer = -numer;
        }
        let denom = num_traits::pow(BigInt::from(10), frac_part.len());
        return Ok(Rational::new(numer, denom));
    }
    let p: BigInt = s.parse().map_err(|_| err())?;
    Ok(Rational::from_integer(p))
}

/// `"p/q"` with `q > 1`, or `"p"` for integers.
pub fn format_rational(value: &Rational) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

pub(crate) fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}
