use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use super::{primitive_integer_vector, FormError, Rational};

/// A rational point of projective space, stored as its canonical
/// representative: a primitive integer vector whose first nonzero
/// coordinate is positive.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProjectivePoint {
    coords: Vec<BigInt>,
}

impl ProjectivePoint {
    pub fn new(coords: Vec<BigInt>) -> Result<Self, FormError> {
        let content = coords.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
        if content.is_zero() {
            return Err(FormError::ZeroPoint);
        }
        let first_negative = coords
            .iter()
            .find(|c| !c.is_zero())
            .is_some_and(|c| c.is_negative());
        let scale = if first_negative { -content } else { content };
        Ok(Self {
            coords: coords.into_iter().map(|c| c / &scale).collect(),
        })
    }

    pub fn from_i64s(coords: &[i64]) -> Result<Self, FormError> {
        Self::new(coords.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn from_rationals(coords: &[Rational]) -> Result<Self, FormError> {
        let ints = primitive_integer_vector(coords).ok_or(FormError::ZeroPoint)?;
        Self::new(ints)
    }

    /// Integer linear combination `a·p + b·q`, canonicalized.
    pub fn combine(a: &BigInt, p: &Self, b: &BigInt, q: &Self) -> Result<Self, FormError> {
        if p.dim() != q.dim() {
            return Err(FormError::DimensionMismatch {
                expected: p.dim(),
                found: q.dim(),
            });
        }
        Self::new(
            p.coords
                .iter()
                .zip(&q.coords)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        )
    }

    pub fn coords(&self) -> &[BigInt] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn to_rationals(&self) -> Vec<Rational> {
        self.coords
            .iter()
            .map(|c| Rational::from_integer(c.clone()))
            .collect()
    }

    /// Lossy conversion; coordinates beyond the `f64` range become infinite.
    pub fn to_f64(&self) -> Vec<f64> {
        self.coords
            .iter()
            .map(|c| c.to_f64().unwrap_or(f64::NAN))
            .collect()
    }

    /// Maximum absolute coordinate of the canonical representative.
    pub fn naive_height(&self) -> BigInt {
        self.coords
            .iter()
            .map(|c| c.abs())
            .max()
            .unwrap_or_else(BigInt::zero)
    }
}

impl fmt::Display for ProjectivePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ":")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Parses the projective literal `(a:b:…:c)`. Entries may be rationals.
impl FromStr for ProjectivePoint {
    type Err = FormError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || FormError::Parse {
            what: "projective point",
            input: s.to_string(),
        };
        let inner = s
            .trim()
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .ok_or_else(err)?;
        let coords = inner
            .split(':')
            .map(super::parse_rational)
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| err())?;
        if coords.len() < 2 {
            return Err(err());
        }
        Self::from_rationals(&coords)
    }
}
