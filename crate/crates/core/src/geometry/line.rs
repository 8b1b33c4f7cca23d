use std::fmt;

use num_bigint::BigInt;

use super::GeometryError;
use crate::forms::matrix::{rank, reduced_row_echelon};
use crate::forms::ProjectivePoint;

/// A rational line, stored by the integer-scaled reduced row echelon form
/// of its two spanning points so that equal lines compare equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProjectiveLine {
    basis: [ProjectivePoint; 2],
}

impl ProjectiveLine {
    pub fn through(p: &ProjectivePoint, q: &ProjectivePoint) -> Result<Self, GeometryError> {
        if p.dim() != q.dim() {
            return Err(crate::forms::FormError::DimensionMismatch {
                expected: p.dim(),
                found: q.dim(),
            }
            .into());
        }
        let (rows, pivots) = reduced_row_echelon(&[p.to_rationals(), q.to_rationals()]);
        if pivots.len() < 2 {
            return Err(GeometryError::IdenticalPoints);
        }
        let a = ProjectivePoint::from_rationals(&rows[0])?;
        let b = ProjectivePoint::from_rationals(&rows[1])?;
        Ok(Self { basis: [a, b] })
    }

    pub fn basis(&self) -> &[ProjectivePoint; 2] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis[0].dim()
    }

    pub fn contains(&self, p: &ProjectivePoint) -> bool {
        p.dim() == self.dim()
            && rank(&[
                self.basis[0].to_rationals(),
                self.basis[1].to_rationals(),
                p.to_rationals(),
            ]) == 2
    }

    /// The point `s·A + t·B` for the stored basis `A, B`.
    pub fn point_at(&self, s: &BigInt, t: &BigInt) -> Result<ProjectivePoint, GeometryError> {
        Ok(ProjectivePoint::combine(s, &self.basis[0], t, &self.basis[1])?)
    }
}

impl fmt::Display for ProjectiveLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}, {}>", self.basis[0], self.basis[1])
    }
}
