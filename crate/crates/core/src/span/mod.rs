//! Rational point enumeration and the secant/tangent span closure
//! `S = S₀ ⊆ S₁ ⊆ … ⊆ X(ℚ)`.

mod closure;
mod enumerate;

pub use closure::{
    check_tangent_section_containment, is_in_span, replay_step, secant_closedness_violations,
    span_closure, span_closure_with_threads, verify_provenance, SectionCheck, SectionEntry,
    SectionStatus, SpanConfig, SpanMembership, SpanState, SpanStep, StepKind,
};
pub use enumerate::{enumerate_points, enumerate_points_on_hyperplane, hyperplane_points, tangent_section_points};

use std::collections::BTreeSet;

use num_bigint::BigInt;
use thiserror::Error;

use crate::forms::ProjectivePoint;
use crate::geometry::GeometryError;

/// Set of canonical points, ordered so that iteration and serialization are
/// deterministic.
pub type PointSet = BTreeSet<ProjectivePoint>;

/// Upper bound on the naive height of enumerated points.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HeightBound(u64);

impl HeightBound {
    pub fn new(max_coord: u64) -> Result<Self, SpanError> {
        if max_coord == 0 {
            return Err(SpanError::InvalidHeight);
        }
        Ok(Self(max_coord))
    }

    pub fn get(self) -> u64 {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpanError {
    #[error("height bound must be at least 1")]
    InvalidHeight,
    #[error("seed {0} is not on the hypersurface")]
    SeedNotOnHypersurface(ProjectivePoint),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Maximum absolute coordinate of the canonical representative.
pub fn naive_height(p: &ProjectivePoint) -> BigInt {
    p.naive_height()
}
