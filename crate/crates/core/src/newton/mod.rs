//! Certified Newton iteration for polynomial systems, perturbation
//! stability of nondegenerate zeros, and a smooth real point finder for
//! the varieties `Y_{B,D}`.
//!
//! Residuals are row vectors and updates are `x ← x − f(x)·J(x)⁻¹` with
//! `J` in row layout (`J_ji = ∂f_i/∂x_j`), which is the transpose of the
//! usual Jacobian. Matrix norms are Frobenius norms, which bound the
//! spectral norm from above.

mod kantorovich;
mod poly;
mod stability;
mod ybd;

pub use kantorovich::{
    certified_solve, kantorovich_certify, newton_solve, newton_step, KantorovichCertificate,
    NewtonRun,
};
pub use poly::{PolySystem, RealPoly};
pub use stability::{
    complete_system, min_singular_value_normalized, perturbed_zero, CompletedSystem, PerturbedZero,
};
pub use ybd::{
    find_smooth_point_ybd, is_on_ybd, rationalize_point, ybd_system, YbdSolution, YbdSolveOptions,
};

use thiserror::Error;

use crate::geometry::GeometryError;

/// Inflation applied to `α`, `β` and `γ` to absorb floating-point error.
pub const SAFETY_FACTOR: f64 = 1.0 + 1e-6;

/// Minimum singular value, after normalizing rows, below which gradients
/// count as linearly dependent.
pub const INDEPENDENCE_THRESHOLD: f64 = 1e-8;

/// Largest denominator tried when rounding a float root to rationals.
pub const MAX_DENOMINATOR: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NewtonError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite value in input")]
    NonFinite,
    #[error("ball radius must be positive and finite, got {0}")]
    InvalidRadius(f64),
    #[error("system must be square, got {equations} equations in {vars} unknowns")]
    NotSquare { equations: usize, vars: usize },
    #[error("Jacobian is singular at the starting point")]
    SingularJacobian,
    #[error("certificate was not accepted: {0}")]
    NotAccepted(String),
    #[error("iterate {iteration} left the certified ball: distance {distance} > radius {radius}")]
    EscapedBall {
        iteration: usize,
        distance: f64,
        radius: f64,
    },
    #[error("no convergence after {max_iter} iterations (residual {residual})")]
    MaxIterations { max_iter: usize, residual: f64 },
    #[error("gradients are linearly dependent (normalized min singular value {0})")]
    DependentGradients(f64),
    #[error("certification rejected: {0}")]
    Rejected(String),
    #[error("solution is not a smooth point (normalized min singular value {0})")]
    RankDeficient(f64),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Closed ball `‖x − x₀‖ ≤ r₀` used as the certification domain.
#[derive(Clone, Debug, PartialEq)]
pub struct BallSpec {
    center: Vec<f64>,
    radius: f64,
}

impl BallSpec {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self, NewtonError> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(NewtonError::InvalidRadius(radius));
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(NewtonError::NonFinite);
        }
        Ok(Self { center, radius })
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
