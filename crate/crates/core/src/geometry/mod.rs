//! Geometry of a cubic hypersurface `X : F = 0` in projective space:
//! tangent planes, line sections, the local normal form and second
//! fundamental form, Eckardt points, Hessian rank and the smoothness
//! criterion for the auxiliary varieties `Y_{B,D}`.

mod divisor;
mod inertia;
mod line;
mod normal_form;
mod smoothness;

pub use divisor::{line_cubic_divisor, restricted_cubic_coefficients, split_binary_form, LineDivisor};
pub use inertia::InertiaSignature;
pub use line::ProjectiveLine;
pub use normal_form::{
    is_eckardt, local_normal_form, local_normal_form_with_frame, second_fundamental_form,
    tangent_hyperplane_basis, tangent_section_local_type, LocalNormalForm, LocalType,
};
pub use smoothness::{ybd_jacobian_rank, ybd_smoothness_certificate, YbdSmoothnessReport};

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use crate::forms::{
    primitive_integer_vector, FormError, HomogeneousForm, ProjectivePoint, Rational,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error(transparent)]
    Form(#[from] FormError),
    #[error("point {0} is not on the hypersurface")]
    NotOnHypersurface(ProjectivePoint),
    #[error("point {0} is a singular point of the hypersurface")]
    SingularPoint(ProjectivePoint),
    #[error("line is contained in the hypersurface")]
    LineContained,
    #[error("points coincide; use the tangent construction")]
    IdenticalPoints,
    #[error("direction {direction} does not lie in the tangent plane at {point}")]
    NotTangent {
        point: ProjectivePoint,
        direction: ProjectivePoint,
    },
    #[error("second fundamental form is degenerate ({n_zero} null directions)")]
    NotFullRank { n_zero: usize },
    #[error("incidence condition violated: {0}")]
    Incidence(String),
}

pub(crate) fn ensure_cubic(f: &HomogeneousForm) -> Result<(), GeometryError> {
    if f.degree() != 3 {
        return Err(FormError::WrongDegree {
            expected: 3,
            found: f.degree(),
        }
        .into());
    }
    Ok(())
}

pub fn is_on_hypersurface(f: &HomogeneousForm, p: &ProjectivePoint) -> Result<bool, GeometryError> {
    Ok(f.evaluate_at(p)?.is_zero())
}

/// Gradient at `p`, after checking that `p` is a smooth point of `X`.
pub fn smooth_gradient(
    f: &HomogeneousForm,
    p: &ProjectivePoint,
) -> Result<Vec<Rational>, GeometryError> {
    if !is_on_hypersurface(f, p)? {
        return Err(GeometryError::NotOnHypersurface(p.clone()));
    }
    let grad = f.gradient_at(p)?;
    if grad.iter().all(Zero::is_zero) {
        return Err(GeometryError::SingularPoint(p.clone()));
    }
    Ok(grad)
}

/// `T_P X : ∇F(P)·x = 0`, with primitive integer coefficients (sign kept).
pub fn tangent_plane(
    f: &HomogeneousForm,
    p: &ProjectivePoint,
) -> Result<HomogeneousForm, GeometryError> {
    let grad = smooth_gradient(f, p)?;
    let ints = primitive_integer_vector(&grad).expect("nonzero gradient");
    let coeffs: Vec<Rational> = ints.into_iter().map(Rational::from_integer).collect();
    Ok(HomogeneousForm::linear(&coeffs))
}

/// Exact rank of the Hessian matrix `H_F(P)`.
pub fn hessian_rank_at(f: &HomogeneousForm, p: &ProjectivePoint) -> Result<usize, GeometryError> {
    ensure_cubic(f)?;
    Ok(f.hessian_at(p)?.rank())
}

fn integer_scalars(a: &Rational, b: &Rational) -> (BigInt, BigInt) {
    let v = primitive_integer_vector(&[a.clone(), b.clone()]).expect("nonzero pair");
    (v[0].clone(), v[1].clone())
}

/// The residual point `R` of the secant through distinct points `P, Q` of
/// `X`, so that `ℓ·X = P + Q + R`.
///
/// On `ℓ = {sP + tQ}` the restricted cubic is `st(bs + ct)` with
/// `b = ∇F(P)·Q` and `c = ∇F(Q)·P`, so `R = cP − bQ`.
pub fn third_point(
    f: &HomogeneousForm,
    p: &ProjectivePoint,
    q: &ProjectivePoint,
) -> Result<ProjectivePoint, GeometryError> {
    ensure_cubic(f)?;
    if p == q {
        return Err(GeometryError::IdenticalPoints);
    }
    for point in [p, q] {
        if !is_on_hypersurface(f, point)? {
            return Err(GeometryError::NotOnHypersurface(point.clone()));
        }
    }
    let b = crate::forms::dot(&f.gradient_at(p)?, &q.to_rationals());
    let c = crate::forms::dot(&f.gradient_at(q)?, &p.to_rationals());
    if b.is_zero() && c.is_zero() {
        return Err(GeometryError::LineContained);
    }
    let (c, b) = integer_scalars(&c, &b);
    Ok(ProjectivePoint::combine(&c, p, &-b, q)?)
}

/// Section of `X` by the tangent line through `P` in the given direction
/// (any second point of the line). Returns `2P + R`, or `3P` when the
/// direction is an inflectional one.
///
/// On `ℓ = {sP + tD}` the restricted cubic is `t²(cs + dt)` with
/// `c = ∇F(D)·P` and `d = F(D)`, so `R = dP − cD`.
pub fn tangent_residual(
    f: &HomogeneousForm,
    p: &ProjectivePoint,
    direction: &ProjectivePoint,
) -> Result<LineDivisor, GeometryError> {
    ensure_cubic(f)?;
    let grad = smooth_gradient(f, p)?;
    if p == direction {
        return Err(GeometryError::IdenticalPoints);
    }
    if !crate::forms::dot(&grad, &direction.to_rationals()).is_zero() {
        return Err(GeometryError::NotTangent {
            point: p.clone(),
            direction: direction.clone(),
        });
    }
    let c = crate::forms::dot(&f.gradient_at(direction)?, &p.to_rationals());
    let d = f.evaluate_at(direction)?;
    if c.is_zero() && d.is_zero() {
        return Err(GeometryError::LineContained);
    }
    let (d, c) = integer_scalars(&d, &c);
    let r = ProjectivePoint::combine(&d, p, &-c, direction)?;
    Ok(if &r == p {
        LineDivisor::from_points(&[p.clone(), p.clone(), p.clone()])
    } else {
        LineDivisor::from_points(&[p.clone(), p.clone(), r])
    })
}
