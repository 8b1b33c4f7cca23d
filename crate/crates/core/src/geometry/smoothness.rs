use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::{ensure_cubic, GeometryError};
use crate::forms::matrix::{rank, row_times};
use crate::forms::{dot, HomogeneousForm, ProjectivePoint, Rational};

/// Outcome of the three-condition smoothness test for `C` on `Y_{B,D}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct YbdSmoothnessReport {
    /// (i) `T_C X ≠ T_B X`.
    pub tangent_planes_distinct: bool,
    /// (ii) `H_F(C)` is invertible.
    pub hessian_full_rank: bool,
    /// (iii) `D` is off the line `{(λ∇F(B) + μ∇F(C))·H_F(C)⁻¹}`; false
    /// whenever (ii) fails, since the line is then undefined.
    pub off_critical_line: bool,
    pub certified_smooth: bool,
    /// Rank of `[∇F(C); D·H_F(C); ∇F(B)]`, the Jacobian of the `Y_{B,D}`
    /// equations at `C`.
    pub jacobian_rank: usize,
}

/// Rank of the Jacobian of `F`, `∇F(x)·D`, `∇F(B)·x` at `C`, whose rows are
/// `∇F(C)`, `D·H_F(C)` and `∇F(B)`.
pub fn ybd_jacobian_rank(
    f: &HomogeneousForm,
    b: &ProjectivePoint,
    c: &ProjectivePoint,
    d: &ProjectivePoint,
) -> Result<usize, GeometryError> {
    let hessian = f.hessian_at(c)?;
    let rows = [
        f.gradient_at(c)?,
        row_times(&d.to_rationals(), hessian.entries()),
        f.gradient_at(b)?,
    ];
    Ok(rank(&rows))
}

fn check_incidence(
    f: &HomogeneousForm,
    b: &ProjectivePoint,
    c: &ProjectivePoint,
    d: &ProjectivePoint,
) -> Result<(), GeometryError> {
    for p in [b, c, d] {
        if !f.evaluate_at(p)?.is_zero() {
            return Err(GeometryError::NotOnHypersurface(p.clone()));
        }
    }
    if !dot(&f.gradient_at(b)?, &c.to_rationals()).is_zero() {
        return Err(GeometryError::Incidence(format!(
            "C = {c} is not in the tangent plane at B = {b}"
        )));
    }
    if !dot(&f.gradient_at(c)?, &d.to_rationals()).is_zero() {
        return Err(GeometryError::Incidence(format!(
            "D = {d} is not in the tangent plane at C = {c}"
        )));
    }
    Ok(())
}

/// Evaluates the three sufficient conditions for `C` to be a smooth point of
/// `Y_{B,D} : F = 0, ∇F(x)·D = 0, ∇F(B)·x = 0`.
pub fn ybd_smoothness_certificate(
    f: &HomogeneousForm,
    b: &ProjectivePoint,
    c: &ProjectivePoint,
    d: &ProjectivePoint,
) -> Result<YbdSmoothnessReport, GeometryError> {
    ensure_cubic(f)?;
    check_incidence(f, b, c, d)?;
    let grad_b = f.gradient_at(b)?;
    let grad_c = f.gradient_at(c)?;
    let tangent_planes_distinct = !grad_b.iter().all(Zero::is_zero)
        && !grad_c.iter().all(Zero::is_zero)
        && rank(&[grad_b.clone(), grad_c.clone()]) == 2;

    let hessian = f.hessian_at(c)?;
    let inverse = hessian.inverse();
    let hessian_full_rank = inverse.is_some();
    let off_critical_line = match &inverse {
        Some(inv) => {
            let u: Vec<Rational> = row_times(&grad_b, inv);
            let v: Vec<Rational> = row_times(&grad_c, inv);
            rank(&[u, v, d.to_rationals()]) == 3
        }
        None => false,
    };
    let jacobian_rank = ybd_jacobian_rank(f, b, c, d)?;
    let certified_smooth = tangent_planes_distinct && hessian_full_rank && off_critical_line;
    debug_assert!(!certified_smooth || jacobian_rank == 3);
    Ok(YbdSmoothnessReport {
        tangent_planes_distinct,
        hessian_full_rank,
        off_critical_line,
        certified_smooth,
        jacobian_rank,
    })
}
