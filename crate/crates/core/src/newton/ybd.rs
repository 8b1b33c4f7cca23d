use nalgebra::DVector;
use num_traits::{ToPrimitive, Zero};

use super::{
    certified_solve, complete_system, min_singular_value_normalized, BallSpec,
    KantorovichCertificate, NewtonError, PolySystem, RealPoly, INDEPENDENCE_THRESHOLD,
};
use crate::forms::univariate::rationalize_f64;
use crate::forms::{HomogeneousForm, ProjectivePoint, Rational};
use crate::geometry::{ensure_cubic, GeometryError};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct YbdSolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Largest certification radius tried; it is halved on rejection.
    pub radius: f64,
    /// Uncertified minimum-norm Newton steps used to move the seed onto
    /// the variety before certification.
    pub refine_steps: usize,
}

impl Default for YbdSolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 60,
            radius: 0.1,
            refine_steps: 30,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct YbdSolution {
    /// Homogeneous coordinates with `x₀ = 1`.
    pub point: Vec<f64>,
    pub residuals: [f64; 3],
    pub min_singular_value: f64,
    pub jacobian_rank: usize,
    pub certificate: KantorovichCertificate,
}

/// `F = 0`, `∇F(x)·D = 0`, `∇F(B)·x = 0` dehomogenized at `x₀ = 1`, in the
/// unknowns `x₁, …, x_{n+1}`.
pub fn ybd_system(
    f: &HomogeneousForm,
    b: &ProjectivePoint,
    d: &[f64],
) -> Result<PolySystem, NewtonError> {
    ensure_cubic(f)?;
    let n = f.num_vars();
    if b.dim() != n {
        return Err(NewtonError::DimensionMismatch {
            expected: n,
            found: b.dim(),
        });
    }
    if d.len() != n {
        return Err(NewtonError::DimensionMismatch {
            expected: n,
            found: d.len(),
        });
    }
    if d.iter().any(|v| !v.is_finite()) {
        return Err(NewtonError::NonFinite);
    }
    let g1 = RealPoly::dehomogenize(f, 0);
    let mut g2 = RealPoly::zero(n - 1);
    for (j, partial) in f.gradient().iter().enumerate() {
        if d[j] != 0.0 {
            g2 = g2.add(&RealPoly::dehomogenize(partial, 0).scale(d[j]))?;
        }
    }
    let grad_b: Vec<f64> = f
        .gradient_at(b)
        .map_err(GeometryError::from)?
        .iter()
        .map(|c| c.to_f64().unwrap_or(f64::NAN))
        .collect();
    let g3 = RealPoly::affine(&grad_b[1..], grad_b[0])?;
    PolySystem::new(vec![g1, g2, g3])
}

fn patch_coordinates(seed: &[f64], n: usize) -> Result<Vec<f64>, NewtonError> {
    if seed.iter().any(|v| !v.is_finite()) {
        return Err(NewtonError::NonFinite);
    }
    if seed.len() == n - 1 {
        Ok(seed.to_vec())
    } else if seed.len() == n && seed[0] != 0.0 {
        Ok(seed[1..].iter().map(|v| v / seed[0]).collect())
    } else {
        Err(NewtonError::DimensionMismatch {
            expected: n - 1,
            found: seed.len(),
        })
    }
}

/// Minimum-norm Newton steps `x ← x − J⁺ g(x)` for the underdetermined
/// system.
fn refine(system: &PolySystem, mut x: Vec<f64>, options: &YbdSolveOptions) -> Vec<f64> {
    for _ in 0..options.refine_steps {
        let g = system.eval(&x);
        if g.norm() <= options.tol {
            break;
        }
        let Ok(pinv) = system.jacobian(&x).pseudo_inverse(1e-14) else {
            break;
        };
        let step: DVector<f64> = pinv * g;
        if !step.iter().all(|v| v.is_finite()) {
            break;
        }
        x.iter_mut().zip(step.iter()).for_each(|(a, s)| *a -= s);
        if step.norm() <= f64::EPSILON * (1.0 + DVector::from_column_slice(&x).norm()) {
            break;
        }
    }
    x
}

/// A certified smooth real point `C` of `Y_{B,D}` in the patch `x₀ = 1`
/// near `seed` (given either as patch coordinates or homogeneous ones).
pub fn find_smooth_point_ybd(
    f: &HomogeneousForm,
    b: &ProjectivePoint,
    d: &[f64],
    seed: &[f64],
    options: &YbdSolveOptions,
) -> Result<YbdSolution, NewtonError> {
    let system = ybd_system(f, b, d)?;
    let n = f.num_vars();
    let start = refine(&system, patch_coordinates(seed, n)?, options);
    let completed = complete_system(&system, &start)?;
    let full = completed.full_system();
    let mut last_reason = String::new();
    let mut radius = options.radius;
    for _ in 0..=30 {
        let ball = BallSpec::new(start.clone(), radius)?;
        let cert = certified_solve(&full, &ball, options.tol, options.max_iter)?;
        radius /= 2.0;
        if !cert.accepted {
            last_reason = cert.rejection.clone().unwrap_or_default();
            continue;
        }
        let root = cert.root.clone().expect("accepted certificates carry a root");
        let g = system.eval(&root);
        let sigma = min_singular_value_normalized(&system.jacobian(&root));
        if !(sigma >= INDEPENDENCE_THRESHOLD) {
            return Err(NewtonError::RankDeficient(sigma));
        }
        let mut point = vec![1.0];
        point.extend_from_slice(&root);
        return Ok(YbdSolution {
            point,
            residuals: [g[0], g[1], g[2]],
            min_singular_value: sigma,
            jacobian_rank: 3,
            certificate: cert,
        });
    }
    Err(NewtonError::Rejected(last_reason))
}

/// Rounds each coordinate to a rational with denominator at most
/// `max_den`.
pub fn rationalize_point(x: &[f64], max_den: u64) -> Option<ProjectivePoint> {
    let coords: Option<Vec<Rational>> = x.iter().map(|&v| rationalize_f64(v, max_den)).collect();
    ProjectivePoint::from_rationals(&coords?).ok()
}

/// Exact check that `C` satisfies the three `Y_{B,D}` equations.
pub fn is_on_ybd(
    f: &HomogeneousForm,
    b: &ProjectivePoint,
    c: &ProjectivePoint,
    d: &ProjectivePoint,
) -> Result<bool, GeometryError> {
    let dot = |u: &[Rational], v: &[Rational]| -> Rational {
        u.iter().zip(v).map(|(a, b)| a * b).fold(Rational::zero(), |acc, x| acc + x)
    };
    Ok(f.evaluate_at(c)?.is_zero()
        && dot(&f.gradient_at(c)?, &d.to_rationals()).is_zero()
        && dot(&f.gradient_at(b)?, &c.to_rationals()).is_zero())
}
