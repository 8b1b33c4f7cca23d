use nalgebra::{DMatrix, RowDVector};

use super::{distance, BallSpec, NewtonError, PolySystem, SAFETY_FACTOR};

/// Constants of the Newton–Kantorovich test on a ball, and the outcome of
/// the certified solve when one was run.
#[derive(Clone, Debug, PartialEq)]
pub struct KantorovichCertificate {
    /// Bound on `‖f(x₀)·J(x₀)⁻¹‖`.
    pub alpha: f64,
    /// Bound on `‖J(x)⁻¹‖` over the ball; infinite when the perturbation
    /// bound is invalid.
    pub beta: f64,
    /// Lipschitz bound for `J` over the ball.
    pub gamma: f64,
    pub h: f64,
    pub r: f64,
    /// The ball radius `r₀`.
    pub radius: f64,
    pub accepted: bool,
    pub rejection: Option<String>,
    pub root: Option<Vec<f64>>,
    pub residual_norm: Option<f64>,
    pub iterations: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NewtonRun {
    pub root: Vec<f64>,
    pub iterations: usize,
    /// `‖f(x_k)‖` for `k = 0, 1, …`.
    pub residual_norms: Vec<f64>,
}

fn row_layout_inverse(system: &PolySystem, x: &[f64]) -> Result<DMatrix<f64>, NewtonError> {
    let j = system.jacobian(x);
    let inv = j
        .transpose()
        .try_inverse()
        .ok_or(NewtonError::SingularJacobian)?;
    if inv.iter().any(|v| !v.is_finite()) {
        return Err(NewtonError::SingularJacobian);
    }
    Ok(inv)
}

/// `f(x)·J(x)⁻¹` with `J` in row layout.
fn row_step(system: &PolySystem, x: &[f64]) -> Result<RowDVector<f64>, NewtonError> {
    let inv = row_layout_inverse(system, x)?;
    Ok(system.eval(x).transpose() * inv)
}

/// One Newton update `x − f(x)·J(x)⁻¹`.
pub fn newton_step(system: &PolySystem, x: &[f64]) -> Result<Vec<f64>, NewtonError> {
    let step = row_step(system, x)?;
    Ok(x.iter().zip(step.iter()).map(|(a, s)| a - s).collect())
}

fn check_square(system: &PolySystem, dim: usize) -> Result<(), NewtonError> {
    if !system.is_square() {
        return Err(NewtonError::NotSquare {
            equations: system.num_equations(),
            vars: system.num_vars(),
        });
    }
    if system.num_vars() != dim {
        return Err(NewtonError::DimensionMismatch {
            expected: system.num_vars(),
            found: dim,
        });
    }
    Ok(())
}

/// Lipschitz bound for the Jacobian over the ball. For equation `i` the
/// second partials `∂²f_i/∂x_j∂x_k` are majorized at `|x₀| + r₀` into a
/// nonnegative matrix `M_i`; then `‖J(x) − J(y)‖_F ≤ (Σ_i ‖M_i‖₂²)^{1/2}·‖x − y‖`.
fn lipschitz_bound(system: &PolySystem, ball: &BallSpec) -> f64 {
    let n = system.num_vars();
    let bounds: Vec<f64> = ball.center().iter().map(|c| c.abs() + ball.radius()).collect();
    let mut sum = 0.0;
    for row in system.jacobian_polys() {
        let m = DMatrix::from_fn(n, n, |j, k| row[j].partial(k).majorant(&bounds));
        let spectral = m.singular_values().iter().copied().fold(0.0, f64::max);
        sum += spectral * spectral;
    }
    sum.sqrt()
}

/// Computes `α, β, γ, h, r` on the ball and decides acceptance.
pub fn kantorovich_certify(
    system: &PolySystem,
    ball: &BallSpec,
) -> Result<KantorovichCertificate, NewtonError> {
    check_square(system, ball.center().len())?;
    let x0 = ball.center();
    let r0 = ball.radius();
    let inv = row_layout_inverse(system, x0)?;
    let step = system.eval(x0).transpose() * &inv;
    if step.iter().any(|v| !v.is_finite()) {
        return Err(NewtonError::NonFinite);
    }
    // Rounding of the iterates themselves is of order ε·‖x‖.
    let x_norm = x0.iter().map(|v| v * v).sum::<f64>().sqrt();
    let alpha = (step.norm() + 4.0 * f64::EPSILON * (1.0 + x_norm)) * SAFETY_FACTOR;
    let gamma = lipschitz_bound(system, ball) * SAFETY_FACTOR;
    let beta0 = inv.norm();
    let denominator = 1.0 - beta0 * gamma * r0;
    let beta_valid = denominator > 0.0 && beta0.is_finite();
    let beta = if beta_valid {
        beta0 / denominator * SAFETY_FACTOR
    } else {
        f64::INFINITY
    };
    let (h, r) = if beta_valid {
        let h = alpha * beta * gamma / 2.0;
        (h, if h < 1.0 { alpha / (1.0 - h) } else { f64::INFINITY })
    } else {
        (f64::INFINITY, f64::INFINITY)
    };
    let rejection = if !beta_valid {
        Some(format!(
            "inverse bound invalid: beta0*gamma*r0 = {} >= 1",
            beta0 * gamma * r0
        ))
    } else if h >= 1.0 {
        Some(format!("h = {h} >= 1"))
    } else if r > r0 {
        Some(format!("r = {r} exceeds the ball radius {r0}"))
    } else {
        None
    };
    Ok(KantorovichCertificate {
        alpha,
        beta,
        gamma,
        h,
        r,
        radius: r0,
        accepted: rejection.is_none(),
        rejection,
        root: None,
        residual_norm: None,
        iterations: None,
    })
}

/// Newton iteration from `x₀` under an accepted certificate. Every iterate
/// is checked to stay within distance `r` of `x₀`.
pub fn newton_solve(
    system: &PolySystem,
    x0: &[f64],
    certificate: &KantorovichCertificate,
    tol: f64,
    max_iter: usize,
) -> Result<NewtonRun, NewtonError> {
    if !certificate.accepted {
        return Err(NewtonError::NotAccepted(
            certificate.rejection.clone().unwrap_or_default(),
        ));
    }
    check_square(system, x0.len())?;
    let mut x = x0.to_vec();
    let mut residual_norms = vec![system.eval(&x).norm()];
    let mut iterations = 0;
    while residual_norms.last().copied().unwrap_or(0.0) > tol {
        if iterations >= max_iter {
            return Err(NewtonError::MaxIterations {
                max_iter,
                residual: *residual_norms.last().expect("nonempty"),
            });
        }
        x = newton_step(system, &x)?;
        iterations += 1;
        let d = distance(&x, x0);
        if !(d <= certificate.r) {
            return Err(NewtonError::EscapedBall {
                iteration: iterations,
                distance: d,
                radius: certificate.r,
            });
        }
        residual_norms.push(system.eval(&x).norm());
    }
    Ok(NewtonRun {
        root: x,
        iterations,
        residual_norms,
    })
}

/// Certifies on the ball and, if accepted, solves to `tol`. A solve that
/// stalls above `tol` turns the certificate into a rejection; leaving the
/// ball is reported as an error.
pub fn certified_solve(
    system: &PolySystem,
    ball: &BallSpec,
    tol: f64,
    max_iter: usize,
) -> Result<KantorovichCertificate, NewtonError> {
    let mut cert = kantorovich_certify(system, ball)?;
    if !cert.accepted {
        return Ok(cert);
    }
    match newton_solve(system, ball.center(), &cert, tol, max_iter) {
        Ok(run) => {
            cert.residual_norm = run.residual_norms.last().copied();
            cert.iterations = Some(run.iterations);
            cert.root = Some(run.root);
        }
        Err(NewtonError::MaxIterations { residual, .. }) => {
            cert.accepted = false;
            cert.residual_norm = Some(residual);
            cert.rejection = Some(format!("residual {residual} above tolerance {tol}"));
        }
        Err(e) => return Err(e),
    }
    Ok(cert)
}
