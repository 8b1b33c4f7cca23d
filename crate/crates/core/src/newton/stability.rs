use nalgebra::DMatrix;

use super::{
    certified_solve, distance, BallSpec, KantorovichCertificate, NewtonError, PolySystem, RealPoly,
    INDEPENDENCE_THRESHOLD,
};

/// Smallest singular value of `m` after scaling each row to unit length;
/// zero when a row vanishes or there are more rows than columns.
pub fn min_singular_value_normalized(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    if m.nrows() > m.ncols() {
        return 0.0;
    }
    let mut normalized = m.clone();
    for mut row in normalized.row_iter_mut() {
        let norm = row.norm();
        if norm == 0.0 || !norm.is_finite() {
            return 0.0;
        }
        row /= norm;
    }
    normalized
        .singular_values()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// `g` made square by the affine equations `v_i·(x − ζ) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct CompletedSystem {
    pub original: PolySystem,
    pub completions: Vec<RealPoly>,
    /// Orthonormal basis of the complement of the gradient span at `ζ`.
    pub basis_vectors: Vec<Vec<f64>>,
    pub zeta: Vec<f64>,
}

impl CompletedSystem {
    pub fn full_system(&self) -> PolySystem {
        self.original
            .extended(&self.completions)
            .expect("completions share the variables")
    }

    /// The completed system with `f` in place of the original equations.
    pub fn with_equations(&self, f: &PolySystem) -> Result<PolySystem, NewtonError> {
        if f.num_equations() != self.original.num_equations() {
            return Err(NewtonError::DimensionMismatch {
                expected: self.original.num_equations(),
                found: f.num_equations(),
            });
        }
        f.extended(&self.completions)
    }
}

/// Orthonormal complement of the row space of `rows` by Gram–Schmidt,
/// always taking the coordinate vector with the largest remaining part.
fn orthonormal_complement(rows: &DMatrix<f64>) -> Vec<Vec<f64>> {
    let n = rows.ncols();
    let mut basis: Vec<nalgebra::DVector<f64>> = Vec::new();
    let orthogonalize = |v: &mut nalgebra::DVector<f64>, basis: &[nalgebra::DVector<f64>]| {
        for _ in 0..2 {
            for b in basis {
                let c = b.dot(v);
                *v -= b * c;
            }
        }
    };
    for row in rows.row_iter() {
        let mut v = row.transpose();
        orthogonalize(&mut v, &basis);
        let norm = v.norm();
        if norm > 0.0 {
            basis.push(v / norm);
        }
    }
    let start = basis.len();
    while basis.len() < n {
        let best = (0..n)
            .map(|k| {
                let mut e = nalgebra::DVector::zeros(n);
                e[k] = 1.0;
                orthogonalize(&mut e, &basis);
                e
            })
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .expect("n > 0");
        let norm = best.norm();
        basis.push(best / norm);
    }
    basis[start..]
        .iter()
        .map(|v| v.iter().copied().collect())
        .collect()
}

/// Adds `n − m` affine equations through `ζ` orthogonal to the gradients of
/// `g` at `ζ`.
pub fn complete_system(g: &PolySystem, zeta: &[f64]) -> Result<CompletedSystem, NewtonError> {
    if zeta.len() != g.num_vars() {
        return Err(NewtonError::DimensionMismatch {
            expected: g.num_vars(),
            found: zeta.len(),
        });
    }
    if zeta.iter().any(|v| !v.is_finite()) {
        return Err(NewtonError::NonFinite);
    }
    if g.num_equations() > g.num_vars() {
        return Err(NewtonError::NotSquare {
            equations: g.num_equations(),
            vars: g.num_vars(),
        });
    }
    let jac = g.jacobian(zeta);
    let sigma = min_singular_value_normalized(&jac);
    if !(sigma >= INDEPENDENCE_THRESHOLD) {
        return Err(NewtonError::DependentGradients(sigma));
    }
    let basis_vectors = orthonormal_complement(&jac);
    let completions = basis_vectors
        .iter()
        .map(|v| {
            let offset: f64 = v.iter().zip(zeta).map(|(a, b)| a * b).sum();
            RealPoly::affine(v, -offset)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CompletedSystem {
        original: g.clone(),
        completions,
        basis_vectors,
        zeta: zeta.to_vec(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PerturbedZero {
    pub xi: Vec<f64>,
    pub certificate: KantorovichCertificate,
    /// `‖f(ξ)‖` over the perturbed equations only.
    pub residual: f64,
    /// Normalized minimum singular value of `∇f_i(ξ)`.
    pub min_singular_value: f64,
    pub distance: f64,
}

const RADIUS_HALVINGS: i32 = 30;
const MAX_NEWTON_STEPS: usize = 60;

/// A zero of the perturbed equations `f` near the nondegenerate zero `ζ` of
/// `g`, certified on a ball of radius at most `ε` around `ζ`.
///
/// The completion of `g` at `ζ` is applied to `f`; radii `ε, ε/2, …` are
/// tried until a certificate is accepted.
pub fn perturbed_zero(
    g: &PolySystem,
    zeta: &[f64],
    f: &PolySystem,
    epsilon: f64,
    tol: f64,
) -> Result<PerturbedZero, NewtonError> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(NewtonError::InvalidRadius(epsilon));
    }
    let completed = complete_system(g, zeta)?;
    let full = completed.with_equations(f)?;
    let mut last_reason = String::new();
    for k in 0..=RADIUS_HALVINGS {
        let ball = BallSpec::new(zeta.to_vec(), epsilon * 0.5f64.powi(k))?;
        let cert = certified_solve(&full, &ball, tol, MAX_NEWTON_STEPS)?;
        if !cert.accepted {
            last_reason = cert.rejection.clone().unwrap_or_default();
            continue;
        }
        let xi = cert.root.clone().expect("accepted certificates carry a root");
        let dist = distance(&xi, zeta);
        if !(dist < epsilon) {
            return Err(NewtonError::Rejected(format!(
                "root at distance {dist} is not within {epsilon}"
            )));
        }
        let sigma = min_singular_value_normalized(&f.jacobian(&xi));
        if !(sigma >= INDEPENDENCE_THRESHOLD) {
            return Err(NewtonError::DependentGradients(sigma));
        }
        return Ok(PerturbedZero {
            residual: f.eval(&xi).norm(),
            xi,
            certificate: cert,
            min_singular_value: sigma,
            distance: dist,
        });
    }
    Err(NewtonError::Rejected(last_reason))
}
