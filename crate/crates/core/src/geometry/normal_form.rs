use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::{ensure_cubic, smooth_gradient, GeometryError, InertiaSignature};
use crate::forms::matrix::rank;
use crate::forms::{dot, primitive_integer_vector, HomogeneousForm, LinearChange, ProjectivePoint, Rational};

/// `F∘change = y0²·y_{n+1} + y0·q(y1,…,y_{n+1}) + c(y1,…,y_{n+1})`.
///
/// `change` sends `(1:0:…:0)` to `P` and the hyperplane `y_{n+1} = 0` onto
/// `T_P X`. `q` and `c` are forms in the `n+1` variables `y1,…,y_{n+1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalNormalForm {
    pub change: LinearChange,
    pub q: HomogeneousForm,
    pub c: HomogeneousForm,
}

impl LocalNormalForm {
    /// Rebuilds `y0²y_{n+1} + y0·q + c` in `n+2` variables.
    pub fn reassemble(&self) -> HomogeneousForm {
        let n2 = self.q.num_vars() + 1;
        let mut terms: Vec<(Vec<u32>, Rational)> = Vec::new();
        let mut lead = vec![0; n2];
        lead[0] = 2;
        lead[n2 - 1] = 1;
        terms.push((lead, Rational::one()));
        for (e, coeff) in self.q.terms() {
            let mut full = vec![1];
            full.extend(e);
            terms.push((full, coeff.clone()));
        }
        for (e, coeff) in self.c.terms() {
            let mut full = vec![0];
            full.extend(e);
            terms.push((full, coeff.clone()));
        }
        HomogeneousForm::new(n2, 3, terms).expect("normal form monomials are cubic")
    }

    /// `q(y1,…,y_n,0)`, the second fundamental form up to scale.
    pub fn second_fundamental_form(&self) -> HomogeneousForm {
        self.q.drop_variable(self.q.num_vars() - 1)
    }
}

/// Real local shape of `X ∩ T_P X` near a point with nondegenerate second
/// fundamental form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LocalType {
    /// Definite form: `P` is isolated in the real tangent section.
    Isolated,
    /// Indefinite form: the real tangent section contains a real manifold
    /// of dimension `n − 1` through every neighbourhood of `P`.
    HypersurfaceRich,
}

impl LocalType {
    pub fn from_inertia(inertia: &InertiaSignature) -> Result<Self, GeometryError> {
        if !inertia.is_full_rank() {
            return Err(GeometryError::NotFullRank {
                n_zero: inertia.n_zero,
            });
        }
        Ok(if inertia.is_definite() {
            LocalType::Isolated
        } else {
            LocalType::HypersurfaceRich
        })
    }
}

impl fmt::Display for LocalType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LocalType::Isolated => "isolated",
            LocalType::HypersurfaceRich => "hypersurface-rich",
        })
    }
}

/// Integer basis vectors `g_k e_j − g_j e_k` (`j ≠ k`) of the hyperplane
/// `g·x = 0`, where `k` is the index of the smallest nonzero `|g_k|`.
/// Returns the pivot `k` and the vectors.
fn hyperplane_vectors(grad: &[Rational]) -> (usize, Vec<Vec<BigInt>>) {
    let g = primitive_integer_vector(grad).expect("nonzero gradient");
    let k = (0..g.len())
        .filter(|&i| !g[i].is_zero())
        .min_by_key(|&i| (num_traits::Signed::abs(&g[i]), i))
        .unwrap();
    let vectors = (0..g.len())
        .filter(|&j| j != k)
        .map(|j| {
            let mut v = vec![BigInt::zero(); g.len()];
            v[j] = g[k].clone();
            v[k] = -g[j].clone();
            v
        })
        .collect();
    (k, vectors)
}

/// Integer vectors spanning a complement of `P` inside `T_P X`, chosen
/// greedily from the coordinate-style basis of the hyperplane.
pub fn tangent_hyperplane_basis(
    f: &HomogeneousForm,
    p: &ProjectivePoint,
) -> Result<Vec<ProjectivePoint>, GeometryError> {
    let grad = smooth_gradient(f, p)?;
    let (_, vectors) = hyperplane_vectors(&grad);
    let mut rows = vec![p.to_rationals()];
    let mut chosen = Vec::new();
    for v in vectors {
        let as_rat: Vec<Rational> = v.iter().cloned().map(Rational::from_integer).collect();
        rows.push(as_rat);
        if rank(&rows) == rows.len() {
            chosen.push(ProjectivePoint::new(v)?);
        } else {
            rows.pop();
        }
    }
    Ok(chosen)
}

/// Local normal form at a smooth point, using the greedy integer frame.
pub fn local_normal_form(
    f: &HomogeneousForm,
    p: &ProjectivePoint,
) -> Result<LocalNormalForm, GeometryError> {
    ensure_cubic(f)?;
    let grad = smooth_gradient(f, p)?;
    let (k, _) = hyperplane_vectors(&grad);
    let tangent: Vec<Vec<Rational>> = tangent_hyperplane_basis(f, p)?
        .iter()
        .map(ProjectivePoint::to_rationals)
        .collect();
    let mut transversal = vec![Rational::zero(); f.num_vars()];
    transversal[k] = Rational::one();
    local_normal_form_with_frame(f, p, &tangent, &transversal)
}

/// Local normal form for an explicit frame: `tangent` must be `n` vectors of
/// `T_P X` that together with `P` are independent, and `transversal` any
/// vector off `T_P X` (it is rescaled so the `y0²y_{n+1}` coefficient is 1).
pub fn local_normal_form_with_frame(
    f: &HomogeneousForm,
    p: &ProjectivePoint,
    tangent: &[Vec<Rational>],
    transversal: &[Rational],
) -> Result<LocalNormalForm, GeometryError> {
    ensure_cubic(f)?;
    let grad = smooth_gradient(f, p)?;
    let n2 = f.num_vars();
    if tangent.len() + 2 != n2 {
        return Err(GeometryError::Incidence(format!(
            "expected {} tangent frame vectors, got {}",
            n2 - 2,
            tangent.len()
        )));
    }
    if tangent.iter().any(|v| !dot(&grad, v).is_zero()) {
        return Err(GeometryError::Incidence(
            "frame vector outside the tangent plane".into(),
        ));
    }
    let lambda = dot(&grad, transversal);
    if lambda.is_zero() {
        return Err(GeometryError::Incidence(
            "transversal vector lies in the tangent plane".into(),
        ));
    }
    let mut columns = vec![p.to_rationals()];
    columns.extend(tangent.iter().cloned());
    columns.push(transversal.iter().map(|x| x / &lambda).collect());
    let change = LinearChange::from_columns(&columns)?;
    let g = f.apply_linear_change(&change)?;

    let mut q_terms = Vec::new();
    let mut c_terms = Vec::new();
    for (e, coeff) in g.terms() {
        match e[0] {
            0 => c_terms.push((e[1..].to_vec(), coeff.clone())),
            1 => q_terms.push((e[1..].to_vec(), coeff.clone())),
            2 => {
                // Only y0² y_{n+1} survives, with coefficient 1.
                assert!(
                    e[n2 - 1] == 1 && coeff.is_one(),
                    "normal form: unexpected y0² term {e:?}"
                );
            }
            _ => panic!("normal form: P is not on X"),
        }
    }
    Ok(LocalNormalForm {
        change,
        q: HomogeneousForm::new(n2 - 1, 2, q_terms)?,
        c: HomogeneousForm::new(n2 - 1, 3, c_terms)?,
    })
}

/// `q(y1,…,y_n,0)` and its exact inertia.
pub fn second_fundamental_form(
    f: &HomogeneousForm,
    p: &ProjectivePoint,
) -> Result<(HomogeneousForm, InertiaSignature), GeometryError> {
    let nf = local_normal_form(f, p)?;
    let sff = nf.second_fundamental_form();
    let inertia = InertiaSignature::of_quadratic_form(&sff)?;
    Ok((sff, inertia))
}

/// `P` is Eckardt iff the tangent section is a cone with vertex `P`. In the
/// normal form the section is `V(y0·q′ + c′)`, which is a cone with vertex
/// `(1:0:…:0)` exactly when `q′ = q(y1,…,y_n,0)` vanishes identically.
pub fn is_eckardt(f: &HomogeneousForm, p: &ProjectivePoint) -> Result<bool, GeometryError> {
    Ok(second_fundamental_form(f, p)?.0.is_zero())
}

pub fn tangent_section_local_type(
    f: &HomogeneousForm,
    p: &ProjectivePoint,
) -> Result<LocalType, GeometryError> {
    let (_, inertia) = second_fundamental_form(f, p)?;
    LocalType::from_inertia(&inertia)
}
