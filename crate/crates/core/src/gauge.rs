//! Gauge content of a finite triple: the subalgebras `A_J` and `Ã_J`, the
//! gauge group at Lie-algebra level, one-forms, inner fluctuations and gauge
//! transformations.

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::finite_triple::{FiniteTriple, RealStructure};
use crate::linalg::{real_null_space, real_rank, span_residual, CMatrix, C64, I, ONE};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GaugeError {
    #[error("operation needs {0}")]
    Missing(&'static str),
    #[error("one-form is not self-adjoint (residual {0:e})")]
    NotSelfAdjoint(f64),
    #[error("element is not unitary (residual {0:e})")]
    NotUnitary(f64),
    #[error("element is not in the represented algebra (residual {0:e})")]
    NotInAlgebra(f64),
    #[error("covariance identity violated (residual {0:e})")]
    Covariance(f64),
    #[error("shape mismatch: expected {expected}x{expected}, got {rows}x{cols}")]
    Shape { expected: usize, rows: usize, cols: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SubalgebraKind {
    /// `{a : aJ = Ja}`
    #[serde(rename = "A_J")]
    Real,
    /// `{a : aJ = Ja*}`
    #[serde(rename = "A_J_tilde")]
    Tilde,
}

#[derive(Debug, Clone, Serialize)]
pub struct SubalgebraBasis {
    pub kind: SubalgebraKind,
    /// Real-linear basis inside the represented algebra.
    pub basis: Vec<CMatrix>,
    pub real_dim: usize,
    /// `Ã_J` is complex linear; `A_J` only real linear.
    pub complex_dim: Option<usize>,
}

fn real_span(rep: &[CMatrix]) -> Vec<CMatrix> {
    rep.iter().flat_map(|a| [a.clone(), a.scale(I)]).collect()
}

fn relation(j: &RealStructure, kind: SubalgebraKind) -> impl Fn(&CMatrix) -> CMatrix + '_ {
    let u = &j.unitary;
    // aJ = Ja  ⇔ aU = Uā;   aJ = Ja* ⇔ aU = Uaᵀ.
    move |a: &CMatrix| match kind {
        SubalgebraKind::Real => &(a * u) - &(u * &a.conj()),
        SubalgebraKind::Tilde => &(a * u) - &(u * &a.transpose()),
    }
}

pub fn subalgebra(t: &FiniteTriple, kind: SubalgebraKind) -> Result<SubalgebraBasis, GaugeError> {
    let j = t.real().ok_or(GaugeError::Missing("a real structure"))?;
    let rel = relation(j, kind);
    let ns = real_null_space(&real_span(t.rep_basis()), &[&rel], t.tol());
    let real_dim = ns.dim();
    Ok(SubalgebraBasis {
        kind,
        basis: ns.matrices,
        real_dim,
        complex_dim: (kind == SubalgebraKind::Tilde).then_some(real_dim / 2),
    })
}

/// Complex dimension of the center of the represented algebra.
pub fn center_dim(t: &FiniteTriple) -> usize {
    let rep = t.rep_basis();
    let n = t.hilbert_dim();
    let comm = |a: &CMatrix| {
        let mut stacked = CMatrix::zeros(n * rep.len(), n);
        for (k, b) in rep.iter().enumerate() {
            CMatrix::commutator(a, b).write_block(&mut stacked, k * n, 0);
        }
        stacked
    };
    real_null_space(&real_span(rep), &[&comm], t.tol()).dim() / 2
}

/// Real basis of `u(A)`, the anti-Hermitian elements, represented on `H`.
pub fn unitary_lie_algebra(t: &FiniteTriple) -> Vec<CMatrix> {
    let rep = t.rep_basis();
    let mut out = Vec::new();
    for (k, &n) in t.algebra_summands().iter().enumerate() {
        let e = |r: usize, c: usize| &rep[t.basis_index(k, r, c)];
        for r in 0..n {
            out.push(e(r, r).scale(I));
            for c in (r + 1)..n {
                out.push(e(r, c) - e(c, r));
                out.push((e(r, c) + e(c, r)).scale(I));
            }
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct GaugeGroupInfo {
    /// Real dimension of `u(A)`.
    pub dim_u_a: usize,
    /// Real dimension of `u(Ã_J)`.
    pub dim_u_tilde: usize,
    /// Rank of the differential of `u ↦ uJuJ*` at the identity.
    pub dim_gauge: usize,
    /// Present for commutative algebras, where the gauge group is a torus.
    pub torus_rank: Option<usize>,
    pub commutative: bool,
    /// Complex dimension of the center, for diagnostics only.
    pub center_dim: usize,
}

impl GaugeGroupInfo {
    pub fn exact(&self) -> bool {
        self.dim_gauge + self.dim_u_tilde == self.dim_u_a
    }
}

/// Dimensions of `U(Ã_J) → U(A) → G(A)`. The quotient dimension is computed
/// independently as a rank, so exactness is a check, not an identity.
pub fn gauge_group(t: &FiniteTriple) -> Result<GaugeGroupInfo, GaugeError> {
    let j = t.real().ok_or(GaugeError::Missing("a real structure"))?;
    let dim_u_a: usize = t.algebra_summands().iter().map(|n| n * n).sum();
    let rel = relation(j, SubalgebraKind::Tilde);
    let anti = |a: &CMatrix| a + &a.adjoint();
    let dim_u_tilde = real_null_space(&real_span(t.rep_basis()), &[&rel, &anti], t.tol()).dim();
    let images: Vec<Vec<f64>> = unitary_lie_algebra(t)
        .iter()
        .map(|x| (x + &j.conjugate(x)).to_real_vec())
        .collect();
    let dim_gauge = real_rank(&images, t.tol());
    let commutative = t.is_commutative();
    Ok(GaugeGroupInfo {
        dim_u_a,
        dim_u_tilde,
        dim_gauge,
        torus_rank: commutative.then_some(dim_gauge),
        commutative,
        center_dim: center_dim(t),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct OneForm {
    pub matrix: CMatrix,
    /// `(a, b, w)`: the form is `Σ w · rep[a] [D, rep[b]]`.
    pub generators: Vec<(usize, usize, C64)>,
}

impl OneForm {
    pub fn reassemble(&self, t: &FiniteTriple) -> CMatrix {
        let d = t.dirac_or_zero();
        let rep = t.rep_basis();
        let mut out = CMatrix::zeros(t.hilbert_dim(), t.hilbert_dim());
        for &(a, b, w) in &self.generators {
            out = &out + &(&rep[a] * &CMatrix::commutator(&d, &rep[b])).scale(w);
        }
        out
    }
}

/// Real basis of the self-adjoint part of `Ω¹_D = span{a[D,b]}`.
pub fn omega1_basis(t: &FiniteTriple) -> Vec<OneForm> {
    let d = t.dirac_or_zero();
    let eps = t.tol().eps();
    if d.max_abs() < eps {
        return Vec::new();
    }
    let rep = t.rep_basis();
    let mut columns: Vec<(CMatrix, usize, usize, C64)> = Vec::new();
    for (a, ra) in rep.iter().enumerate() {
        for (b, rb) in rep.iter().enumerate() {
            let g = ra * &CMatrix::commutator(&d, rb);
            columns.push((g.scale(I), a, b, I));
            columns.push((g, a, b, ONE));
        }
    }
    let scale = columns.iter().map(|c| c.0.frobenius_norm()).fold(0.0, f64::max);
    if scale < eps {
        return Vec::new();
    }
    // Greedy independent subset under the shared relative threshold.
    let mut ortho: Vec<Vec<f64>> = Vec::new();
    let mut chosen = Vec::new();
    for col in columns {
        let mut v = col.0.to_real_vec();
        for q in &ortho {
            let p: f64 = q.iter().zip(&v).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(q).for_each(|(x, y)| *x -= p * y);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > eps * scale {
            v.iter_mut().for_each(|x| *x /= norm);
            ortho.push(v);
            chosen.push(col);
        }
    }
    let space: Vec<CMatrix> = chosen.iter().map(|c| c.0.clone()).collect();
    let herm = |x: &CMatrix| x - &x.adjoint();
    let ns = real_null_space(&space, &[&herm], t.tol());
    ns.coords
        .iter()
        .zip(ns.matrices)
        .map(|(x, matrix)| {
            let mut generators: Vec<(usize, usize, C64)> = Vec::new();
            for (w, (_, a, b, unit)) in x.iter().zip(&chosen) {
                let coeff = unit * *w;
                match generators.iter_mut().find(|g| g.0 == *a && g.1 == *b) {
                    Some(g) => g.2 += coeff,
                    None => generators.push((*a, *b, coeff)),
                }
            }
            generators.retain(|g| g.2.norm() > 0.0);
            OneForm { matrix, generators }
        })
        .collect()
}

fn check_square(t: &FiniteTriple, m: &CMatrix) -> Result<(), GaugeError> {
    let n = t.hilbert_dim();
    if m.shape() != (n, n) {
        return Err(GaugeError::Shape {
            expected: n,
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    Ok(())
}

/// `D_A = D + A + ε′ J A J⁻¹`.
pub fn fluctuate(t: &FiniteTriple, a: &CMatrix) -> Result<CMatrix, GaugeError> {
    check_square(t, a)?;
    let j = t.real().ok_or(GaugeError::Missing("a real structure"))?;
    let defect = (a - &a.adjoint()).frobenius_norm();
    if !(defect < t.tol().eps()) {
        return Err(GaugeError::NotSelfAdjoint(defect));
    }
    let mirrored = j.conjugate(a).scale_real(f64::from(j.signs.epsilon_prime));
    Ok(&(&t.dirac_or_zero() + a) + &mirrored)
}

/// `B = A − J A J⁻¹`, the combination seen by the finite part of a product
/// with a KO-dimension 4 manifold.
pub fn b_field(j: &RealStructure, a: &CMatrix) -> CMatrix {
    a - &j.conjugate(a)
}

/// `uJuJ*` as a matrix on `H`.
pub fn adjoint_action(j: &RealStructure, u: &CMatrix) -> CMatrix {
    u * &j.conjugate(u)
}

#[derive(Debug, Clone, Serialize)]
pub struct GaugeTransform {
    /// `A^u = uAu* + u[D,u*]`
    pub potential: CMatrix,
    /// `uJuJ*`
    pub adjoint: CMatrix,
    pub covariance_residual: f64,
}

/// Transforms `A` by the unitary algebra element `u` and asserts
/// `D_{A^u} = (uJuJ*) D_A (uJuJ*)*`.
pub fn gauge_transform(t: &FiniteTriple, a: &CMatrix, u: &CMatrix) -> Result<GaugeTransform, GaugeError> {
    check_square(t, u)?;
    let j = t.real().ok_or(GaugeError::Missing("a real structure"))?;
    let eps = t.tol().eps();
    let n = t.hilbert_dim();
    let unitarity = (&(&u.adjoint() * u) - &CMatrix::identity(n)).frobenius_norm();
    if !(unitarity < eps) {
        return Err(GaugeError::NotUnitary(unitarity));
    }
    let membership = span_residual(t.rep_basis(), u);
    if !(membership < eps) {
        return Err(GaugeError::NotInAlgebra(membership));
    }
    let d = t.dirac_or_zero();
    let us = u.adjoint();
    let potential = &(&(u * a) * &us) + &(u * &CMatrix::commutator(&d, &us));
    let adjoint = adjoint_action(j, u);
    let before = fluctuate(t, a)?;
    let after = fluctuate(t, &potential)?;
    let conjugated = &(&adjoint * &before) * &adjoint.adjoint();
    let covariance_residual = (&after - &conjugated).frobenius_norm();
    if !(covariance_residual < eps) {
        return Err(GaugeError::Covariance(covariance_residual));
    }
    Ok(GaugeTransform {
        potential,
        adjoint,
        covariance_residual,
    })
}

/// Pointwise transformation of gauge-potential components on a product with
/// a manifold: `A_μ ↦ u A_μ u* − i u ∂_μu*`.
pub fn transform_components(a_mu: &[CMatrix; 4], u: &CMatrix, du_star: &[CMatrix; 4]) -> [CMatrix; 4] {
    let us = u.adjoint();
    std::array::from_fn(|mu| &(&(u * &a_mu[mu]) * &us) - &(u * &du_star[mu]).scale(I))
}

/// Unitary of a commutative algebra from componentwise phases.
pub fn phase_unitary(t: &FiniteTriple, phases: &[f64]) -> CMatrix {
    let coeffs: Vec<C64> = phases.iter().map(|&th| C64::from_polar(1.0, th)).collect();
    t.represent(&coeffs)
}

pub fn random_abelian_unitary<R: Rng + ?Sized>(t: &FiniteTriple, rng: &mut R) -> CMatrix {
    let phases: Vec<f64> = (0..t.rep_basis().len())
        .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
        .collect();
    phase_unitary(t, &phases)
}
