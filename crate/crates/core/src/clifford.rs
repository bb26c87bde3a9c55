//! Euclidean gamma matrices in four dimensions (chiral basis), chirality,
//! charge conjugation and trace identities.

use serde::Serialize;
use thiserror::Error;

use crate::finite_triple::{classify_ko, RealStructure, RealStructureSigns};
use crate::linalg::{kron, real_null_space, CMatrix, Tolerance, C64, I, ONE, ZERO};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CliffordError {
    #[error("gamma set violates {relation} (residual {residual:e})")]
    Relation { relation: &'static str, residual: f64 },
    #[error("charge conjugation construction failed: {0}")]
    ConstructionFailure(String),
}

#[derive(Debug, Clone)]
pub struct GammaSet {
    pub gammas: [CMatrix; 4],
    pub gamma5: CMatrix,
    /// `γ₅ = phase · γ¹γ²γ³γ⁴`.
    pub gamma5_phase: C64,
}

fn pauli() -> [CMatrix; 3] {
    [
        CMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]),
        CMatrix::from_rows(vec![vec![ZERO, -I], vec![I, ZERO]]).expect("finite"),
        CMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]),
    ]
}

fn off_diagonal(upper: &CMatrix, lower: &CMatrix) -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    upper.write_block(&mut m, 0, 2);
    lower.write_block(&mut m, 2, 0);
    m
}

/// Chiral basis: `γᵏ = [[0, -iσₖ], [iσₖ, 0]]` for k = 1..3 and
/// `γ⁴ = [[0, 1], [1, 0]]`, so that `γ₅ = diag(1,1,-1,-1)`.
pub fn build_gammas() -> Result<GammaSet, CliffordError> {
    let s = pauli();
    let id2 = CMatrix::identity(2);
    let gammas = [
        off_diagonal(&s[0].scale(-I), &s[0].scale(I)),
        off_diagonal(&s[1].scale(-I), &s[1].scale(I)),
        off_diagonal(&s[2].scale(-I), &s[2].scale(I)),
        off_diagonal(&id2, &id2),
    ];
    let product = &(&(&gammas[0] * &gammas[1]) * &gammas[2]) * &gammas[3];
    // product² = ±1 decides a real or imaginary phase; the sign is chosen so
    // the upper-left entry of γ₅ is +1.
    let sq = &product * &product;
    let mut phase = if sq[(0, 0)].re > 0.0 { ONE } else { I };
    if (product[(0, 0)] * phase).re < 0.0 {
        phase = -phase;
    }
    let g = GammaSet {
        gamma5: product.scale(phase),
        gammas,
        gamma5_phase: phase,
    };
    g.validate(1e-12)?;
    Ok(g)
}

impl GammaSet {
    pub fn validate(&self, eps: f64) -> Result<(), CliffordError> {
        let id = CMatrix::identity(4);
        let worst = |relation: &'static str, residual: f64| {
            if residual < eps {
                Ok(())
            } else {
                Err(CliffordError::Relation { relation, residual })
            }
        };
        for mu in 0..4 {
            for nu in 0..4 {
                let expected = id.scale_real(if mu == nu { 2.0 } else { 0.0 });
                let anti = CMatrix::anticommutator(&self.gammas[mu], &self.gammas[nu]);
                worst("Clifford relation", (&anti - &expected).frobenius_norm())?;
            }
            let g = &self.gammas[mu];
            worst("gamma self-adjointness", (g - &g.adjoint()).frobenius_norm())?;
            worst(
                "chirality anticommutation",
                CMatrix::anticommutator(&self.gamma5, g).frobenius_norm(),
            )?;
        }
        let g5 = &self.gamma5;
        worst("chirality self-adjointness", (g5 - &g5.adjoint()).frobenius_norm())?;
        worst("chirality involution", (&(g5 * g5) - &id).frobenius_norm())?;
        Ok(())
    }

    /// `γ^μγ^ν`
    pub fn pair(&self, mu: usize, nu: usize) -> CMatrix {
        &self.gammas[mu] * &self.gammas[nu]
    }
}

/// `Tr(¼ γ^μγ^νγ^ργ^σ)` with 0-based indices.
pub fn trace_quad(g: &GammaSet, mu: usize, nu: usize, rho: usize, sigma: usize) -> f64 {
    let m = &g.pair(mu, nu) * &g.pair(rho, sigma);
    let t = m.trace();
    debug_assert!(t.im.abs() < 1e-12);
    0.25 * t.re
}

/// `δ^{μν}δ^{ρσ} − δ^{μρ}δ^{νσ} + δ^{μσ}δ^{νρ}`
pub fn trace_quad_identity(mu: usize, nu: usize, rho: usize, sigma: usize) -> f64 {
    let d = |a: usize, b: usize| f64::from(u8::from(a == b));
    d(mu, nu) * d(rho, sigma) - d(mu, rho) * d(nu, sigma) + d(mu, sigma) * d(nu, rho)
}

#[derive(Debug, Clone)]
pub struct ChargeConjugation {
    /// `J_M = unitary ∘ conjugation`.
    pub unitary: CMatrix,
}

impl ChargeConjugation {
    pub fn as_real_structure(&self) -> RealStructure {
        RealStructure {
            unitary: self.unitary.clone(),
            signs: RealStructureSigns::for_ko(4),
        }
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        self.as_real_structure().apply(v)
    }
}

/// Solves `Uγ̄^μ = −γ^μU` and `Uγ̄₅ = γ₅U` for `U`, normalises it to a
/// unitary with its largest entry real positive, and checks `UŪ = −1`.
pub fn charge_conjugation(g: &GammaSet) -> Result<ChargeConjugation, CliffordError> {
    let tol = Tolerance::default();
    let space: Vec<CMatrix> = (0..16)
        .flat_map(|k| {
            let mut e = CMatrix::zeros(4, 4);
            e[(k / 4, k % 4)] = ONE;
            [e.clone(), e.scale(I)]
        })
        .collect();
    let maps: Vec<Box<dyn Fn(&CMatrix) -> CMatrix + '_>> = (0..4)
        .map(|mu| {
            let gm = &g.gammas[mu];
            Box::new(move |u: &CMatrix| &(u * &gm.conj()) + &(gm * u)) as Box<dyn Fn(&CMatrix) -> CMatrix>
        })
        .chain(std::iter::once(Box::new(|u: &CMatrix| {
            &(u * &g.gamma5.conj()) - &(&g.gamma5 * u)
        }) as Box<dyn Fn(&CMatrix) -> CMatrix>))
        .collect();
    let refs: Vec<&dyn Fn(&CMatrix) -> CMatrix> = maps.iter().map(|b| b.as_ref()).collect();
    let ns = real_null_space(&space, &refs, tol);
    // Complex multiples of one solution: real dimension 2.
    if ns.dim() != 2 {
        return Err(CliffordError::ConstructionFailure(format!(
            "solution space has real dimension {}, expected 2",
            ns.dim()
        )));
    }
    let raw = &ns.matrices[0];
    let gram = &raw.adjoint() * raw;
    let scale = gram[(0, 0)].re;
    if (&gram - &CMatrix::identity(4).scale_real(scale)).max_abs() > 1e-10 * scale.max(1.0) {
        return Err(CliffordError::ConstructionFailure("solution is not a multiple of a unitary".into()));
    }
    let mut u = raw.scale_real(1.0 / scale.sqrt());
    let pivot = u
        .entries()
        .iter()
        .copied()
        .fold(ZERO, |best, z| if z.norm() > best.norm() + 1e-12 { z } else { best });
    u = u.scale(pivot.conj() / pivot.norm());
    // Snap roundoff so integer entries stay exact.
    let u = CMatrix::from_fn(4, 4, |r, c| {
        let z = u[(r, c)];
        C64::new(snap(z.re), snap(z.im))
    });
    let jsq = &u * &u.conj();
    let defect = (&jsq + &CMatrix::identity(4)).frobenius_norm();
    if defect > 1e-12 {
        return Err(CliffordError::ConstructionFailure(format!(
            "J_M² ≠ −1 (defect {defect:e})"
        )));
    }
    Ok(ChargeConjugation { unitary: u })
}

fn snap(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() < 1e-13 {
        r
    } else {
        x
    }
}

/// Measured sign `s` with `U X̄ = s X U`, or `None` if neither sign holds.
pub fn measure_sign(unitary: &CMatrix, x: &CMatrix, eps: f64) -> Option<i8> {
    let lhs = unitary * &x.conj();
    let rhs = x * unitary;
    if (&lhs - &rhs).frobenius_norm() < eps {
        Some(1)
    } else if (&lhs + &rhs).frobenius_norm() < eps {
        Some(-1)
    } else {
        None
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ProductSigns {
    pub epsilon: Option<i8>,
    pub epsilon_prime: Option<i8>,
    pub epsilon_double_prime: Option<i8>,
    pub ko_dimension: Option<u8>,
}

/// Signs of `J_M ⊗ J_F` measured on the product operators: `J²`, the
/// kinetic symbol `−iγ^μ ⊗ 1`, the mass term `γ₅ ⊗ D_F` and the grading
/// `γ₅ ⊗ γ_F`.
pub fn product_signs(g: &GammaSet, jm: &ChargeConjugation, u_f: &CMatrix, d_f: &CMatrix, gamma_f: &CMatrix) -> ProductSigns {
    let eps = 1e-10;
    let k = |a: &CMatrix, b: &CMatrix| kron(a, b).expect("small");
    let u = k(&jm.unitary, u_f);
    let n = u.rows();
    let jsq = &u * &u.conj();
    let id = CMatrix::identity(n);
    let epsilon = if (&jsq - &id).frobenius_norm() < eps {
        Some(1)
    } else if (&jsq + &id).frobenius_norm() < eps {
        Some(-1)
    } else {
        None
    };
    let fid = CMatrix::identity(u_f.rows());
    let mut signs: Vec<Option<i8>> = (0..4)
        .map(|mu| measure_sign(&u, &k(&g.gammas[mu].scale(-I), &fid), eps))
        .collect();
    signs.push(measure_sign(&u, &k(&g.gamma5, d_f), eps));
    let epsilon_prime = if signs.iter().all(|s| *s == signs[0]) { signs[0] } else { None };
    let epsilon_double_prime = measure_sign(&u, &k(&g.gamma5, gamma_f), eps);
    let ko_dimension = match (epsilon, epsilon_prime) {
        (Some(e), Some(ep)) => classify_ko(RealStructureSigns {
            epsilon: e,
            epsilon_prime: ep,
            epsilon_double_prime,
        }),
        _ => None,
    };
    ProductSigns {
        epsilon,
        epsilon_prime,
        epsilon_double_prime,
        ko_dimension,
    }
}

/// Matrix `B` of the bilinear form `(χ, ψ) ↦ ⟨Jχ, Xψ⟩ = χᵀ B ψ`, with the
/// inner product antilinear in its first slot: `B = U* X`.
pub fn bilinear_matrix(j: &ChargeConjugation, x: &CMatrix) -> CMatrix {
    &j.unitary.adjoint() * x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_triple::builders::electrodynamics;
    use crate::linalg;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn inner(a: &[C64], b: &[C64]) -> C64 {
        a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
    }

    #[test]
    fn anticommutator_and_square() {
        let g = build_gammas().unwrap();
        assert!(CMatrix::anticommutator(&g.gammas[0], &g.gammas[1]).max_abs() < 1e-15);
        assert!((&(&g.gammas[0] * &g.gammas[0]) - &CMatrix::identity(4)).max_abs() < 1e-15);
    }

    #[test]
    fn trace_of_pairs() {
        let g = build_gammas().unwrap();
        for mu in 0..4 {
            for nu in 0..4 {
                let t = g.pair(mu, nu).trace();
                assert!((t - C64::new(if mu == nu { 4.0 } else { 0.0 }, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn chirality_is_diagonal_with_unit_phase() {
        let g = build_gammas().unwrap();
        assert!((&g.gamma5 - &CMatrix::real_diag(&[1.0, 1.0, -1.0, -1.0])).max_abs() < 1e-15);
        assert_eq!(g.gamma5_phase, ONE);
    }

    #[test]
    fn trace_quad_examples() {
        let g = build_gammas().unwrap();
        assert!((trace_quad(&g, 0, 0, 1, 1) - 1.0).abs() < 1e-12);
        assert!((trace_quad(&g, 0, 1, 0, 1) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn trace_quad_all_tuples() {
        let g = build_gammas().unwrap();
        for idx in 0..256 {
            let (a, b, c, d) = (idx / 64, (idx / 16) % 4, (idx / 4) % 4, idx % 4);
            assert!((trace_quad(&g, a, b, c, d) - trace_quad_identity(a, b, c, d)).abs() < 1e-12);
        }
    }

    #[test]
    fn charge_conjugation_signs() {
        let g = build_gammas().unwrap();
        let j = charge_conjugation(&g).unwrap();
        let u = &j.unitary;
        assert!((&(&u.adjoint() * u) - &CMatrix::identity(4)).max_abs() < 1e-12);
        assert!((&(u * &u.conj()) + &CMatrix::identity(4)).max_abs() < 1e-12);
        assert_eq!(measure_sign(u, &g.gamma5, 1e-12), Some(1));
        for mu in 0..4 {
            assert_eq!(measure_sign(u, &g.gammas[mu], 1e-12), Some(-1));
        }
    }

    #[test]
    fn product_with_electrodynamics_is_ko2() {
        let g = build_gammas().unwrap();
        let jm = charge_conjugation(&g).unwrap();
        let f = electrodynamics(C64::new(0.4, -0.9)).unwrap();
        let s = product_signs(
            &g,
            &jm,
            &f.real().unwrap().unitary,
            f.dirac().unwrap(),
            f.grading().unwrap(),
        );
        assert_eq!((s.epsilon, s.epsilon_prime, s.epsilon_double_prime), (Some(-1), Some(1), Some(-1)));
        assert_eq!(s.ko_dimension, Some(2));
    }

    #[test]
    fn bilinear_forms_on_vectors_and_grassmann() {
        let g = build_gammas().unwrap();
        let j = charge_conjugation(&g).unwrap();
        let b5 = bilinear_matrix(&j, &g.gamma5);
        // Ordinary vectors: γ₅ pairing antisymmetric, γ^μ pairing symmetric.
        assert!((&b5 + &b5.transpose()).max_abs() < 1e-12);
        for mu in 0..4 {
            let b = bilinear_matrix(&j, &g.gammas[mu]);
            assert!((&b - &b.transpose()).max_abs() < 1e-12);
        }
        // Direct evaluation on random spinors agrees with the matrix form.
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let chi = linalg::random_matrix(4, 1, &mut rng).column(0);
        let psi = linalg::random_matrix(4, 1, &mut rng).column(0);
        let lhs = inner(&j.apply(&chi), &g.gamma5.apply(&psi));
        let rhs = inner(&j.apply(&psi), &g.gamma5.apply(&chi));
        assert!((lhs + rhs).norm() < 1e-12);
    }
}
