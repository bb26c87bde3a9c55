//! Randomized properties, one block per module. Every case draws its data
//! from a seeded stream so failures shrink to a reproducible seed.

mod common;

use std::f64::consts::TAU;

use proptest::prelude::*;
use rand::Rng;

use common::{c, gauss_bonnet_direct, matrix_algebra_triple, points_triple, weyl_sq_direct};
use ncg_workbench::clifford::{bilinear_matrix, build_gammas, charge_conjugation};
use ncg_workbench::distance::{connes_distance, DistanceValue};
use ncg_workbench::fermionic::{certify_decomposition, pairing_matrix, GaugeField, ModeSpace, ProductSetup, SlotKind};
use ncg_workbench::finite_triple::builders::{electrodynamics, random_diagonal, two_point_real};
use ncg_workbench::finite_triple::{classify_ko, solve_dirac_space, verify_axioms};
use ncg_workbench::gauge::{adjoint_action, b_field, gauge_group, random_abelian_unitary, subalgebra, SubalgebraKind};
use ncg_workbench::linalg::{
    hermitian_basis, kron, random_hermitian, random_matrix, random_unitary, real_null_space, spectral_norm, CMatrix, ZERO,
};
use ncg_workbench::rng::{stream, WorkbenchRng};
use ncg_workbench::spectral_action::curvature::Riemann;
use ncg_workbench::spectral_action::heat::heat_trace_torus;
use ncg_workbench::spectral_action::{compare_lagrangian, ModelPoint, Moments, PointGeometry};
use ncg_workbench::{Tolerance, C64};

fn rng(seed: u64) -> WorkbenchRng {
    stream(seed, "properties")
}

fn random_vector(n: usize, r: &mut WorkbenchRng) -> Vec<C64> {
    (0..n).map(|_| c(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))).collect()
}

fn bilinear(x: &[C64], m: &CMatrix, y: &[C64]) -> C64 {
    x.iter().zip(m.apply(y)).map(|(a, b)| a * b).sum()
}

fn finite_distance(t: &ncg_workbench::finite_triple::FiniteTriple, i: usize, j: usize) -> f64 {
    match connes_distance(t, i, j).unwrap().value {
        DistanceValue::Finite(v) => v,
        DistanceValue::Unbounded => panic!("unbounded distance on a connected triple"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn spectral_norm_submultiplicative_and_unitarily_invariant(seed in any::<u64>(), n in 1usize..6) {
        let mut r = rng(seed);
        let a = random_matrix(n, n, &mut r);
        let b = random_matrix(n, n, &mut r);
        let (u, v) = (random_unitary(n, &mut r), random_unitary(n, &mut r));
        let na = spectral_norm(&a).unwrap();
        let nab = spectral_norm(&(&a * &b)).unwrap();
        prop_assert!(nab <= na * spectral_norm(&b).unwrap() + 1e-10);
        let rotated = spectral_norm(&(&(&u * &a) * &v)).unwrap();
        prop_assert!((rotated - na).abs() < 1e-10);
    }

    #[test]
    fn kron_associative_and_mixed_product(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_matrix(2, 3, &mut r);
        let b = random_matrix(3, 2, &mut r);
        let x = random_matrix(2, 2, &mut r);
        let y = random_matrix(2, 3, &mut r);
        let left = kron(&kron(&a, &b).unwrap(), &x).unwrap();
        let right = kron(&a, &kron(&b, &x).unwrap()).unwrap();
        prop_assert!((&left - &right).max_abs() < 1e-12);
        // (a ⊗ x)(b ⊗ y) = ab ⊗ xy
        let lhs = &kron(&a, &x).unwrap() * &kron(&b, &y).unwrap();
        let rhs = kron(&(&a * &b), &(&x * &y)).unwrap();
        prop_assert!((&lhs - &rhs).max_abs() < 1e-12);
    }

    #[test]
    fn null_space_satisfies_constraints(seed in any::<u64>(), n in 1usize..5, scalar in any::<bool>()) {
        let mut r = rng(seed);
        // A generic Hermitian commutes only with its own polynomials; a
        // conjugated scalar leaves nothing but roundoff in the constraint.
        let x = if scalar {
            let u = random_unitary(n, &mut r);
            &(&u * &CMatrix::identity(n).scale_real(2.5)) * &u.adjoint()
        } else {
            random_hermitian(n, &mut r)
        };
        let tol = Tolerance::default();
        let comm = |m: &CMatrix| CMatrix::commutator(&x, m);
        let ns = real_null_space(&hermitian_basis(n), &[&comm], tol);
        for m in &ns.matrices {
            prop_assert!(comm(m).max_abs() < 10.0 * tol.eps());
        }
        prop_assert_eq!(ns.dim(), if scalar { n * n } else { n });
    }

    #[test]
    fn declared_signs_match_detected_ko(seed in any::<u64>(), pick in 0usize..3) {
        let mut r = rng(seed);
        let ko = [0u8, 2, 6][pick];
        let base = random_diagonal(&mut r, ko).triple;
        let v = random_unitary(base.hilbert_dim(), &mut r);
        for t in [base.clone(), base.conjugated_by(&v).unwrap()] {
            let report = verify_axioms(&t);
            prop_assert!(report.all_pass(), "{:?}", report.first_failure());
            prop_assert_eq!(report.ko_dimension, Some(ko));
            prop_assert_eq!(classify_ko(t.real().unwrap().signs), Some(ko));
        }
    }

    #[test]
    fn gauge_sequence_is_exact(seed in any::<u64>(), pick in 0usize..3) {
        let mut r = rng(seed);
        let t = random_diagonal(&mut r, [0u8, 2, 6][pick]).triple;
        let info = gauge_group(&t).unwrap();
        prop_assert!(info.exact(), "{info:?}");
    }

    #[test]
    fn tilde_subalgebra_is_central(seed in any::<u64>(), pick in 0usize..3, conjugate in any::<bool>()) {
        let mut r = rng(seed);
        let mut t = random_diagonal(&mut r, [0u8, 2, 6][pick]).triple;
        if conjugate {
            let v = random_unitary(t.hilbert_dim(), &mut r);
            t = t.conjugated_by(&v).unwrap();
        }
        let tilde = subalgebra(&t, SubalgebraKind::Tilde).unwrap();
        prop_assert!(!tilde.basis.is_empty());
        for x in &tilde.basis {
            for b in t.rep_basis() {
                prop_assert!(CMatrix::commutator(x, b).max_abs() < 1e-9);
            }
        }
    }

    #[test]
    fn adjoint_action_is_a_homomorphism(seed in any::<u64>()) {
        let mut r = rng(seed);
        let t = matrix_algebra_triple();
        let j = t.real().unwrap();
        let element = |r: &mut WorkbenchRng| t.represent(random_unitary(2, r).entries());
        let (u, v) = (element(&mut r), element(&mut r));
        let lhs = adjoint_action(j, &(&u * &v));
        let rhs = &adjoint_action(j, &u) * &adjoint_action(j, &v);
        prop_assert!((&lhs - &rhs).max_abs() < 1e-10);
    }

    #[test]
    fn adjoint_action_preserves_real_structure_and_grading(seed in any::<u64>()) {
        let mut r = rng(seed);
        let t = electrodynamics(c(r.random_range(-2.0..2.0), r.random_range(-2.0..2.0))).unwrap();
        let j = t.real().unwrap();
        let u = random_abelian_unitary(&t, &mut r);
        let big_u = adjoint_action(j, &u);
        // U J U* as an antilinear map has unitary part U·U_J·Uᵀ.
        let conjugated_j = &(&big_u * &j.unitary) * &big_u.transpose();
        prop_assert!((&conjugated_j - &j.unitary).max_abs() < 1e-10);
        let g = t.grading().unwrap();
        prop_assert!((&(&(&big_u * g) * &big_u.adjoint()) - g).max_abs() < 1e-10);
    }

    #[test]
    fn electrodynamics_b_field_pattern(x1 in -5.0f64..5.0, x2 in -5.0f64..5.0) {
        let t = electrodynamics(c(1.0, 0.0)).unwrap();
        let a = CMatrix::real_diag(&[x1, x1, x2, x2]);
        let b = b_field(t.real().unwrap(), &a);
        let y = x1 - x2;
        prop_assert!((&b - &CMatrix::real_diag(&[y, y, -y, -y])).max_abs() < 1e-12);
        prop_assert!(b.trace().norm() < 1e-12);
        prop_assert!(CMatrix::commutator(&b, t.grading().unwrap()).max_abs() < 1e-12);
    }

    #[test]
    fn gamma_matrices_satisfy_clifford_relations(pair in (0usize..4, 0usize..4)) {
        let g = build_gammas().unwrap();
        let (mu, nu) = pair;
        let expected = CMatrix::identity(4).scale_real(if mu == nu { 2.0 } else { 0.0 });
        prop_assert!((&CMatrix::anticommutator(&g.gammas[mu], &g.gammas[nu]) - &expected).max_abs() < 1e-12);
        prop_assert!((&g.gammas[mu].adjoint() - &g.gammas[mu]).max_abs() < 1e-12);
        prop_assert!(CMatrix::anticommutator(&g.gamma5, &g.gammas[mu]).max_abs() < 1e-12);
    }

    #[test]
    fn charge_conjugation_bilinear_symmetries(seed in any::<u64>(), mu in 0usize..4) {
        let mut r = rng(seed);
        let g = build_gammas().unwrap();
        let jm = charge_conjugation(&g).unwrap();
        let (chi, psi) = (random_vector(4, &mut r), random_vector(4, &mut r));
        // On commuting vectors the γ₅ pairing is antisymmetric and the γ^μ
        // pairing symmetric; with anticommuting components both signs flip.
        let b5 = bilinear_matrix(&jm, &g.gamma5);
        prop_assert!((bilinear(&chi, &b5, &psi) + bilinear(&psi, &b5, &chi)).norm() < 1e-12);
        let bm = bilinear_matrix(&jm, &g.gammas[mu]);
        prop_assert!((bilinear(&chi, &bm, &psi) - bilinear(&psi, &bm, &chi)).norm() < 1e-12);
    }

    #[test]
    fn riemann_tensor_symmetries(seed in any::<u64>()) {
        let mut r = rng(seed);
        let rm = Riemann::random(&mut r);
        prop_assert!(rm.symmetry_defect() < 1e-10);
        let ric = rm.ricci();
        for a in 0..4 {
            for b in 0..4 {
                let contraction: f64 = (0..4).map(|k| rm.get(k, a, k, b)).sum();
                prop_assert!((contraction - ric[a][b]).abs() < 1e-12);
                prop_assert!((ric[a][b] - ric[b][a]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn curvature_invariants_match_direct_tensors(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = PointGeometry::random(&mut r);
        prop_assert!((g.weyl_sq() - weyl_sq_direct(&g)).abs() < 1e-9);
        prop_assert!((g.gauss_bonnet() - gauss_bonnet_direct(&g)).abs() < 1e-9);
        prop_assert!(g.consistency_defect() < 1e-10);
    }

    #[test]
    fn spinor_trace_of_field_square(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = build_gammas().unwrap();
        let model = ModelPoint::random(&mut r);
        let mut total = ZERO;
        for mu in 0..4 {
            for nu in 0..4 {
                for rho in 0..4 {
                    for sigma in 0..4 {
                        let spin = &(&(&g.gammas[mu] * &g.gammas[nu]) * &g.gammas[rho]) * &g.gammas[sigma];
                        let fin = &model.finite_field(mu, nu) * &model.finite_field(rho, sigma);
                        total += kron(&spin, &fin).unwrap().trace();
                    }
                }
            }
        }
        let lhs = total.scale(-0.25);
        prop_assert!((lhs - c(8.0 * model.field_sq(), 0.0)).norm() < 1e-10 * (1.0 + model.field_sq()));
    }

    #[test]
    fn expansion_matches_closed_form_lagrangian(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = build_gammas().unwrap();
        let geom = PointGeometry::random(&mut r);
        let model = ModelPoint::random(&mut r);
        let m = Moments::random(&mut r);
        let cmp = compare_lagrangian(&geom, &model, &m, &g);
        prop_assert!(cmp.rel_error < 1e-10, "{cmp:?}");
    }

    #[test]
    fn heat_trace_equals_direct_lattice_sum(t in 1.5f64..5.0, re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let cut = 4usize;
        let d = c(re, im);
        let point = heat_trace_torus(TAU, cut, d, &[t]).unwrap()[0];
        let n = cut as i64;
        let mut direct = 0.0;
        for a in -n..=n {
            for b in -n..=n {
                for e in -n..=n {
                    for f in -n..=n {
                        let k2 = (a * a + b * b + e * e + f * f) as f64;
                        direct += (-t * (k2 + d.norm_sqr())).exp();
                    }
                }
            }
        }
        prop_assert!((point.trace - 16.0 * direct).abs() < 1e-12 * point.trace.max(1e-300));
    }

    #[test]
    fn fermionic_pairing_is_antisymmetric_on_hplus(seed in any::<u64>(), count in 1usize..5, mass in -2.0f64..2.0) {
        let mut r = rng(seed);
        let ms = ModeSpace::with_count(count, TAU).unwrap();
        let setup = ProductSetup::new(ms, mass).unwrap();
        let y: [f64; 4] = std::array::from_fn(|_| r.random_range(-1.0..1.0));
        let d_a = setup.dirac_operator(&GaugeField::Constant(y)).unwrap();
        let m = pairing_matrix(&setup, &d_a);
        let h = setup.basis.dim();
        prop_assert_eq!(2 * h, setup.ms.dim());
        let (xi, eta) = (random_vector(h, &mut r), random_vector(h, &mut r));
        prop_assert!((bilinear(&xi, &m, &eta) + bilinear(&eta, &m, &xi)).norm() < 1e-12);
    }

    #[test]
    fn decomposition_is_gauge_invariant(seed in any::<u64>(), count in 1usize..4, mass in -2.0f64..2.0) {
        let mut r = rng(seed);
        let y: [f64; 4] = std::array::from_fn(|_| r.random_range(-1.0..1.0));
        let cert = certify_decomposition(ModeSpace::with_count(count, TAU).unwrap(), &GaugeField::Constant(y), mass).unwrap();
        prop_assert!(cert.deviation < 1e-10);
        prop_assert!(cert.gauge_invariance[0] < 1e-10 && cert.gauge_invariance[1] < 1e-10);
        prop_assert!(cert.symmetric_part < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn distance_is_symmetric_and_obeys_triangle(seed in any::<u64>()) {
        let mut r = rng(seed);
        let t = points_triple(random_hermitian(3, &mut r));
        let d = |i, j| finite_distance(&t, i, j);
        let (d01, d10, d12, d02) = (d(0, 1), d(1, 0), d(1, 2), d(0, 2));
        prop_assert!((d01 - d10).abs() < 1e-8 * d01.max(1.0));
        prop_assert!(d02 <= d01 + d12 + 1e-7);
        prop_assert_eq!(connes_distance(&t, 2, 2).unwrap().value, DistanceValue::Finite(0.0));
    }

    #[test]
    fn distance_scales_inversely_with_dirac(seed in any::<u64>(), scale in 0.2f64..5.0) {
        let mut r = rng(seed);
        let d = random_hermitian(3, &mut r);
        let base = finite_distance(&points_triple(d.clone()), 0, 2);
        let scaled = finite_distance(&points_triple(d.scale_real(scale)), 0, 2);
        prop_assert!((scaled * scale - base).abs() < 1e-8 * base.max(1.0));
    }

    #[test]
    fn two_point_solver_is_equivariant(seed in any::<u64>(), pick in 0usize..3) {
        let mut r = rng(seed);
        let ko = [0u8, 2, 6][pick];
        let t = two_point_real(ZERO, ko).unwrap();
        let v = random_unitary(2, &mut r);
        prop_assert_eq!(solve_dirac_space(&t.conjugated_by(&v).unwrap()).unwrap().dim(), 0);
    }

    #[test]
    fn electrodynamics_solver_is_equivariant(seed in any::<u64>()) {
        let mut r = rng(seed);
        let t = electrodynamics(c(1.0, 0.0)).unwrap();
        let v = random_unitary(4, &mut r);
        let moved = t.conjugated_by(&v).unwrap();
        let base = solve_dirac_space(&t).unwrap();
        let space = solve_dirac_space(&moved).unwrap();
        prop_assert_eq!(space.dim(), base.dim());
        for d in &space.basis {
            let installed = moved.with_dirac(Some(d.clone())).unwrap();
            let report = verify_axioms(&installed);
            prop_assert!(report.all_pass(), "{:?}", report.first_failure());
            // Pulled back, each element lies in the span of the original basis.
            let back = &(&v.adjoint() * d) * &v;
            prop_assert!(ncg_workbench::linalg::span_residual(&base.basis, &back) < 1e-8);
        }
    }

    #[test]
    fn fermionic_slots_follow_real_structure(count in 1usize..5) {
        let setup = ProductSetup::new(ModeSpace::with_count(count, TAU).unwrap(), 1.0).unwrap();
        let images = setup.j_slot_images();
        let expected = [(SlotKind::ChiL, 2), (SlotKind::ChiR, 3), (SlotKind::PsiR, 0), (SlotKind::PsiL, 1)];
        prop_assert_eq!(images, expected.to_vec());
        let grading = &setup.grading;
        let e = setup.basis.embedding(setup.ms.dim());
        prop_assert!((&(grading * &e) - &e).max_abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    // Complex diagonal elements never beat the self-adjoint optimum.
    #[test]
    fn self_adjoint_restriction_is_sound(seed in any::<u64>(), points in 2usize..4) {
        let mut r = rng(seed);
        let d = random_hermitian(points, &mut r);
        let t = points_triple(d.clone());
        let best = finite_distance(&t, 0, 1);
        let mut found = 0.0f64;
        for _ in 0..100_000 {
            let a = CMatrix::diag(&random_vector(points, &mut r));
            let norm = spectral_norm(&CMatrix::commutator(&d, &a)).unwrap();
            if norm > 0.0 {
                found = found.max((a[(0, 0)] - a[(1, 1)]).norm() / norm);
            }
        }
        prop_assert!(found <= best + 1e-4, "random search {found} beats {best}");
    }
}
