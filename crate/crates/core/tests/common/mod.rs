//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use ncg_workbench::finite_triple::builders::{diagonal_rep, RandomDiagonal};
use ncg_workbench::finite_triple::{FiniteTriple, RealStructure, RealStructureSigns};
use ncg_workbench::linalg::{CMatrix, ONE};
use ncg_workbench::spectral_action::{curvature::quads, PointGeometry};
use ncg_workbench::{Tolerance, C64};

pub fn delta(a: usize, b: usize) -> f64 {
    f64::from(u8::from(a == b))
}

/// `g^{μν}g^{ρσ} − g^{μρ}g^{νσ} + g^{μσ}g^{νρ}` for the Euclidean metric.
pub fn metric_quad(mu: usize, nu: usize, rho: usize, sigma: usize) -> f64 {
    delta(mu, nu) * delta(rho, sigma) - delta(mu, rho) * delta(nu, sigma) + delta(mu, sigma) * delta(nu, rho)
}

/// Weyl tensor assembled component by component, squared and summed.
pub fn weyl_sq_direct(g: &PointGeometry) -> f64 {
    let ric = &g.ricci;
    quads()
        .map(|(a, b, c, e)| {
            let w = g.riemann.get(a, b, c, e)
                - 0.5 * (delta(a, c) * ric[b][e] - delta(a, e) * ric[b][c] - delta(b, c) * ric[a][e] + delta(b, e) * ric[a][c])
                + g.s / 6.0 * (delta(a, c) * delta(b, e) - delta(a, e) * delta(b, c));
            w * w
        })
        .sum()
}

pub fn levi_civita(p: [usize; 4]) -> f64 {
    let mut sign = 1.0;
    for i in 0..4 {
        for j in (i + 1)..4 {
            if p[i] == p[j] {
                return 0.0;
            }
            if p[i] > p[j] {
                sign = -sign;
            }
        }
    }
    sign
}

/// `¼ εε R R` contracted over all index permutations.
pub fn gauss_bonnet_direct(g: &PointGeometry) -> f64 {
    let perms: Vec<[usize; 4]> = quads().map(|(a, b, c, d)| [a, b, c, d]).filter(|p| levi_civita(*p) != 0.0).collect();
    let mut sum = 0.0;
    for p in &perms {
        for q in &perms {
            sum += levi_civita(*p) * levi_civita(*q) * g.riemann.get(p[2], p[3], q[0], q[1]) * g.riemann.get(p[0], p[1], q[2], q[3]);
        }
    }
    0.25 * sum
}

/// Classes of points linked by the pairing of a random diagonal triple.
pub fn pairing_classes(r: &RandomDiagonal) -> usize {
    let mut parent: Vec<usize> = (0..r.n_points).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for (i, &j) in r.pairing.iter().enumerate() {
        let (a, b) = (find(&mut parent, r.points[i]), find(&mut parent, r.points[j]));
        parent[a] = b;
    }
    (0..r.n_points).filter(|&x| find(&mut parent, x) == x).count()
}

/// `C^k` acting diagonally on `C^k` with the given Dirac operator.
pub fn points_triple(d: CMatrix) -> FiniteTriple {
    let k = d.rows();
    let pts: Vec<usize> = (0..k).collect();
    FiniteTriple::new(k, vec![1; k], diagonal_rep(&pts, k), Some(d), None, None, Tolerance::default()).unwrap()
}

/// `M₂(C)` acting by left multiplication on `M₂(C) ≅ C⁴`, `J ξ = ξ*`.
pub fn matrix_algebra_triple() -> FiniteTriple {
    let idx = |i: usize, k: usize| 2 * i + k;
    let mut rep = Vec::new();
    for i in 0..2 {
        for j in 0..2 {
            let mut m = CMatrix::zeros(4, 4);
            for k in 0..2 {
                m[(idx(i, k), idx(j, k))] = ONE;
            }
            rep.push(m);
        }
    }
    let mut swap = CMatrix::zeros(4, 4);
    for i in 0..2 {
        for k in 0..2 {
            swap[(idx(k, i), idx(i, k))] = ONE;
        }
    }
    FiniteTriple::new(
        4,
        vec![2],
        rep,
        None,
        None,
        Some(RealStructure {
            unitary: swap,
            signs: RealStructureSigns::new(1, 1, None).unwrap(),
        }),
        Tolerance::default(),
    )
    .unwrap()
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}
