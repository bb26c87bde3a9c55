//! Constructors for the standard example triples.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{FiniteTriple, RealStructure, RealStructureSigns, TripleError};
use crate::linalg::{CMatrix, Tolerance, C64, ONE, ZERO};

/// Representation basis of `C^k` acting diagonally: basis element `p` is the
/// projector onto the coordinates `i` with `points[i] == p`.
pub fn diagonal_rep(points: &[usize], k: usize) -> Vec<CMatrix> {
    (0..k)
        .map(|p| {
            let v: Vec<f64> = points.iter().map(|&q| f64::from(u8::from(q == p))).collect();
            CMatrix::real_diag(&v)
        })
        .collect()
}

fn two_point_dirac(t: C64) -> CMatrix {
    CMatrix::from_rows(vec![vec![ZERO, t], vec![t.conj(), ZERO]]).expect("finite entries")
}

fn two_point_grading() -> CMatrix {
    CMatrix::real_diag(&[1.0, -1.0])
}

/// Two-point space: `C²` acting on `C²`, grading `diag(1,-1)` and Dirac
/// `[[0,t],[t̄,0]]`; no real structure.
pub fn two_point(t: C64) -> Result<FiniteTriple, TripleError> {
    FiniteTriple::new(
        2,
        vec![1, 1],
        diagonal_rep(&[0, 1], 2),
        Some(two_point_dirac(t)),
        Some(two_point_grading()),
        None,
        Tolerance::default(),
    )
}

/// Two-point space with a real structure for even KO dimension `ko`.
///
/// KO 0 uses `J = C`, KO 2 uses `[[0,1],[-1,0]] C`, KO 6 uses the swap.
/// KO 4 declares the KO-4 signs on `J = C`; no unitary realises them on
/// one-dimensional grading eigenspaces, so that triple fails its axioms.
pub fn two_point_real(t: C64, ko: u8) -> Result<FiniteTriple, TripleError> {
    let unitary = match ko {
        0 | 4 => CMatrix::identity(2),
        2 => CMatrix::from_real_rows(&[&[0.0, 1.0], &[-1.0, 0.0]]),
        6 => CMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]),
        _ => {
            return Err(TripleError::DimensionMismatch {
                what: "KO dimension".into(),
                expected: "0, 2, 4 or 6".into(),
                found: ko.to_string(),
            })
        }
    };
    FiniteTriple::new(
        2,
        vec![1, 1],
        diagonal_rep(&[0, 1], 2),
        Some(two_point_dirac(t)),
        Some(two_point_grading()),
        Some(RealStructure {
            unitary,
            signs: RealStructureSigns::for_ko(ko),
        }),
        Tolerance::default(),
    )
}

/// Electrodynamics triple on `C⁴` with basis `{e_L, e_R, ē_L, ē_R}`:
/// `(a₁, a₂)` acts as `diag(a₁, a₁, a₂, a₂)`, the grading is
/// `diag(1,-1,-1,1)`, `J` swaps particles and antiparticles, and the Dirac
/// operator carries the single parameter `d`.
pub fn electrodynamics(d: C64) -> Result<FiniteTriple, TripleError> {
    FiniteTriple::new(
        4,
        vec![1, 1],
        diagonal_rep(&[0, 0, 1, 1], 2),
        Some(electrodynamics_dirac(d)),
        Some(CMatrix::real_diag(&[1.0, -1.0, -1.0, 1.0])),
        Some(RealStructure {
            unitary: permutation(&[2, 3, 0, 1]),
            signs: RealStructureSigns::for_ko(6),
        }),
        Tolerance::default(),
    )
}

pub fn electrodynamics_dirac(d: C64) -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    m[(0, 1)] = d;
    m[(1, 0)] = d.conj();
    m[(2, 3)] = d.conj();
    m[(3, 2)] = d;
    m
}

/// `C` acting by scalars on `C²` with grading `diag(1,-1)` and `J = C` in
/// KO dimension 0.
pub fn scalar_doublet() -> FiniteTriple {
    FiniteTriple::new(
        2,
        vec![1],
        vec![CMatrix::identity(2)],
        None,
        Some(two_point_grading()),
        Some(RealStructure {
            unitary: CMatrix::identity(2),
            signs: RealStructureSigns::for_ko(0),
        }),
        Tolerance::default(),
    )
    .expect("consistent shapes")
}

/// Two-point space doubled as a bimodule: `H = C² ⊗ C²` with `a` acting on
/// the left factor, `J(x ⊗ y) = ȳ ⊗ x̄`, `D = D₀⊗1 + 1⊗D̄₀` and grading
/// `γ₀⊗γ₀`. It keeps a nonzero Dirac operator under the real structure
/// (KO dimension 0), so its one-forms are nontrivial.
pub fn bimodule_two_point(t: C64) -> Result<FiniteTriple, TripleError> {
    let d0 = two_point_dirac(t);
    let g0 = two_point_grading();
    let id = CMatrix::identity(2);
    let kron = |a: &CMatrix, b: &CMatrix| crate::linalg::kron(a, b).expect("small");
    let dirac = &kron(&d0, &id) + &kron(&id, &d0.conj());
    FiniteTriple::new(
        4,
        vec![1, 1],
        diagonal_rep(&[0, 0, 1, 1], 2),
        Some(dirac),
        Some(kron(&g0, &g0)),
        Some(RealStructure {
            unitary: permutation(&[0, 2, 1, 3]),
            signs: RealStructureSigns::for_ko(0),
        }),
        Tolerance::default(),
    )
}

/// Permutation matrix sending basis vector `i` to `image[i]`.
pub fn permutation(image: &[usize]) -> CMatrix {
    let n = image.len();
    let mut m = CMatrix::zeros(n, n);
    for (i, &j) in image.iter().enumerate() {
        m[(j, i)] = ONE;
    }
    m
}

/// Random commutative triple in KO dimension 0, 2 or 6 together with the
/// point assignment of each Hilbert-space coordinate and the pairing `σ`
/// used by the real structure.
#[derive(Debug, Clone)]
pub struct RandomDiagonal {
    pub triple: FiniteTriple,
    pub points: Vec<usize>,
    pub pairing: Vec<usize>,
    pub n_points: usize,
}

/// Builds `C^k` on `C^n` with a diagonal representation, a real structure
/// `J e_i = ±e_σ(i)` from a random involution `σ` and a compatible diagonal
/// grading. The Dirac operator is zero.
pub fn random_diagonal<R: Rng + ?Sized>(rng: &mut R, ko: u8) -> RandomDiagonal {
    assert!(matches!(ko, 0 | 2 | 6), "KO dimension must be 0, 2 or 6");
    let pairs = rng.random_range(1..=3usize);
    // KO 0 may also use fixed points of σ; KO 2 and 6 need a fixed-point
    // free involution because J flips the grading.
    let fixed = if ko == 0 { rng.random_range(0..=2usize) } else { 0 };
    let n = 2 * pairs + fixed;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut pairing = vec![0; n];
    for p in 0..pairs {
        let (a, b) = (order[2 * p], order[2 * p + 1]);
        pairing[a] = b;
        pairing[b] = a;
    }
    for &f in &order[2 * pairs..] {
        pairing[f] = f;
    }
    let k = rng.random_range(1..=n.min(4));
    // Every point is hit at least once.
    let mut points: Vec<usize> = (0..n).map(|i| if i < k { i } else { rng.random_range(0..k) }).collect();
    points.shuffle(rng);

    let mut gamma = vec![0.0; n];
    for &i in &order {
        if gamma[i] != 0.0 {
            continue;
        }
        let s = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        gamma[i] = s;
        let j = pairing[i];
        if j != i {
            gamma[j] = if ko == 0 { s } else { -s };
        }
    }

    let mut unitary = CMatrix::zeros(n, n);
    for i in 0..n {
        let j = pairing[i];
        // For KO 2 the pair (i, j), i < j, maps as e_i ↦ e_j, e_j ↦ -e_i.
        let sign = if ko == 2 && i > j { -1.0 } else { 1.0 };
        unitary[(j, i)] = C64::new(sign, 0.0);
    }
    let triple = FiniteTriple::new(
        n,
        vec![1; k],
        diagonal_rep(&points, k),
        None,
        Some(CMatrix::real_diag(&gamma)),
        Some(RealStructure {
            unitary,
            signs: RealStructureSigns::for_ko(ko),
        }),
        Tolerance::default(),
    )
    .expect("consistent shapes");
    RandomDiagonal {
        triple,
        points,
        pairing,
        n_points: k,
    }
}
