//! Real even finite spectral triples: data model, axiom battery, KO-dimension
//! lookup, canonical form of the real structure and the admissible Dirac
//! operator solver.

pub mod builders;
pub mod io;

use serde::Serialize;
use thiserror::Error;

use crate::linalg::{self, hermitian_basis, real_null_space, CMatrix, LinalgError, Tolerance, C64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TripleError {
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: String,
        expected: String,
        found: String,
    },
    #[error("rep_basis has {found} elements but algebra_summands {summands:?} require {expected}")]
    BasisCount {
        summands: Vec<usize>,
        expected: usize,
        found: usize,
    },
    #[error("invalid sign {name} = {value}: must be +1 or -1")]
    BadSign { name: &'static str, value: i64 },
    #[error("grading and epsilon_double_prime must be both present or both absent")]
    GradingSignMismatch,
    #[error("missing {0}")]
    Missing(&'static str),
    #[error("malformed triple document: {0}")]
    Parse(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RealStructureSigns {
    pub epsilon: i8,
    pub epsilon_prime: i8,
    pub epsilon_double_prime: Option<i8>,
}

fn check_sign(name: &'static str, value: i64) -> Result<i8, TripleError> {
    match value {
        1 => Ok(1),
        -1 => Ok(-1),
        _ => Err(TripleError::BadSign { name, value }),
    }
}

impl RealStructureSigns {
    pub fn new(epsilon: i64, epsilon_prime: i64, epsilon_double_prime: Option<i64>) -> Result<Self, TripleError> {
        Ok(Self {
            epsilon: check_sign("epsilon", epsilon)?,
            epsilon_prime: check_sign("epsilon_prime", epsilon_prime)?,
            epsilon_double_prime: epsilon_double_prime
                .map(|v| check_sign("epsilon_double_prime", v))
                .transpose()?,
        })
    }

    /// Signs of the table row for KO dimension `n mod 8`.
    pub fn for_ko(n: u8) -> Self {
        let (e, ep, epp) = KO_TABLE[usize::from(n % 8)];
        Self {
            epsilon: e,
            epsilon_prime: ep,
            epsilon_double_prime: epp,
        }
    }
}

const KO_TABLE: [(i8, i8, Option<i8>); 8] = [
    (1, 1, Some(1)),
    (1, -1, None),
    (-1, 1, Some(-1)),
    (-1, 1, None),
    (-1, 1, Some(1)),
    (-1, -1, None),
    (1, 1, Some(-1)),
    (1, 1, None),
];

/// Exact lookup in the KO sign table; `None` when the triple is not a row.
pub fn classify_ko(signs: RealStructureSigns) -> Option<u8> {
    KO_TABLE
        .iter()
        .position(|&(e, ep, epp)| {
            e == signs.epsilon && ep == signs.epsilon_prime && epp == signs.epsilon_double_prime
        })
        .map(|n| n as u8)
}

/// `J v = U · conj(v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealStructure {
    pub unitary: CMatrix,
    pub signs: RealStructureSigns,
}

impl RealStructure {
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let conj: Vec<C64> = v.iter().map(|z| z.conj()).collect();
        self.unitary.apply(&conj)
    }

    /// `J X J⁻¹ = ε · U X̄ Ū`, using `J⁻¹ = εJ` from the declared sign.
    pub fn conjugate(&self, x: &CMatrix) -> CMatrix {
        let u = &self.unitary;
        (&(u * &x.conj()) * &u.conj()).scale_real(f64::from(self.signs.epsilon))
    }

    /// Opposite element `b⁰ = J b* J⁻¹`.
    pub fn opposite(&self, b: &CMatrix) -> CMatrix {
        self.conjugate(&b.adjoint())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteTriple {
    hilbert_dim: usize,
    algebra_summands: Vec<usize>,
    rep_basis: Vec<CMatrix>,
    dirac: Option<CMatrix>,
    grading: Option<CMatrix>,
    real: Option<RealStructure>,
    tol: Tolerance,
}

fn square_of(what: &str, m: &CMatrix, n: usize) -> Result<(), TripleError> {
    if m.shape() != (n, n) {
        return Err(TripleError::DimensionMismatch {
            what: what.to_string(),
            expected: format!("{n}x{n}"),
            found: format!("{}x{}", m.rows(), m.cols()),
        });
    }
    Ok(())
}

impl FiniteTriple {
    /// Structural validation only; axioms are checked by [`verify_axioms`].
    pub fn new(
        hilbert_dim: usize,
        algebra_summands: Vec<usize>,
        rep_basis: Vec<CMatrix>,
        dirac: Option<CMatrix>,
        grading: Option<CMatrix>,
        real: Option<RealStructure>,
        tol: Tolerance,
    ) -> Result<Self, TripleError> {
        let expected: usize = algebra_summands.iter().map(|n| n * n).sum();
        if algebra_summands.is_empty() || algebra_summands.contains(&0) {
            return Err(TripleError::DimensionMismatch {
                what: "algebra_summands".into(),
                expected: "non-empty list of positive sizes".into(),
                found: format!("{algebra_summands:?}"),
            });
        }
        if rep_basis.len() != expected {
            return Err(TripleError::BasisCount {
                summands: algebra_summands,
                expected,
                found: rep_basis.len(),
            });
        }
        let n = hilbert_dim;
        for (k, a) in rep_basis.iter().enumerate() {
            square_of(&format!("rep_basis[{k}]"), a, n)?;
        }
        if let Some(d) = &dirac {
            square_of("dirac", d, n)?;
        }
        if let Some(g) = &grading {
            square_of("grading", g, n)?;
        }
        if let Some(j) = &real {
            square_of("real.unitary", &j.unitary, n)?;
            if grading.is_some() != j.signs.epsilon_double_prime.is_some() {
                return Err(TripleError::GradingSignMismatch);
            }
        }
        Ok(Self {
            hilbert_dim,
            algebra_summands,
            rep_basis,
            dirac,
            grading,
            real,
            tol,
        })
    }

    pub fn hilbert_dim(&self) -> usize {
        self.hilbert_dim
    }

    pub fn algebra_summands(&self) -> &[usize] {
        &self.algebra_summands
    }

    pub fn rep_basis(&self) -> &[CMatrix] {
        &self.rep_basis
    }

    pub fn dirac(&self) -> Option<&CMatrix> {
        self.dirac.as_ref()
    }

    /// The Dirac operator, with an absent one read as zero.
    pub fn dirac_or_zero(&self) -> CMatrix {
        self.dirac
            .clone()
            .unwrap_or_else(|| CMatrix::zeros(self.hilbert_dim, self.hilbert_dim))
    }

    pub fn grading(&self) -> Option<&CMatrix> {
        self.grading.as_ref()
    }

    pub fn real(&self) -> Option<&RealStructure> {
        self.real.as_ref()
    }

    pub fn tol(&self) -> Tolerance {
        self.tol
    }

    pub fn is_commutative(&self) -> bool {
        self.algebra_summands.iter().all(|&n| n == 1)
    }

    pub fn with_dirac(&self, dirac: Option<CMatrix>) -> Result<Self, TripleError> {
        if let Some(d) = &dirac {
            square_of("dirac", d, self.hilbert_dim)?;
        }
        Ok(Self {
            dirac,
            ..self.clone()
        })
    }

    pub fn with_tol(&self, tol: Tolerance) -> Self {
        Self { tol, ..self.clone() }
    }

    /// Conjugates every operator by the unitary `v`; `J` transforms as
    /// `U ↦ V U Vᵀ`.
    pub fn conjugated_by(&self, v: &CMatrix) -> Result<Self, TripleError> {
        square_of("conjugating unitary", v, self.hilbert_dim)?;
        let vs = v.adjoint();
        let ad = |m: &CMatrix| &(v * m) * &vs;
        Ok(Self {
            rep_basis: self.rep_basis.iter().map(ad).collect(),
            dirac: self.dirac.as_ref().map(ad),
            grading: self.grading.as_ref().map(ad),
            real: self.real.as_ref().map(|j| RealStructure {
                unitary: &(v * &j.unitary) * &v.transpose(),
                signs: j.signs,
            }),
            ..self.clone()
        })
    }

    /// `(summand, row, col)` label of each representation basis element;
    /// basis elements are matrix units, summand by summand, row-major.
    pub fn basis_labels(&self) -> Vec<(usize, usize, usize)> {
        let mut labels = Vec::with_capacity(self.rep_basis.len());
        for (k, &n) in self.algebra_summands.iter().enumerate() {
            for r in 0..n {
                for c in 0..n {
                    labels.push((k, r, c));
                }
            }
        }
        labels
    }

    /// Index of the matrix unit `E^{(k)}_{rc}` in `rep_basis`.
    pub fn basis_index(&self, summand: usize, row: usize, col: usize) -> usize {
        let offset: usize = self.algebra_summands[..summand].iter().map(|n| n * n).sum();
        offset + row * self.algebra_summands[summand] + col
    }

    /// Represents the algebra element with complex coordinates `coeffs` in
    /// the matrix-unit basis.
    pub fn represent(&self, coeffs: &[C64]) -> CMatrix {
        assert_eq!(coeffs.len(), self.rep_basis.len());
        let mut out = CMatrix::zeros(self.hilbert_dim, self.hilbert_dim);
        for (a, &w) in self.rep_basis.iter().zip(coeffs) {
            if w != linalg::ZERO {
                out = &out + &a.scale(w);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomCheck {
    pub name: &'static str,
    pub pass: bool,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomReport {
    pub checks: Vec<AxiomCheck>,
    /// Sign-table lookup of the declared signs; `None` if absent or invalid.
    pub ko_dimension: Option<u8>,
}

impl AxiomReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn first_failure(&self) -> Option<&AxiomCheck> {
        self.checks.iter().find(|c| !c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&AxiomCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub const AXIOM_NAMES: [&str; 15] = [
    "rep_homomorphism",
    "rep_star",
    "rep_unital",
    "dirac_self_adjoint",
    "grading_self_adjoint",
    "grading_involution",
    "grading_even_algebra",
    "dirac_odd",
    "real_unitary",
    "real_epsilon",
    "real_epsilon_prime",
    "real_epsilon_double_prime",
    "ko_sign_table",
    "order_zero",
    "order_one",
];

fn max_over<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    it.into_iter().fold(0.0, f64::max)
}

/// Runs every applicable axiom; checks for absent components are omitted.
pub fn verify_axioms(t: &FiniteTriple) -> AxiomReport {
    let eps = t.tol.eps();
    let n = t.hilbert_dim;
    let id = CMatrix::identity(n);
    let mut checks = Vec::new();
    let mut push = |name: &'static str, residual: f64| {
        checks.push(AxiomCheck {
            name,
            pass: residual.is_finite() && residual < eps,
            residual,
        });
    };

    let labels = t.basis_labels();
    let rep = &t.rep_basis;
    // E_ab E_cd = δ_bc E_ad within one summand, zero across summands.
    let hom = max_over(labels.iter().enumerate().flat_map(|(x, &(k1, a, b))| {
        labels.iter().enumerate().map(move |(y, &(k2, c, d))| {
            let prod = &rep[x] * &rep[y];
            let expected = if k1 == k2 && b == c {
                rep[t.basis_index(k1, a, d)].clone()
            } else {
                CMatrix::zeros(n, n)
            };
            (&prod - &expected).frobenius_norm()
        })
    }));
    push("rep_homomorphism", hom);
    let star = max_over(labels.iter().enumerate().map(|(x, &(k, a, b))| {
        (&rep[x].adjoint() - &rep[t.basis_index(k, b, a)]).frobenius_norm()
    }));
    push("rep_star", star);
    let mut unit = CMatrix::zeros(n, n);
    for (x, &(_, a, b)) in labels.iter().enumerate() {
        if a == b {
            unit = &unit + &rep[x];
        }
    }
    push("rep_unital", (&unit - &id).frobenius_norm());

    let d = t.dirac_or_zero();
    push("dirac_self_adjoint", (&d - &d.adjoint()).frobenius_norm());

    if let Some(g) = &t.grading {
        push("grading_self_adjoint", (g - &g.adjoint()).frobenius_norm());
        push("grading_involution", (&(g * g) - &id).frobenius_norm());
        push(
            "grading_even_algebra",
            max_over(rep.iter().map(|a| CMatrix::commutator(g, a).frobenius_norm())),
        );
        push("dirac_odd", CMatrix::anticommutator(&d, g).frobenius_norm());
    }

    if let Some(j) = &t.real {
        let u = &j.unitary;
        let s = &j.signs;
        push("real_unitary", (&(&u.adjoint() * u) - &id).frobenius_norm());
        push(
            "real_epsilon",
            (&(u * &u.conj()) - &id.scale_real(f64::from(s.epsilon))).frobenius_norm(),
        );
        push(
            "real_epsilon_prime",
            (&(u * &d.conj()) - &(&d * u).scale_real(f64::from(s.epsilon_prime))).frobenius_norm(),
        );
        if let (Some(g), Some(epp)) = (&t.grading, s.epsilon_double_prime) {
            push(
                "real_epsilon_double_prime",
                (&(u * &g.conj()) - &(g * u).scale_real(f64::from(epp))).frobenius_norm(),
            );
        }
        push(
            "ko_sign_table",
            if classify_ko(*s).is_some() { 0.0 } else { f64::INFINITY },
        );
        let opposites: Vec<CMatrix> = rep.iter().map(|b| j.opposite(b)).collect();
        push(
            "order_zero",
            max_over(rep.iter().flat_map(|a| {
                opposites
                    .iter()
                    .map(move |b0| CMatrix::commutator(a, b0).frobenius_norm())
            })),
        );
        let da: Vec<CMatrix> = rep.iter().map(|a| CMatrix::commutator(&d, a)).collect();
        push(
            "order_one",
            max_over(da.iter().flat_map(|x| {
                opposites
                    .iter()
                    .map(move |b0| CMatrix::commutator(x, b0).frobenius_norm())
            })),
        );
    }

    AxiomReport {
        checks,
        ko_dimension: t.real.as_ref().and_then(|j| classify_ko(j.signs)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockPattern {
    /// `J = diag(j₊, j₋) C`
    Diagonal,
    /// `J = [[0, j], [±jᵀ, 0]] C`
    OffDiagonal,
}

#[derive(Debug, Clone, Serialize)]
pub struct RealStructureForm {
    pub ko_dimension: u8,
    pub pattern: BlockPattern,
    pub plus_dim: usize,
    pub minus_dim: usize,
    /// `[j₊, j₋]` for the diagonal pattern, `[j]` for the off-diagonal one.
    pub blocks: Vec<CMatrix>,
    /// Norm of the blocks that must vanish.
    pub pattern_residual: f64,
    /// Norm of the symmetry defect (`j∓jᵀ` or the lower block against `±jᵀ`).
    pub symmetry_residual: f64,
    /// Deviation of the blocks from unitarity.
    pub unitarity_residual: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormError {
    #[error("real structure form needs {0}")]
    Missing(&'static str),
    #[error("declared signs {0:?} are not an even row of the KO table")]
    NotEvenKo(RealStructureSigns),
    #[error("grading is not an involution with ±1 eigenvalues (residual {0:e})")]
    BadGrading(f64),
    #[error("no canonical form for KO dimension {ko}: {detail}")]
    ClassificationFailure { ko: u8, detail: String },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Orthonormal eigenbasis of the grading, `+1` eigenvectors first. A grading
/// that is already a ±1 diagonal uses standard basis vectors.
pub fn grading_eigenbasis(g: &CMatrix, tol: Tolerance) -> Result<(CMatrix, usize), FormError> {
    let n = g.rows();
    let diag = g.diagonal();
    if g.is_diagonal(tol.eps())
        && diag
            .iter()
            .all(|z| z.im.abs() < tol.eps() && (z.re.abs() - 1.0).abs() < tol.eps())
    {
        let mut order: Vec<usize> = (0..n).filter(|&i| diag[i].re > 0.0).collect();
        let plus = order.len();
        order.extend((0..n).filter(|&i| diag[i].re < 0.0));
        let w = CMatrix::from_fn(n, n, |r, c| if r == order[c] { linalg::ONE } else { linalg::ZERO });
        return Ok((w, plus));
    }
    let e = linalg::hermitian_eigen(g)?;
    let bad = max_over(e.values.iter().map(|v| (v.abs() - 1.0).abs()));
    if bad > tol.eps().sqrt() {
        return Err(FormError::BadGrading(bad));
    }
    // Eigenvalues ascend, so reverse to put +1 first; fix each column's phase
    // so its largest entry is real positive.
    let cols: Vec<usize> = (0..n).rev().collect();
    let plus = e.values.iter().filter(|&&v| v > 0.0).count();
    let mut w = CMatrix::from_fn(n, n, |r, c| e.vectors[(r, cols[c])]);
    for c in 0..n {
        let col = w.column(c);
        let pivot = col
            .iter()
            .copied()
            .fold(linalg::ZERO, |best, z| if z.norm() > best.norm() + 1e-14 { z } else { best });
        let phase = pivot.conj() / pivot.norm();
        for r in 0..n {
            w[(r, c)] *= phase;
        }
    }
    Ok((w, plus))
}

/// Canonical block form of `J` in the grading eigenbasis, for the case
/// selected by the declared signs.
pub fn real_structure_form(t: &FiniteTriple) -> Result<RealStructureForm, FormError> {
    let g = t.grading.as_ref().ok_or(FormError::Missing("a grading"))?;
    let j = t.real.as_ref().ok_or(FormError::Missing("a real structure"))?;
    let ko = match classify_ko(j.signs) {
        Some(k) if k % 2 == 0 => k,
        _ => return Err(FormError::NotEvenKo(j.signs)),
    };
    let eps = t.tol.eps();
    let (w, p) = grading_eigenbasis(g, t.tol)?;
    let n = t.hilbert_dim;
    let m = n - p;
    // J' = W* J W acts as W* U W̄ followed by conjugation.
    let u = &(&w.adjoint() * &j.unitary) * &w.conj();
    let pp = u.block(0, 0, p, p);
    let pm = u.block(0, p, p, m);
    let mp = u.block(p, 0, m, p);
    let mm = u.block(p, p, m, m);
    let unit_defect = |b: &CMatrix| {
        (&(&b.adjoint() * b) - &CMatrix::identity(b.cols())).frobenius_norm()
            + (&(b * &b.adjoint()) - &CMatrix::identity(b.rows())).frobenius_norm()
    };

    let form = match ko {
        0 | 4 => {
            let sign = if ko == 0 { 1.0 } else { -1.0 };
            let sym = |b: &CMatrix| (b - &b.transpose().scale_real(sign)).frobenius_norm();
            RealStructureForm {
                ko_dimension: ko,
                pattern: BlockPattern::Diagonal,
                plus_dim: p,
                minus_dim: m,
                pattern_residual: (pm.frobenius_norm().powi(2) + mp.frobenius_norm().powi(2)).sqrt(),
                symmetry_residual: sym(&pp).max(sym(&mm)),
                unitarity_residual: unit_defect(&pp).max(unit_defect(&mm)),
                blocks: vec![pp, mm],
            }
        }
        _ => {
            let sign = if ko == 6 { 1.0 } else { -1.0 };
            let unitarity_residual = if p == m { unit_defect(&pm) } else { f64::INFINITY };
            RealStructureForm {
                ko_dimension: ko,
                pattern: BlockPattern::OffDiagonal,
                plus_dim: p,
                minus_dim: m,
                pattern_residual: (pp.frobenius_norm().powi(2) + mm.frobenius_norm().powi(2)).sqrt(),
                symmetry_residual: (&mp - &pm.transpose().scale_real(sign)).frobenius_norm(),
                unitarity_residual,
                blocks: vec![pm],
            }
        }
    };

    let worst = form
        .pattern_residual
        .max(form.symmetry_residual)
        .max(form.unitarity_residual);
    if !(worst < eps) {
        let mut detail = format!(
            "pattern residual {:.3e}, symmetry residual {:.3e}, unitarity residual {:.3e} (eigenspace dimensions {p}, {m})",
            form.pattern_residual, form.symmetry_residual, form.unitarity_residual
        );
        if ko == 4 && (p % 2 == 1 || m % 2 == 1) {
            detail.push_str("; an antisymmetric unitary block needs an even-dimensional eigenspace");
        }
        if (ko == 2 || ko == 6) && p != m {
            detail.push_str("; an off-diagonal unitary needs equal eigenspace dimensions");
        }
        return Err(FormError::ClassificationFailure { ko, detail });
    }
    Ok(form)
}

#[derive(Debug, Clone, Serialize)]
pub struct DiracSpace {
    /// Real basis, orthonormal for `Re tr(A* B)`.
    pub basis: Vec<CMatrix>,
    /// The same elements in [`hermitian_basis`] coordinates.
    pub coords: Vec<Vec<f64>>,
}

impl DiracSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// Real basis of self-adjoint `D` that are odd, satisfy `JD = ε′DJ`, and the
/// order-one condition for every pair of algebra basis elements.
pub fn solve_dirac_space(t: &FiniteTriple) -> Result<DiracSpace, TripleError> {
    let g = t.grading.as_ref().ok_or(TripleError::Missing("grading"))?;
    let j = t.real.as_ref().ok_or(TripleError::Missing("real structure"))?;
    let u = &j.unitary;
    let eps_prime = f64::from(j.signs.epsilon_prime);
    let opposites: Vec<CMatrix> = t.rep_basis.iter().map(|b| j.opposite(b)).collect();

    let odd = |d: &CMatrix| CMatrix::anticommutator(d, g);
    let real_sign = move |d: &CMatrix| &(u * &d.conj()) - &(d * u).scale_real(eps_prime);
    let order_one = |d: &CMatrix| {
        let n = t.hilbert_dim;
        let blocks: Vec<CMatrix> = t
            .rep_basis
            .iter()
            .flat_map(|a| {
                let da = CMatrix::commutator(d, a);
                opposites
                    .iter()
                    .map(move |b0| CMatrix::commutator(&da, b0))
                    .collect::<Vec<_>>()
            })
            .collect();
        // Stack all pairs into one tall matrix.
        let mut stacked = CMatrix::zeros(n * blocks.len(), n);
        for (k, b) in blocks.iter().enumerate() {
            b.write_block(&mut stacked, k * n, 0);
        }
        stacked
    };
    let ns = real_null_space(
        &hermitian_basis(t.hilbert_dim),
        &[&odd, &real_sign, &order_one],
        t.tol,
    );
    Ok(DiracSpace {
        basis: ns.matrices,
        coords: ns.coords,
    })
}
