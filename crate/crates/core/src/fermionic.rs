//! Fermionic action of the electrodynamics product triple on a truncated
//! flat-torus Fourier space, as an antisymmetric Grassmann quadratic.

use std::collections::HashMap;
use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::clifford::{build_gammas, charge_conjugation, ChargeConjugation, CliffordError, GammaSet};
use crate::finite_triple::builders::electrodynamics;
use crate::finite_triple::FiniteTriple;
use crate::linalg::{kron, CMatrix, C64, I, ONE, ZERO};

pub type Mode = [i64; 4];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FermionError {
    #[error("invalid mode set: {0}")]
    BadModes(String),
    #[error("gauge mode {q:?} couples no pair of fermion modes in the truncation")]
    GaugeOutOfRange { q: Mode },
    #[error("invalid gauge field: {0}")]
    BadGauge(String),
    #[error("invalid mass {0}")]
    BadMass(f64),
    #[error(transparent)]
    Clifford(#[from] CliffordError),
    #[error("finite triple: {0}")]
    Finite(String),
}

/// Truncated momentum space. Fermion index = `mode·16 + spin·4 + finite`.
#[derive(Debug, Clone, Serialize)]
pub struct ModeSpace {
    modes: Vec<Mode>,
    side_length: f64,
    #[serde(skip)]
    lookup: HashMap<Mode, usize>,
}

pub const SPINOR_DIM: usize = 4;
pub const FINITE_DIM: usize = 4;

fn neg(m: Mode) -> Mode {
    m.map(|x| -x)
}

impl ModeSpace {
    /// Modes must be distinct and closed under `κ ↦ −κ`, since the real
    /// structure conjugates `e^{iκx}` to `e^{−iκx}`.
    pub fn new(modes: Vec<Mode>, side_length: f64) -> Result<Self, FermionError> {
        if modes.is_empty() {
            return Err(FermionError::BadModes("no modes".into()));
        }
        if !(side_length.is_finite() && side_length > 0.0) {
            return Err(FermionError::BadModes(format!("side length must be positive, got {side_length}")));
        }
        let mut lookup = HashMap::new();
        for (i, m) in modes.iter().enumerate() {
            if lookup.insert(*m, i).is_some() {
                return Err(FermionError::BadModes(format!("duplicate mode {m:?}")));
            }
        }
        if let Some(m) = modes.iter().find(|m| !lookup.contains_key(&neg(**m))) {
            return Err(FermionError::BadModes(format!("mode {m:?} present without its negative")));
        }
        Ok(Self {
            modes,
            side_length,
            lookup,
        })
    }

    /// `count` modes: the zero mode when `count` is odd, then `±v` pairs in
    /// order of increasing length, so `±e₁, ±e₂, ±e₃, ±e₄, ±(e₁+e₂), …`.
    pub fn with_count(count: usize, side_length: f64) -> Result<Self, FermionError> {
        if count == 0 {
            return Err(FermionError::BadModes("mode count must be positive".into()));
        }
        let mut modes = Vec::with_capacity(count);
        if count % 2 == 1 {
            modes.push([0; 4]);
        }
        let pairs = count / 2;
        let mut r = 1i64;
        // A cube of radius r holds at least 4r representatives of length ≤ r.
        while 4 * (r as usize) < pairs {
            r += 1;
        }
        let side = 2 * r + 1;
        let mut reps: Vec<Mode> = (0..side.pow(4))
            .map(|k| std::array::from_fn(|i| (k / side.pow(i as u32)) % side - r))
            .filter(|v: &Mode| v.iter().find(|x| **x != 0).is_some_and(|x| *x > 0))
            .collect();
        reps.sort_by_key(|v| (v.iter().map(|x| x * x).sum::<i64>(), std::cmp::Reverse(*v)));
        for v in reps.into_iter().take(pairs) {
            modes.push(v);
            modes.push(neg(v));
        }
        Self::new(modes, side_length)
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn side_length(&self) -> f64 {
        self.side_length
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn dim(&self) -> usize {
        16 * self.modes.len()
    }

    pub fn index_of(&self, m: &Mode) -> Option<usize> {
        self.lookup.get(m).copied()
    }

    /// Physical momentum `2πκ/L`.
    pub fn momentum(&self, i: usize) -> [f64; 4] {
        self.modes[i].map(|x| 2.0 * PI * x as f64 / self.side_length)
    }

    /// Permutation matrix sending mode `κ` to `−κ`.
    pub fn negation(&self) -> CMatrix {
        let mut p = CMatrix::zeros(self.len(), self.len());
        for (i, m) in self.modes.iter().enumerate() {
            p[(self.lookup[&neg(*m)], i)] = ONE;
        }
        p
    }

    /// All differences `κ − κ'` between modes in the set.
    pub fn differences(&self) -> Vec<Mode> {
        let mut out: Vec<Mode> = Vec::new();
        for a in &self.modes {
            for b in &self.modes {
                let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]];
                if !out.contains(&d) {
                    out.push(d);
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum SlotKind {
    ChiL,
    ChiR,
    PsiR,
    PsiL,
}

impl SlotKind {
    pub const ALL: [SlotKind; 4] = [SlotKind::ChiL, SlotKind::ChiR, SlotKind::PsiR, SlotKind::PsiL];

    /// Finite basis order is `e_L, e_R, ē_L, ē_R`.
    pub fn finite_index(self) -> usize {
        match self {
            SlotKind::ChiL => 0,
            SlotKind::ChiR => 1,
            SlotKind::PsiR => 2,
            SlotKind::PsiL => 3,
        }
    }

    pub fn spins(self) -> [usize; 2] {
        match self {
            SlotKind::ChiL | SlotKind::PsiL => [0, 1],
            SlotKind::ChiR | SlotKind::PsiR => [2, 3],
        }
    }

    pub fn is_chi(self) -> bool {
        matches!(self, SlotKind::ChiL | SlotKind::ChiR)
    }

    pub fn position(self) -> usize {
        Self::ALL.iter().position(|k| *k == self).expect("listed")
    }

    pub fn label(self) -> &'static str {
        match self {
            SlotKind::ChiL => "chi_L",
            SlotKind::ChiR => "chi_R",
            SlotKind::PsiR => "psi_R",
            SlotKind::PsiL => "psi_L",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HPlusElement {
    pub mode: usize,
    pub spin: usize,
    pub kind: SlotKind,
}

impl HPlusElement {
    pub fn index(&self) -> usize {
        self.mode * 16 + self.spin * 4 + self.kind.finite_index()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HPlusBasis {
    pub elements: Vec<HPlusElement>,
    /// `max ‖(γ₅⊗γ_F)v − v‖` over the basis.
    pub projector_residual: f64,
}

impl HPlusBasis {
    pub fn dim(&self) -> usize {
        self.elements.len()
    }

    /// Columns are the basis vectors inside the full space.
    pub fn embedding(&self, total: usize) -> CMatrix {
        let mut e = CMatrix::zeros(total, self.dim());
        for (k, el) in self.elements.iter().enumerate() {
            e[(el.index(), k)] = ONE;
        }
        e
    }
}

/// Gauge potential `Y_μ(x)`, real-valued.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum GaugeField {
    None,
    Constant([f64; 4]),
    /// `Σ_q (a_q e^{iqx} + ā_q e^{−iqx})`, `q ≠ 0`.
    Modes(Vec<(Mode, [C64; 4])>),
}

impl GaugeField {
    /// Fourier components `(q, Ŷ(q))`, with conjugate partners made explicit.
    pub fn components(&self) -> Result<Vec<(Mode, [C64; 4])>, FermionError> {
        match self {
            GaugeField::None => Ok(Vec::new()),
            GaugeField::Constant(y) => {
                if y.iter().any(|v| !v.is_finite()) {
                    return Err(FermionError::BadGauge("non-finite component".into()));
                }
                Ok(vec![([0; 4], y.map(|v| C64::new(v, 0.0)))])
            }
            GaugeField::Modes(list) => {
                let mut out: Vec<(Mode, [C64; 4])> = Vec::new();
                for (q, a) in list {
                    if *q == [0; 4] {
                        return Err(FermionError::BadGauge("zero momentum belongs in a constant field".into()));
                    }
                    if a.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
                        return Err(FermionError::BadGauge("non-finite amplitude".into()));
                    }
                    for (qq, aa) in [(*q, *a), (neg(*q), a.map(|z| z.conj()))] {
                        match out.iter_mut().find(|(m, _)| *m == qq) {
                            Some((_, acc)) => {
                                for (x, y) in acc.iter_mut().zip(aa) {
                                    *x += y;
                                }
                            }
                            None => out.push((qq, aa)),
                        }
                    }
                }
                Ok(out)
            }
        }
    }

    /// Constant potentials are unchanged by a constant gauge transformation.
    pub fn is_zero(&self) -> bool {
        match self {
            GaugeField::None => true,
            GaugeField::Constant(y) => y.iter().all(|v| *v == 0.0),
            GaugeField::Modes(list) => list.is_empty(),
        }
    }
}

/// Multiplication by `Y_μ` on the truncated modes, one `K×K` matrix per
/// direction. Every gauge momentum must connect at least one pair of modes;
/// couplings that would leave the truncation are dropped.
pub fn gauge_mode_operators(ms: &ModeSpace, gauge: &GaugeField) -> Result<[CMatrix; 4], FermionError> {
    let comps = gauge.components()?;
    let diffs = ms.differences();
    let mut ops: [CMatrix; 4] = std::array::from_fn(|_| CMatrix::zeros(ms.len(), ms.len()));
    for (q, amp) in comps {
        if !diffs.contains(&q) {
            return Err(FermionError::GaugeOutOfRange { q });
        }
        for (i, n) in ms.modes().iter().enumerate() {
            let target = [n[0] + q[0], n[1] + q[1], n[2] + q[2], n[3] + q[3]];
            if let Some(j) = ms.index_of(&target) {
                for mu in 0..4 {
                    ops[mu][(j, i)] += amp[mu];
                }
            }
        }
    }
    Ok(ops)
}

/// Product geometry data shared by both sides of the comparison.
#[derive(Debug, Clone)]
pub struct ProductSetup {
    pub ms: ModeSpace,
    pub gammas: GammaSet,
    pub jm: ChargeConjugation,
    pub finite: FiniteTriple,
    pub basis: HPlusBasis,
    /// Unitary part of `J = (κ ↦ −κ) ⊗ J_M ⊗ J_F`.
    pub j_unitary: CMatrix,
    pub grading: CMatrix,
}

impl ProductSetup {
    /// `d = −im` in the finite Dirac operator.
    pub fn new(ms: ModeSpace, mass: f64) -> Result<Self, FermionError> {
        if !mass.is_finite() {
            return Err(FermionError::BadMass(mass));
        }
        let gammas = build_gammas()?;
        let jm = charge_conjugation(&gammas)?;
        let finite = electrodynamics(C64::new(0.0, -mass)).map_err(|e| FermionError::Finite(e.to_string()))?;
        let u_f = finite.real().expect("has real structure").unitary.clone();
        let gamma_f = finite.grading().expect("graded").clone();
        let j_unitary = kron(&ms.negation(), &kron(&jm.unitary, &u_f).expect("small")).expect("small");
        let grading = kron(&CMatrix::identity(ms.len()), &kron(&gammas.gamma5, &gamma_f).expect("small")).expect("small");
        let basis = build_hplus(&ms, &grading);
        Ok(Self {
            ms,
            gammas,
            jm,
            finite,
            basis,
            j_unitary,
            grading,
        })
    }

    /// `J v = U v̄`.
    pub fn apply_j(&self, v: &[C64]) -> Vec<C64> {
        let conj: Vec<C64> = v.iter().map(|z| z.conj()).collect();
        self.j_unitary.apply(&conj)
    }

    /// `D_A = D̸ ⊗ 1 + γ^μ ⊗ B_μ + γ₅ ⊗ D_F` with `B_μ = Y_μ ⊗ diag(1,1,−1,−1)`
    /// and `D̸ = γ^μ k_μ` on mode `k`.
    pub fn dirac_operator(&self, gauge: &GaugeField) -> Result<CMatrix, FermionError> {
        let k = self.ms.len();
        let id4 = CMatrix::identity(4);
        let charge = CMatrix::real_diag(&[1.0, 1.0, -1.0, -1.0]);
        let mut d = kron(&CMatrix::identity(k), &kron(&self.gammas.gamma5, &self.finite.dirac_or_zero()).expect("small")).expect("small");
        let y = gauge_mode_operators(&self.ms, gauge)?;
        for mu in 0..4 {
            let kin = CMatrix::real_diag(&(0..k).map(|i| self.ms.momentum(i)[mu]).collect::<Vec<_>>());
            let g_mu = &self.gammas.gammas[mu];
            d = &d + &kron(&kin, &kron(g_mu, &id4).expect("small")).expect("small");
            if y[mu].max_abs() > 0.0 {
                d = &d + &kron(&y[mu], &kron(g_mu, &charge).expect("small")).expect("small");
            }
        }
        Ok(d)
    }

    /// `max ‖Γ(Jv) + Jv‖` over `H⁺`: zero when `J` maps `H⁺` into `H⁻`.
    pub fn j_parity_residual(&self) -> f64 {
        self.basis_residual(|v| self.apply_j(v))
    }

    /// `max ‖Γ(Dv) + Dv‖` over `H⁺`.
    pub fn operator_parity_residual(&self, d: &CMatrix) -> f64 {
        self.basis_residual(|v| d.apply(v))
    }

    fn basis_residual(&self, f: impl Fn(&[C64]) -> Vec<C64>) -> f64 {
        let n = self.ms.dim();
        self.basis
            .elements
            .iter()
            .map(|el| {
                let mut v = vec![ZERO; n];
                v[el.index()] = ONE;
                let w = f(&v);
                let gw = self.grading.apply(&w);
                gw.iter().zip(&w).map(|(a, b)| (a + b).norm_sqr()).sum::<f64>().sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// Finite index of `J` applied to each slot type, read off from `J_F`.
    pub fn j_slot_images(&self) -> Vec<(SlotKind, usize)> {
        let u_f = &self.finite.real().expect("has real structure").unitary;
        SlotKind::ALL
            .iter()
            .map(|k| {
                let col = u_f.column(k.finite_index());
                let target = col.iter().position(|z| z.norm() > 0.5).expect("permutation");
                (*k, target)
            })
            .collect()
    }
}

/// `+1` eigenspace of `γ₅ ⊗ γ_F`, one element per (mode, Weyl component, slot).
pub fn build_hplus(ms: &ModeSpace, grading: &CMatrix) -> HPlusBasis {
    let mut elements = Vec::with_capacity(8 * ms.len());
    for mode in 0..ms.len() {
        for kind in SlotKind::ALL {
            for spin in kind.spins() {
                elements.push(HPlusElement { mode, spin, kind });
            }
        }
    }
    let residual = elements
        .iter()
        .map(|el| {
            let i = el.index();
            let col = grading.column(i);
            col.iter()
                .enumerate()
                .map(|(r, z)| (z - if r == i { ONE } else { ZERO }).norm_sqr())
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max);
    HPlusBasis {
        elements,
        projector_residual: residual,
    }
}

/// `Σ_{ij} c_ij θ_i θ_j` with `c` antisymmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct GrassmannQuadratic {
    coeff: CMatrix,
}

impl GrassmannQuadratic {
    /// Only the antisymmetric part of `m` survives anticommuting variables.
    pub fn from_bilinear(m: &CMatrix) -> Self {
        Self {
            coeff: (m - &m.transpose()).scale_real(0.5),
        }
    }

    pub fn coeff(&self) -> &CMatrix {
        &self.coeff
    }

    pub fn max_abs(&self) -> f64 {
        self.coeff.max_abs()
    }

    pub fn deviation(&self, other: &Self) -> f64 {
        (&self.coeff - &other.coeff).max_abs()
    }

    /// `cᵀ` under the diagonal change of variables `θ_i ↦ p_i θ_i`.
    pub fn rephased(&self, phases: &[C64]) -> Self {
        let n = self.coeff.rows();
        Self {
            coeff: CMatrix::from_fn(n, n, |i, j| phases[i] * self.coeff[(i, j)] * phases[j]),
        }
    }

    /// Largest |c_ij| for each pair of slot types.
    pub fn block_map(&self, basis: &HPlusBasis) -> [[f64; 4]; 4] {
        let mut out = [[0.0f64; 4]; 4];
        for (i, a) in basis.elements.iter().enumerate() {
            for (j, b) in basis.elements.iter().enumerate() {
                let cell = &mut out[a.kind.position()][b.kind.position()];
                *cell = cell.max(self.coeff[(i, j)].norm());
            }
        }
        out
    }
}

/// `M_ij = ⟨J e_i, D_A e_j⟩` on the `H⁺` basis.
pub fn pairing_matrix(setup: &ProductSetup, d_a: &CMatrix) -> CMatrix {
    let e = setup.basis.embedding(setup.ms.dim());
    &(&e.transpose() * &setup.j_unitary.adjoint()) * &(d_a * &e)
}

/// `½⟨Jξ̃, D_A ξ̃⟩` with `factor = ½`; other factors are for diagnostics.
pub fn fermionic_action_grassmann(setup: &ProductSetup, d_a: &CMatrix, factor: f64) -> GrassmannQuadratic {
    GrassmannQuadratic::from_bilinear(&pairing_matrix(setup, d_a).scale_real(factor))
}

/// `−i⟨J_M χ̃, (γ^μ(∇_μ − iY_μ) − m) ψ̃⟩` with `∇_μ = ik_μ`, assembled on
/// spinor fields and read into the `H⁺` slots: `χ = χ_L + χ_R`, `ψ = ψ_L + ψ_R`.
pub fn decomposed_action(setup: &ProductSetup, gauge: &GaugeField, mass: f64) -> Result<GrassmannQuadratic, FermionError> {
    let ms = &setup.ms;
    let k = ms.len();
    let y = gauge_mode_operators(ms, gauge)?;
    let mut x = CMatrix::identity(4 * k).scale_real(-mass);
    for mu in 0..4 {
        let kin = CMatrix::diag(&(0..k).map(|i| I * ms.momentum(i)[mu]).collect::<Vec<_>>());
        let cov = &kin - &y[mu].scale(I);
        x = &x + &kron(&cov, &setup.gammas.gammas[mu]).expect("small");
    }
    let x = x.scale(-I);
    let jm_full = kron(&ms.negation(), &setup.jm.unitary).expect("small");
    let form = &jm_full.adjoint() * &x;
    let n = setup.basis.dim();
    let mut m = CMatrix::zeros(n, n);
    for (a, ea) in setup.basis.elements.iter().enumerate() {
        if !ea.kind.is_chi() {
            continue;
        }
        for (b, eb) in setup.basis.elements.iter().enumerate() {
            if eb.kind.is_chi() {
                continue;
            }
            m[(a, b)] = form[(ea.mode * 4 + ea.spin, eb.mode * 4 + eb.spin)];
        }
    }
    Ok(GrassmannQuadratic::from_bilinear(&m))
}

#[derive(Debug, Clone, Serialize)]
pub struct Certification {
    pub modes: usize,
    pub total_dim: usize,
    pub hplus_dim: usize,
    /// `max |c_fermionic − c_decomposed|`.
    pub deviation: f64,
    /// Same with the ½ replaced by 1.
    pub unit_factor_deviation: f64,
    pub max_coeff: f64,
    /// `‖M + Mᵀ‖` on `H⁺`: the pairing is already antisymmetric.
    pub symmetric_part: f64,
    pub projector_residual: f64,
    pub j_parity_residual: f64,
    pub operator_parity_residual: f64,
    pub self_adjoint_residual: f64,
    /// Invariance of each side under a constant phase `p` on particles and `p̄` on antiparticles.
    pub gauge_invariance: [f64; 2],
    pub block_map: [[f64; 4]; 4],
}

/// Fermionic side against the decomposed Lagrangian on the same basis.
pub fn certify_decomposition(ms: ModeSpace, gauge: &GaugeField, mass: f64) -> Result<Certification, FermionError> {
    let setup = ProductSetup::new(ms, mass)?;
    let d_a = setup.dirac_operator(gauge)?;
    let m = pairing_matrix(&setup, &d_a);
    let half = GrassmannQuadratic::from_bilinear(&m.scale_real(0.5));
    let unit = GrassmannQuadratic::from_bilinear(&m);
    let dec = decomposed_action(&setup, gauge, mass)?;
    let p = C64::from_polar(1.0, 0.731);
    let phases: Vec<C64> = setup
        .basis
        .elements
        .iter()
        .map(|el| if el.kind.is_chi() { p } else { p.conj() })
        .collect();
    Ok(Certification {
        modes: setup.ms.len(),
        total_dim: setup.ms.dim(),
        hplus_dim: setup.basis.dim(),
        deviation: half.deviation(&dec),
        unit_factor_deviation: unit.deviation(&dec),
        max_coeff: half.max_abs(),
        symmetric_part: (&m + &m.transpose()).max_abs(),
        projector_residual: setup.basis.projector_residual,
        j_parity_residual: setup.j_parity_residual(),
        operator_parity_residual: setup.operator_parity_residual(&d_a),
        self_adjoint_residual: (&d_a - &d_a.adjoint()).max_abs(),
        gauge_invariance: [half.rephased(&phases).deviation(&half), dec.rephased(&phases).deviation(&dec)],
        block_map: half.block_map(&setup.basis),
    })
}
