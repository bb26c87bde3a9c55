//! Pointwise heat-kernel coefficients of the fluctuated electrodynamics
//! Dirac operator, the closed-form Lagrangian they should reproduce, and an
//! exact flat-torus heat trace.

pub mod curvature;
pub mod heat;

use std::f64::consts::PI;

use rand::Rng;
use serde::Serialize;

pub use curvature::{PointGeometry, Riemann};

use crate::clifford::GammaSet;
use crate::linalg::{kron, CMatrix, C64, I};

/// Finite-part charge pattern: `F_{μν} = 𝓕_{μν} · diag(1,1,-1,-1)`.
pub const CHARGE_PATTERN: [f64; 4] = [1.0, 1.0, -1.0, -1.0];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelPoint {
    /// Finite Dirac parameter.
    pub d: C64,
    /// Field strength `𝓕_{μν}` of the gauge field, antisymmetric.
    pub field: [[f64; 4]; 4],
}

impl ModelPoint {
    pub fn vacuum() -> Self {
        Self {
            d: C64::new(0.0, 0.0),
            field: [[0.0; 4]; 4],
        }
    }

    /// Builds the field from its six upper components `𝓕₁₂, 𝓕₁₃, 𝓕₁₄,
    /// 𝓕₂₃, 𝓕₂₄, 𝓕₃₄`, so antisymmetry holds exactly.
    pub fn new(d: C64, upper: [f64; 6]) -> Self {
        let mut field = [[0.0; 4]; 4];
        for (k, (m, n)) in upper_pairs().enumerate() {
            field[m][n] = upper[k];
            field[n][m] = -upper[k];
        }
        Self { d, field }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let r = rng.random_range(0.0..=2.0);
        let phase = rng.random_range(0.0..std::f64::consts::TAU);
        let upper = std::array::from_fn(|_| rng.random_range(-2.0..=2.0));
        Self::new(C64::from_polar(r, phase), upper)
    }

    /// `𝓕_{μν}𝓕^{μν}` summed over all ordered pairs.
    pub fn field_sq(&self) -> f64 {
        self.field.iter().flatten().map(|x| x * x).sum()
    }

    /// `F_{μν}` as a 4×4 matrix on the finite space.
    pub fn finite_field(&self, mu: usize, nu: usize) -> CMatrix {
        let f = self.field[mu][nu];
        CMatrix::real_diag(&CHARGE_PATTERN.map(|c| c * f))
    }
}

pub fn upper_pairs() -> impl Iterator<Item = (usize, usize)> {
    (0..4).flat_map(|m| ((m + 1)..4).map(move |n| (m, n)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub f0: f64,
    pub f2: f64,
    pub f4: f64,
    pub lambda: f64,
}

impl Moments {
    /// `f(v) = exp(−v²)`: `f(0) = 1`, `f₂ = f₄ = 1/2`.
    pub fn gaussian(lambda: f64) -> Self {
        Self {
            f0: 1.0,
            f2: 0.5,
            f4: 0.5,
            lambda,
        }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        // Uniform on (0, 10].
        let mut draw = || 10.0 * (1.0 - rng.random::<f64>());
        Self {
            f0: draw(),
            f2: draw(),
            f4: draw(),
            lambda: draw(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EndomorphismData {
    pub q: CMatrix,
    /// `Ω_{μν}` for `μ < ν`, in [`upper_pairs`] order.
    pub omega: Vec<CMatrix>,
}

impl EndomorphismData {
    pub fn fiber_dim(&self) -> usize {
        self.q.rows()
    }

    /// `Σ_{μ,ν} Tr(Ω_{μν}Ω^{μν}) = 2 Σ_{μ<ν} Tr(Ω_{μν}²)`.
    pub fn omega_sq_trace(&self) -> f64 {
        2.0 * self.omega.iter().map(|w| (w * w).trace().re).sum::<f64>()
    }
}

/// `Ω^S_{μν} = ¼ R_{μνab} γ^aγ^b`.
pub fn spin_curvature(geom: &PointGeometry, g: &GammaSet, mu: usize, nu: usize) -> CMatrix {
    let mut out = CMatrix::zeros(4, 4);
    for a in 0..4 {
        for b in 0..4 {
            let r = geom.riemann.get(mu, nu, a, b);
            if r != 0.0 {
                out = &out + &g.pair(a, b).scale_real(0.25 * r);
            }
        }
    }
    out
}

/// `Q = −¼ s ⊗ 1 − 1 ⊗ D_F² + ½ i Σ_{μν} γ^μγ^ν ⊗ F_{μν}` on the 16-dimensional fiber.
pub fn assemble_q(geom: &PointGeometry, model: &ModelPoint, g: &GammaSet) -> CMatrix {
    let id16 = CMatrix::identity(16);
    let mut q = id16.scale_real(-0.25 * geom.s - model.d.norm_sqr());
    for mu in 0..4 {
        for nu in 0..4 {
            if model.field[mu][nu] != 0.0 {
                let term = kron(&g.pair(mu, nu), &model.finite_field(mu, nu)).expect("16x16");
                q = &q + &term.scale(I * 0.5);
            }
        }
    }
    q
}

/// `Ω^E_{μν} = Ω^S_{μν} ⊗ 1 + i 1 ⊗ F_{μν}` for `μ < ν`.
pub fn assemble_omega(geom: &PointGeometry, model: &ModelPoint, g: &GammaSet) -> Vec<CMatrix> {
    let id4 = CMatrix::identity(4);
    upper_pairs()
        .map(|(mu, nu)| {
            let spin = kron(&spin_curvature(geom, g, mu, nu), &id4).expect("16x16");
            let gauge = kron(&id4, &model.finite_field(mu, nu)).expect("16x16").scale(I);
            &spin + &gauge
        })
        .collect()
}

pub fn assemble(geom: &PointGeometry, model: &ModelPoint, g: &GammaSet) -> EndomorphismData {
    EndomorphismData {
        q: assemble_q(geom, model, g),
        omega: assemble_omega(geom, model, g),
    }
}

/// Spinor fiber of the bare manifold: `Q = −s/4`, `Ω = Ω^S`.
pub fn canonical_endomorphisms(geom: &PointGeometry, g: &GammaSet) -> EndomorphismData {
    EndomorphismData {
        q: CMatrix::identity(4).scale_real(-0.25 * geom.s),
        omega: upper_pairs().map(|(m, n)| spin_curvature(geom, g, m, n)).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeeleyCoefficients {
    pub a0: f64,
    pub a2: f64,
    pub a4: f64,
}

#[derive(Debug, Clone, Default)]
pub struct GilkeyOptions {
    /// Adds `−12 Δs` inside the `a₄` trace.
    pub include_laplacian_s: bool,
    /// Adds `−60 ΔQ` inside the `a₄` trace when given.
    pub laplacian_q: Option<CMatrix>,
}

/// Densities `a₀, a₂, a₄` in four dimensions, `(4π)⁻²` included.
pub fn gilkey_coefficients(e: &EndomorphismData, geom: &PointGeometry, opts: &GilkeyOptions) -> SeeleyCoefficients {
    let n = e.fiber_dim() as f64;
    let pref = 1.0 / (16.0 * PI * PI);
    let s = geom.s;
    let tr_q = e.q.trace().re;
    let tr_q2 = (&e.q * &e.q).trace().re;
    let mut inner = n * (5.0 * s * s - 2.0 * geom.ricci_sq() + 2.0 * geom.riemann_sq())
        + 60.0 * s * tr_q
        + 180.0 * tr_q2
        + 30.0 * e.omega_sq_trace();
    if opts.include_laplacian_s {
        inner -= 12.0 * n * geom.laplacian_s;
    }
    if let Some(dq) = &opts.laplacian_q {
        inner -= 60.0 * dq.trace().re;
    }
    SeeleyCoefficients {
        a0: pref * n,
        a2: pref * (n * s / 6.0 + tr_q),
        a4: pref * inner / 360.0,
    }
}

/// `2f₄Λ⁴a₀ + 2f₂Λ²a₂ + f(0)a₄`.
pub fn expansion_value(c: &SeeleyCoefficients, m: &Moments) -> f64 {
    let l2 = m.lambda * m.lambda;
    2.0 * m.f4 * l2 * l2 * c.a0 + 2.0 * m.f2 * l2 * c.a2 + m.f0 * c.a4
}

fn expansion_terms(c: &SeeleyCoefficients, m: &Moments) -> [f64; 3] {
    let l2 = m.lambda * m.lambda;
    [2.0 * m.f4 * l2 * l2 * c.a0, 2.0 * m.f2 * l2 * c.a2, m.f0 * c.a4]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LagrangianParts {
    /// Gravitational density of the bare manifold.
    pub gravity: f64,
    /// `(2/3) f(0) 𝓕_{μν}𝓕^{μν}`
    pub gauge: f64,
    /// `−8f₂Λ²|d|² + 2f(0)|d|⁴ + (1/3)f(0)s|d|²`
    pub higgs: f64,
}

impl LagrangianParts {
    /// `4 L_M + L_Y + L_H`
    pub fn total(&self) -> f64 {
        4.0 * self.gravity + self.gauge + self.higgs
    }
}

/// Gravitational density `2f₄Λ⁴ − (1/6)f₂Λ²s + f(0)(−C²/80 + 11 R*R*/1440)`,
/// optionally with `f(0)Δs/120`.
pub fn gravitational_lagrangian(geom: &PointGeometry, m: &Moments, include_laplacian_s: bool) -> f64 {
    let l2 = m.lambda * m.lambda;
    let mut v = 2.0 * m.f4 * l2 * l2 - m.f2 * l2 * geom.s / 6.0
        + m.f0 * (-geom.weyl_sq() / 80.0 + 11.0 * geom.gauss_bonnet() / 1440.0);
    if include_laplacian_s {
        v += m.f0 * geom.laplacian_s / 120.0;
    }
    v
}

pub fn closed_form_lagrangian_parts(geom: &PointGeometry, model: &ModelPoint, m: &Moments, include_laplacian_s: bool) -> LagrangianParts {
    let d2 = model.d.norm_sqr();
    let l2 = m.lambda * m.lambda;
    LagrangianParts {
        gravity: gravitational_lagrangian(geom, m, include_laplacian_s),
        gauge: 2.0 / 3.0 * m.f0 * model.field_sq(),
        higgs: -8.0 * m.f2 * l2 * d2 + 2.0 * m.f0 * d2 * d2 + m.f0 * geom.s * d2 / 3.0,
    }
}

/// `4 L_M + L_Y + L_H`, pointwise.
pub fn closed_form_lagrangian(geom: &PointGeometry, model: &ModelPoint, m: &Moments) -> f64 {
    closed_form_lagrangian_parts(geom, model, m, false).total()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LagrangianComparison {
    pub expansion: f64,
    /// `L / (4π²)`
    pub lagrangian: f64,
    pub abs_error: f64,
    pub scale: f64,
    pub rel_error: f64,
}

fn compare_values(expansion: f64, lagrangian: f64, terms: &[f64]) -> LagrangianComparison {
    let scale = terms.iter().fold(1.0f64, |acc, t| acc.max(t.abs()));
    let abs_error = (expansion - lagrangian).abs();
    LagrangianComparison {
        expansion,
        lagrangian,
        abs_error,
        scale,
        rel_error: abs_error / scale,
    }
}

/// Spectral side (brute-force traces of the 16×16 endomorphisms) against
/// the closed-form Lagrangian, boundary terms off on both sides.
pub fn compare_lagrangian(geom: &PointGeometry, model: &ModelPoint, m: &Moments, g: &GammaSet) -> LagrangianComparison {
    let e = assemble(geom, model, g);
    let c = gilkey_coefficients(&e, geom, &GilkeyOptions::default());
    let terms = expansion_terms(&c, m);
    let parts = closed_form_lagrangian_parts(geom, model, m, false);
    let norm = 1.0 / (4.0 * PI * PI);
    let mut all = terms.to_vec();
    all.extend([4.0 * parts.gravity * norm, parts.gauge * norm, parts.higgs * norm]);
    compare_values(terms.iter().sum(), parts.total() * norm, &all)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SliceComparison {
    /// `expansion(model) − expansion(vacuum)` against `L_H/(4π²)`.
    pub higgs: LagrangianComparison,
    /// `expansion(model) − expansion(vacuum)` against `L_Y/(4π²)`.
    pub gauge: LagrangianComparison,
}

/// Isolates the Higgs and gauge terms: the `d`-only and `𝓕`-only models are
/// compared after subtracting the vacuum expansion at the same geometry.
pub fn compare_slices(geom: &PointGeometry, model: &ModelPoint, m: &Moments, g: &GammaSet) -> SliceComparison {
    let norm = 1.0 / (4.0 * PI * PI);
    let spectral = |mp: &ModelPoint| {
        let c = gilkey_coefficients(&assemble(geom, mp, g), geom, &GilkeyOptions::default());
        expansion_terms(&c, m)
    };
    let base = spectral(&ModelPoint::vacuum());
    let d_only = ModelPoint {
        d: model.d,
        field: [[0.0; 4]; 4],
    };
    let f_only = ModelPoint {
        d: C64::new(0.0, 0.0),
        field: model.field,
    };
    let slice = |mp: &ModelPoint, target: f64| {
        let t = spectral(mp);
        let diff: f64 = t.iter().zip(&base).map(|(a, b)| a - b).sum();
        let mut all: Vec<f64> = t.iter().chain(&base).copied().collect();
        all.push(target);
        compare_values(diff, target, &all)
    };
    let parts_d = closed_form_lagrangian_parts(geom, &d_only, m, false);
    let parts_f = closed_form_lagrangian_parts(geom, &f_only, m, false);
    SliceComparison {
        higgs: slice(&d_only, parts_d.higgs * norm),
        gauge: slice(&f_only, parts_f.gauge * norm),
    }
}

/// Coefficient of `f(0)Δs` on each side when the boundary term is kept:
/// `(spectral, closed form)`. They differ, which is why the term is excluded.
pub fn laplacian_s_coefficients() -> (f64, f64) {
    // 16-dimensional fiber: a₄ ⊃ (4π)⁻² · 16 · (−12Δs)/360.
    let spectral = -12.0 * 16.0 / (360.0 * 16.0 * PI * PI);
    let closed = 4.0 / 120.0 / (4.0 * PI * PI);
    (spectral, closed)
}
