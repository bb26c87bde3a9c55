//! Pointwise curvature data in an orthonormal frame.

use rand::Rng;
use serde::Serialize;

/// `R_{abcd}` stored densely, index `((a·4 + b)·4 + c)·4 + d`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Riemann(#[serde(with = "serde_arrays")] pub [f64; 256]);

mod serde_arrays {
    use serde::Serializer;

    pub fn serialize<S: Serializer>(v: &[f64; 256], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter())
    }
}

#[inline]
pub fn idx(a: usize, b: usize, c: usize, d: usize) -> usize {
    ((a * 4 + b) * 4 + c) * 4 + d
}

impl Riemann {
    pub fn zero() -> Self {
        Self([0.0; 256])
    }

    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        self.0[idx(a, b, c, d)]
    }

    /// Constant sectional curvature `K`: `R_{abcd} = K(δ_ac δ_bd − δ_ad δ_bc)`.
    pub fn constant_curvature(k: f64) -> Self {
        let d = |x: usize, y: usize| f64::from(u8::from(x == y));
        let mut r = Self::zero();
        for (a, b, c, e) in quads() {
            r.0[idx(a, b, c, e)] = k * (d(a, c) * d(b, e) - d(a, e) * d(b, c));
        }
        r
    }

    /// Projects an arbitrary array onto tensors with the algebraic Riemann
    /// symmetries: antisymmetric pairs, pair exchange, first Bianchi.
    pub fn from_raw(t: &[f64; 256]) -> Self {
        let mut a = [0.0; 256];
        for (p, q, r, s) in quads() {
            a[idx(p, q, r, s)] = t[idx(p, q, r, s)] - t[idx(q, p, r, s)] - t[idx(p, q, s, r)] + t[idx(q, p, s, r)];
        }
        let mut s2 = [0.0; 256];
        for (p, q, r, s) in quads() {
            s2[idx(p, q, r, s)] = 0.25 * (a[idx(p, q, r, s)] + a[idx(r, s, p, q)]);
        }
        // The cyclic sum is totally antisymmetric for such tensors, so
        // removing a third of it enforces Bianchi without breaking the rest.
        let mut out = [0.0; 256];
        for (p, q, r, s) in quads() {
            let cyc = s2[idx(p, q, r, s)] + s2[idx(p, r, s, q)] + s2[idx(p, s, q, r)];
            out[idx(p, q, r, s)] = s2[idx(p, q, r, s)] - cyc / 3.0;
        }
        Self(out)
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut t = [0.0; 256];
        for x in t.iter_mut() {
            *x = rng.random_range(-1.0..=1.0);
        }
        Self::from_raw(&t)
    }

    /// `R_{μν} = Σ_ρ R_{ρμρν}`; positive on spheres.
    pub fn ricci(&self) -> [[f64; 4]; 4] {
        let mut ric = [[0.0; 4]; 4];
        for (m, row) in ric.iter_mut().enumerate() {
            for (n, v) in row.iter_mut().enumerate() {
                *v = (0..4).map(|r| self.get(r, m, r, n)).sum();
            }
        }
        ric
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum()
    }

    /// Largest violation among the algebraic symmetries.
    pub fn symmetry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (a, b, c, d) in quads() {
            let r = self.get(a, b, c, d);
            worst = worst
                .max((r + self.get(b, a, c, d)).abs())
                .max((r + self.get(a, b, d, c)).abs())
                .max((r - self.get(c, d, a, b)).abs())
                .max((r + self.get(a, c, d, b) + self.get(a, d, b, c)).abs());
        }
        worst
    }
}

pub fn quads() -> impl Iterator<Item = (usize, usize, usize, usize)> {
    (0..256).map(|k| (k / 64, (k / 16) % 4, (k / 4) % 4, k % 4))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointGeometry {
    pub s: f64,
    pub ricci: [[f64; 4]; 4],
    pub riemann: Riemann,
    /// Carried for display; excluded from comparisons by default.
    pub laplacian_s: f64,
}

impl PointGeometry {
    pub fn from_riemann(riemann: Riemann, laplacian_s: f64) -> Self {
        let ricci = riemann.ricci();
        let s = (0..4).map(|m| ricci[m][m]).sum();
        Self {
            s,
            ricci,
            riemann,
            laplacian_s,
        }
    }

    pub fn flat() -> Self {
        Self::from_riemann(Riemann::zero(), 0.0)
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let r = Riemann::random(rng);
        let ds = rng.random_range(-1.0..=1.0);
        Self::from_riemann(r, ds)
    }

    pub fn ricci_sq(&self) -> f64 {
        self.ricci.iter().flatten().map(|x| x * x).sum()
    }

    pub fn riemann_sq(&self) -> f64 {
        self.riemann.norm_sq()
    }

    /// `C_{μνρσ}C^{μνρσ} = Riem² − 2 Ric² + s²/3`.
    pub fn weyl_sq(&self) -> f64 {
        self.riemann_sq() - 2.0 * self.ricci_sq() + self.s * self.s / 3.0
    }

    /// `R*R* = Riem² − 4 Ric² + s²`.
    pub fn gauss_bonnet(&self) -> f64 {
        self.riemann_sq() - 4.0 * self.ricci_sq() + self.s * self.s
    }

    /// Largest violation of the stored invariants.
    pub fn consistency_defect(&self) -> f64 {
        let ric = self.riemann.ricci();
        let mut worst = self.riemann.symmetry_defect();
        for m in 0..4 {
            for n in 0..4 {
                worst = worst.max((ric[m][n] - self.ricci[m][n]).abs());
            }
        }
        let trace: f64 = (0..4).map(|m| self.ricci[m][m]).sum();
        worst.max((trace - self.s).abs())
    }
}
