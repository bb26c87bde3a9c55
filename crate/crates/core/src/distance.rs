//! Connes distance between the points of a finite triple over a commutative
//! diagonal algebra.
//!
//! `d(i,j) = sup{|a_i − a_j| : ‖[D,a]‖ ≤ 1}` over real diagonal `a` is
//! computed as `1 / min{‖[D,a]‖ : a_i − a_j = 1}`.

use rand::Rng;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::finite_triple::FiniteTriple;
use crate::linalg::{spectral_norm, top_singular_triplet, CMatrix, LinalgError, Tolerance, C64};
use crate::rng;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistanceError {
    #[error("unsupported triple: {0}")]
    Unsupported(String),
    #[error("point index {index} out of range for {points} points")]
    PointOutOfRange { index: usize, points: usize },
    #[error("optimizer restarts disagree: relative spread {spread:e}")]
    NumericalFailure { spread: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistanceValue {
    Finite(f64),
    Unbounded,
}

impl DistanceValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            Self::Finite(v) => Some(v),
            Self::Unbounded => None,
        }
    }
}

impl Serialize for DistanceValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Self::Finite(v) => s.serialize_f64(*v),
            Self::Unbounded => s.serialize_str("UNBOUNDED"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DistanceResult {
    pub value: DistanceValue,
    /// Real value of the optimal algebra element at each point. For an
    /// unbounded distance, the indicator of the component of the first point,
    /// which commutes with `D`.
    pub certificate: Vec<f64>,
    /// `‖[D,a]‖` for the certificate.
    pub commutator_norm: f64,
    /// Relative spread of the restart optima (0 when no optimization ran).
    pub restart_spread: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub max_iterations: usize,
    /// Stop when the best value improves by less than this over a window.
    pub stall_tolerance: f64,
    pub stall_window: usize,
    /// Accepted relative disagreement between restarts.
    pub agreement: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 10,
            max_iterations: 10_000,
            stall_tolerance: 1e-12,
            stall_window: 200,
            agreement: 1e-4,
            seed: 0,
        }
    }
}

/// Points of a commutative diagonal triple: `points[r]` is the summand acting
/// on coordinate `r`.
fn coordinate_points(t: &FiniteTriple) -> Result<Vec<usize>, DistanceError> {
    if !t.is_commutative() {
        return Err(DistanceError::Unsupported(format!(
            "algebra summands {:?} are not all one-dimensional",
            t.algebra_summands()
        )));
    }
    let eps = t.tol().eps();
    let n = t.hilbert_dim();
    let mut owner = vec![None; n];
    for (k, p) in t.rep_basis().iter().enumerate() {
        if !p.is_diagonal(eps) {
            return Err(DistanceError::Unsupported(format!("representation of point {k} is not diagonal")));
        }
        for (r, z) in p.diagonal().iter().enumerate() {
            if (z - C64::new(1.0, 0.0)).norm() < eps {
                if owner[r].is_some() {
                    return Err(DistanceError::Unsupported(format!("coordinate {r} belongs to two points")));
                }
                owner[r] = Some(k);
            } else if z.norm() >= eps {
                return Err(DistanceError::Unsupported(format!("point {k} is not a 0/1 projector")));
            }
        }
    }
    owner
        .into_iter()
        .enumerate()
        .map(|(r, o)| o.ok_or_else(|| DistanceError::Unsupported(format!("coordinate {r} carries no point"))))
        .collect()
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut root = x;
    while parent[root] != root {
        root = parent[root];
    }
    let mut y = x;
    while parent[y] != root {
        let next = parent[y];
        parent[y] = root;
        y = next;
    }
    root
}

/// Connected components of points linked by nonzero entries of `D`.
fn point_components(d: &CMatrix, owner: &[usize], n_points: usize, eps: f64) -> Vec<usize> {
    let mut parent: Vec<usize> = (0..n_points).collect();
    for r in 0..d.rows() {
        for s in 0..d.cols() {
            if d[(r, s)].norm() > eps {
                let (a, b) = (find(&mut parent, owner[r]), find(&mut parent, owner[s]));
                parent[a] = b;
            }
        }
    }
    (0..n_points).map(|p| find(&mut parent, p)).collect()
}

struct Objective {
    /// `[D, P_k]` for each point.
    commutators: Vec<CMatrix>,
    from: usize,
    /// Every point except `from` (fixed at 1) and `to` (fixed at 0).
    free: Vec<usize>,
}

impl Objective {
    fn full(&self, y: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.commutators.len()];
        x[self.from] = 1.0;
        for (&k, &v) in self.free.iter().zip(y) {
            x[k] = v;
        }
        x
    }

    fn matrix(&self, y: &[f64]) -> CMatrix {
        let x = self.full(y);
        crate::linalg::combine(&self.commutators, &x)
    }

    fn value(&self, y: &[f64]) -> f64 {
        spectral_norm(&self.matrix(y)).unwrap_or(f64::INFINITY)
    }

    fn value_and_subgradient(&self, y: &[f64]) -> (f64, Vec<f64>) {
        let (sigma, u, v) = top_singular_triplet(&self.matrix(y)).expect("finite");
        let g = self
            .free
            .iter()
            .map(|&k| {
                let cv = self.commutators[k].apply(&v);
                u.iter().zip(&cv).map(|(a, b)| a.conj() * b).sum::<C64>().re
            })
            .collect();
        (sigma, g)
    }
}

/// Minimizes `φ(s) = f(y + s·dir)` by bracket expansion and golden section.
fn line_minimize(obj: &Objective, y: &[f64], dir: &[f64], f0: f64) -> (Vec<f64>, f64) {
    let at = |s: f64| -> Vec<f64> { y.iter().zip(dir).map(|(a, b)| a + s * b).collect() };
    let phi = |s: f64| obj.value(&at(s));
    // φ is convex with φ(0) = f0, so once both ends reach f0 the minimum
    // lies between them.
    let mut hi = 1e-3;
    while phi(hi) < f0 && hi < 1e12 {
        hi *= 2.0;
    }
    let mut lo = -1e-3;
    while phi(lo) < f0 && lo > -1e12 {
        lo *= 2.0;
    }
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (phi(c), phi(d));
    for _ in 0..200 {
        if (b - a).abs() < 1e-13 * (1.0 + a.abs() + b.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = phi(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = phi(d);
        }
    }
    let s = 0.5 * (a + b);
    let fs = phi(s);
    if fs < f0 {
        (at(s), fs)
    } else {
        (y.to_vec(), f0)
    }
}

fn subgradient_descent(obj: &Objective, start: Vec<f64>, cfg: &OptimizerConfig) -> (Vec<f64>, f64) {
    let mut y = start;
    let f0 = obj.value(&y);
    let mut best = (y.clone(), f0);
    let mut window_start = f0;
    let step0 = 0.5 * (1.0 + y.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    for it in 0..cfg.max_iterations {
        let (f, g) = obj.value_and_subgradient(&y);
        if f < best.1 {
            best = (y.clone(), f);
        }
        let gn = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if gn < 1e-15 {
            break;
        }
        // Diminishing normalized steps.
        let step = step0 / ((it + 1) as f64).sqrt();
        for (yk, gk) in y.iter_mut().zip(&g) {
            *yk -= step * gk / gn;
        }
        if (it + 1) % cfg.stall_window == 0 {
            if window_start - best.1 < cfg.stall_tolerance {
                break;
            }
            window_start = best.1;
        }
    }
    best
}

/// Golden-section sweeps along coordinates and random directions until a
/// full sweep no longer improves the value.
fn polish<R: Rng>(obj: &Objective, mut y: Vec<f64>, mut f: f64, rng: &mut R) -> (Vec<f64>, f64) {
    let m = y.len();
    for _ in 0..50 {
        let before = f;
        let mut dirs: Vec<Vec<f64>> = (0..m)
            .map(|k| (0..m).map(|i| f64::from(u8::from(i == k))).collect())
            .collect();
        for _ in 0..(2 * m) {
            dirs.push((0..m).map(|_| rng.random_range(-1.0..1.0)).collect());
        }
        for dir in &dirs {
            let (ny, nf) = line_minimize(obj, &y, dir, f);
            y = ny;
            f = nf;
        }
        if before - f < 1e-15 * before.max(1e-300) {
            break;
        }
    }
    (y, f)
}

pub fn connes_distance(t: &FiniteTriple, from: usize, to: usize) -> Result<DistanceResult, DistanceError> {
    connes_distance_with(t, from, to, &OptimizerConfig::default())
}

pub fn connes_distance_with(
    t: &FiniteTriple,
    from: usize,
    to: usize,
    cfg: &OptimizerConfig,
) -> Result<DistanceResult, DistanceError> {
    let owner = coordinate_points(t)?;
    let k = t.rep_basis().len();
    for index in [from, to] {
        if index >= k {
            return Err(DistanceError::PointOutOfRange { index, points: k });
        }
    }
    if from == to {
        return Ok(DistanceResult {
            value: DistanceValue::Finite(0.0),
            certificate: vec![0.0; k],
            commutator_norm: 0.0,
            restart_spread: 0.0,
        });
    }
    let eps = t.tol().eps();
    let d = t.dirac_or_zero();
    let comps = point_components(&d, &owner, k, eps);
    if comps[from] != comps[to] {
        let certificate: Vec<f64> = comps.iter().map(|&c| f64::from(u8::from(c == comps[from]))).collect();
        let a = t.represent(&certificate.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>());
        return Ok(DistanceResult {
            value: DistanceValue::Unbounded,
            commutator_norm: spectral_norm(&CMatrix::commutator(&d, &a))?,
            certificate,
            restart_spread: 0.0,
        });
    }

    let obj = Objective {
        commutators: t.rep_basis().iter().map(|p| CMatrix::commutator(&d, p)).collect(),
        from,
        free: (0..k).filter(|&p| p != from && p != to).collect(),
    };
    let mut rng = rng::stream(cfg.seed, "distance-restarts");
    let (y, f_min, spread) = if obj.free.is_empty() {
        (Vec::new(), obj.value(&[]), 0.0)
    } else {
        let mut results = Vec::with_capacity(cfg.restarts);
        for r in 0..cfg.restarts.max(1) {
            let start: Vec<f64> = if r == 0 {
                vec![0.0; obj.free.len()]
            } else {
                (0..obj.free.len()).map(|_| rng.random_range(-1.0..2.0)).collect()
            };
            let (y, f) = subgradient_descent(&obj, start, cfg);
            results.push(polish(&obj, y, f, &mut rng));
        }
        let lo = results.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
        let hi = results.iter().map(|r| r.1).fold(0.0, f64::max);
        let spread = (hi - lo) / lo.max(f64::MIN_POSITIVE);
        if spread > cfg.agreement {
            return Err(DistanceError::NumericalFailure { spread });
        }
        let best = results.into_iter().min_by(|a, b| a.1.total_cmp(&b.1)).expect("restarts");
        (best.0, best.1, spread)
    };
    if f_min < eps {
        let x = obj.full(&y);
        return Ok(DistanceResult {
            value: DistanceValue::Unbounded,
            certificate: x,
            commutator_norm: f_min,
            restart_spread: spread,
        });
    }
    let certificate: Vec<f64> = obj.full(&y).iter().map(|v| v / f_min).collect();
    Ok(DistanceResult {
        value: DistanceValue::Finite(1.0 / f_min),
        commutator_norm: obj.value(&y) / f_min,
        certificate,
        restart_spread: spread,
    })
}

/// `1/|t|`, unbounded when `|t|` is below the tolerance.
pub fn two_point_closed_form(t_param: C64, tol: Tolerance) -> DistanceResult {
    let m = t_param.norm();
    if m < tol.eps() {
        return DistanceResult {
            value: DistanceValue::Unbounded,
            certificate: vec![1.0, 0.0],
            commutator_norm: m,
            restart_spread: 0.0,
        };
    }
    DistanceResult {
        value: DistanceValue::Finite(1.0 / m),
        certificate: vec![1.0 / m, 0.0],
        commutator_norm: 1.0,
        restart_spread: 0.0,
    }
}
