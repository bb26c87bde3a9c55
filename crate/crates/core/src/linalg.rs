//! Dense complex matrix kernel.
//!
//! Every operator in the workbench is a small dense complex matrix stored
//! row-major as explicit `(re, im)` pairs. Decompositions (SVD, Hermitian
//! eigensolver) are delegated to `nalgebra`; everything else is plain loops.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("dimension overflow: {0} x {1}")]
    SizeOverflow(usize, usize),
    #[error("ragged matrix: row {row} has {found} entries, expected {expected}")]
    Ragged {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("expected a square matrix, got {0}x{1}")]
    NotSquare(usize, usize),
    #[error("invalid tolerance {0}: must be positive and finite")]
    BadTolerance(f64),
}

/// Relative/absolute threshold used for every pass/fail and rank decision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerance(f64);

impl Tolerance {
    pub const DEFAULT_EPS: f64 = 1e-9;

    pub fn new(eps: f64) -> Result<Self, LinalgError> {
        if eps.is_finite() && eps > 0.0 {
            Ok(Self(eps))
        } else {
            Err(LinalgError::BadTolerance(eps))
        }
    }

    pub fn eps(self) -> f64 {
        self.0
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self(Self::DEFAULT_EPS)
    }
}

#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self, LinalgError> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for (r, row) in rows.into_iter().enumerate() {
            if row.len() != n_cols {
                return Err(LinalgError::Ragged {
                    row: r,
                    expected: n_cols,
                    found: row.len(),
                });
            }
            data.extend(row);
        }
        let m = Self {
            rows: n_rows,
            cols: n_cols,
            data,
        };
        if !m.is_finite() {
            return Err(LinalgError::NonFinite);
        }
        Ok(m)
    }

    /// Convenience for literal real matrices in builders and tests.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let n_cols = rows.first().map_or(0, |r| r.len());
        Self::from_fn(rows.len(), n_cols, |r, c| C64::new(rows[r][c], 0.0))
    }

    pub fn diag(entries: &[C64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &z) in entries.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    pub fn real_diag(entries: &[f64]) -> Self {
        let v: Vec<C64> = entries.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::diag(&v)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<C64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_diagonal(&self, eps: f64) -> bool {
        (0..self.rows).all(|r| (0..self.cols).all(|c| r == c || self[(r, c)].norm() <= eps))
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(
            self.cols, other.rows,
            "matmul shape mismatch: {}x{} * {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == ZERO {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[r * other.cols..(r + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "apply shape mismatch");
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    /// `ab - ba`
    pub fn commutator(a: &Self, b: &Self) -> Self {
        &(a * b) - &(b * a)
    }

    /// `ab + ba`
    pub fn anticommutator(a: &Self, b: &Self) -> Self {
        &(a * b) + &(b * a)
    }

    /// Flattens to `[re_00, im_00, re_01, ...]`, the real coordinates used by
    /// null-space extraction.
    pub fn to_real_vec(&self) -> Vec<f64> {
        self.data.iter().flat_map(|z| [z.re, z.im]).collect()
    }

    pub fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub fn from_nalgebra(m: &DMatrix<C64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)])
    }

    /// Embeds `self` as the block starting at `(r0, c0)` of `target`.
    pub fn write_block(&self, target: &mut Self, r0: usize, c0: usize) {
        for r in 0..self.rows {
            for c in 0..self.cols {
                target[(r0 + r, c0 + c)] += self[(r, c)];
            }
        }
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |r, c| self[(r0 + r, c0 + c)])
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs)
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.shape(), rhs.shape(), "add shape mismatch");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.shape(), rhs.shape(), "sub shape mismatch");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        self.scale_real(-1.0)
    }
}

// Wire format: an array of rows, each entry a two-element [re, im] array.
impl Serialize for CMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.rows))?;
        for r in 0..self.rows {
            let row: Vec<[f64; 2]> = self.row(r).iter().map(|z| [z.re, z.im]).collect();
            seq.serialize_element(&row)?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for CMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct RowsVisitor;
        impl<'de> Visitor<'de> for RowsVisitor {
            type Value = CMatrix;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an array of rows of [re, im] pairs")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<CMatrix, A::Error> {
                let mut rows = Vec::new();
                while let Some(row) = seq.next_element::<Vec<[f64; 2]>>()? {
                    rows.push(row.into_iter().map(|[re, im]| C64::new(re, im)).collect());
                }
                CMatrix::from_rows(rows).map_err(de::Error::custom)
            }
        }
        deserializer.deserialize_seq(RowsVisitor)
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> Result<CMatrix, LinalgError> {
    let rows = a
        .rows
        .checked_mul(b.rows)
        .ok_or(LinalgError::SizeOverflow(a.rows, b.rows))?;
    let cols = a
        .cols
        .checked_mul(b.cols)
        .ok_or(LinalgError::SizeOverflow(a.cols, b.cols))?;
    rows.checked_mul(cols)
        .ok_or(LinalgError::SizeOverflow(rows, cols))?;
    Ok(CMatrix::from_fn(rows, cols, |r, c| {
        a[(r / b.rows, c / b.cols)] * b[(r % b.rows, c % b.cols)]
    }))
}

/// Largest singular value.
pub fn spectral_norm(m: &CMatrix) -> Result<f64, LinalgError> {
    if !m.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    if m.rows == 0 || m.cols == 0 {
        return Ok(0.0);
    }
    let svd = m.to_nalgebra().svd(false, false);
    Ok(svd.singular_values.iter().copied().fold(0.0, f64::max))
}

/// Largest singular value with its left and right singular vectors, for
/// subgradients of `‖M(x)‖`.
pub fn top_singular_triplet(m: &CMatrix) -> Result<(f64, Vec<C64>, Vec<C64>), LinalgError> {
    if !m.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let svd = m.to_nalgebra().svd(true, true);
    let (k, sigma) = svd
        .singular_values
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, s)| if s > best.1 { (i, s) } else { best });
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    let left = u.column(k).iter().copied().collect();
    let right = v_t.row(k).iter().map(|z| z.conj()).collect();
    Ok((sigma, left, right))
}

#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector for `values[k]`.
    pub vectors: CMatrix,
}

pub fn hermitian_eigen(m: &CMatrix) -> Result<HermitianEigen, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::NotSquare(m.rows, m.cols));
    }
    if !m.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    // Symmetrize so the solver sees an exactly Hermitian input.
    let h = (m + &m.adjoint()).scale_real(0.5);
    let eig = h.to_nalgebra().symmetric_eigen();
    let mut order: Vec<usize> = (0..m.rows).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(m.rows, m.rows, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(HermitianEigen { values, vectors })
}

/// Orthonormal basis of `ker(a)` for a real matrix, with rank decided by
/// `σ < eps · max(σ_max, floor)`. A positive `floor` keeps a constraint that
/// vanishes up to roundoff from being read as full rank.
pub fn real_kernel(a: &DMatrix<f64>, tol: Tolerance, floor: f64) -> Vec<DVector<f64>> {
    let n = a.ncols();
    if n == 0 {
        return Vec::new();
    }
    if a.nrows() == 0 {
        return (0..n).map(|k| DVector::from_fn(n, |i, _| f64::from(u8::from(i == k)))).collect();
    }
    // Pad to at least square so the SVD returns a full right basis.
    let padded = if a.nrows() < n {
        let mut p = DMatrix::zeros(n, n);
        p.view_mut((0, 0), (a.nrows(), n)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let sigma_max = svd.singular_values.iter().copied().fold(floor, f64::max);
    let cut = tol.eps() * sigma_max;
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| sigma_max == 0.0 || s < cut)
        .map(|(k, _)| v_t.row(k).transpose())
        .collect()
}

/// Real rank of a set of real vectors under the shared relative threshold.
pub fn real_rank(vectors: &[Vec<f64>], tol: Tolerance) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    let dim = vectors[0].len();
    let a = DMatrix::from_fn(dim, vectors.len(), |r, c| vectors[c][r]);
    let sv = a.singular_values();
    let sigma_max = sv.iter().copied().fold(0.0, f64::max);
    if sigma_max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s >= tol.eps() * sigma_max).count()
}

/// Result of [`real_null_space`]: coordinates relative to the supplied
/// parametrization and the matrices they assemble to.
#[derive(Debug, Clone)]
pub struct NullSpace {
    pub coords: Vec<Vec<f64>>,
    pub matrices: Vec<CMatrix>,
}

impl NullSpace {
    pub fn dim(&self) -> usize {
        self.matrices.len()
    }
}

pub type RealLinearMap<'a> = &'a dyn Fn(&CMatrix) -> CMatrix;

/// Kernel of a stack of real-linear constraints on the real span of
/// `space`. Each constraint is evaluated on every parametrization element,
/// flattened to real coordinates and stacked into one real matrix.
pub fn real_null_space(space: &[CMatrix], constraints: &[RealLinearMap<'_>], tol: Tolerance) -> NullSpace {
    let n = space.len();
    let columns: Vec<Vec<f64>> = space
        .iter()
        .map(|e| constraints.iter().flat_map(|c| c(e).to_real_vec()).collect())
        .collect();
    let n_rows = columns.first().map_or(0, Vec::len);
    let a = DMatrix::from_fn(n_rows, n, |r, c| columns[c][r]);
    // Constraint outputs are compared against the size of the inputs.
    let floor = space.iter().map(CMatrix::frobenius_norm).fold(0.0, f64::max);
    let kernel = real_kernel(&a, tol, floor);
    let coords: Vec<Vec<f64>> = kernel.iter().map(|v| v.iter().copied().collect()).collect();
    let matrices = coords.iter().map(|x| combine(space, x)).collect();
    NullSpace { coords, matrices }
}

/// `Σ x_k · space[k]`
pub fn combine(space: &[CMatrix], x: &[f64]) -> CMatrix {
    assert_eq!(space.len(), x.len());
    let (r, c) = space.first().map_or((0, 0), CMatrix::shape);
    let mut out = CMatrix::zeros(r, c);
    for (m, &w) in space.iter().zip(x) {
        if w != 0.0 {
            for (d, s) in out.data.iter_mut().zip(&m.data) {
                *d += s * w;
            }
        }
    }
    out
}

/// Real parametrization of n×n Hermitian matrices: n diagonal reals, then for
/// each `i < j` the symmetric and antisymmetric off-diagonal units. The basis
/// is orthonormal for `Re tr(A* B)`.
pub fn hermitian_basis(n: usize) -> Vec<CMatrix> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut basis = Vec::with_capacity(n * n);
    for i in 0..n {
        let mut e = CMatrix::zeros(n, n);
        e[(i, i)] = ONE;
        basis.push(e);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let mut re = CMatrix::zeros(n, n);
            re[(i, j)] = C64::new(s, 0.0);
            re[(j, i)] = C64::new(s, 0.0);
            basis.push(re);
            let mut im = CMatrix::zeros(n, n);
            im[(i, j)] = C64::new(0.0, s);
            im[(j, i)] = C64::new(0.0, -s);
            basis.push(im);
        }
    }
    basis
}

/// Haar-ish random unitary from Gram-Schmidt on a complex Gaussian-like matrix.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    loop {
        let mut cols: Vec<Vec<C64>> = Vec::with_capacity(n);
        let mut degenerate = false;
        for _ in 0..n {
            let mut v: Vec<C64> = (0..n)
                .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            for q in &cols {
                let proj: C64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (x, y) in v.iter_mut().zip(q) {
                    *x -= proj * y;
                }
            }
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-6 {
                degenerate = true;
                break;
            }
            v.iter_mut().for_each(|z| *z /= norm);
            cols.push(v);
        }
        if !degenerate {
            return CMatrix::from_fn(n, n, |r, c| cols[c][r]);
        }
    }
}

pub fn random_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let m = random_matrix(n, n, rng);
    (&m + &m.adjoint()).scale_real(0.5)
}

/// Distance from `m` to the complex span of `basis`, in Frobenius norm.
pub fn span_residual(basis: &[CMatrix], m: &CMatrix) -> f64 {
    // Orthonormalize the real spanning set {b, i b}.
    let mut ortho: Vec<Vec<f64>> = Vec::new();
    for b in basis {
        for v in [b.to_real_vec(), b.scale(I).to_real_vec()] {
            let mut v = v;
            for q in &ortho {
                let p: f64 = q.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(q).for_each(|(x, y)| *x -= p * y);
            }
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n > 1e-12 {
                v.iter_mut().for_each(|x| *x /= n);
                ortho.push(v);
            }
        }
    }
    let mut r = m.to_real_vec();
    for q in &ortho {
        let p: f64 = q.iter().zip(&r).map(|(a, b)| a * b).sum();
        r.iter_mut().zip(q).for_each(|(x, y)| *x -= p * y);
    }
    r.iter().map(|x| x * x).sum::<f64>().sqrt()
}
