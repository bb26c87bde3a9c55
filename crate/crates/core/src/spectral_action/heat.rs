//! Heat trace of `(−∂² + |d|²) ⊗ 1₁₆` on a flat 4-torus, summed over Fourier modes.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::linalg::C64;

/// Largest relative truncation error accepted at any `t`.
pub const TRUNCATION_LIMIT: f64 = 1e-8;

#[derive(Debug, Error, PartialEq)]
pub enum HeatError {
    #[error("invalid input: {0}")]
    BadInput(String),
    #[error("truncation bound {bound:.3e} at t = {t} exceeds {TRUNCATION_LIMIT:e}; need mode cut >= {required_cut}")]
    Truncation { t: f64, bound: f64, required_cut: usize },
    #[error("least-squares fit failed: {0}")]
    Fit(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeatTracePoint {
    pub t: f64,
    pub trace: f64,
    /// Relative bound on the truncation error of `trace`.
    pub truncation_bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeatFit {
    /// Densities from `t² Tr / V ≈ a0 + a2 t + a4 t² + c t³`.
    pub a0: f64,
    pub a2: f64,
    pub a4: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeatTraceReport {
    pub side_length: f64,
    pub mode_cut: usize,
    pub d: C64,
    pub points: Vec<HeatTracePoint>,
    pub fit: HeatFit,
}

pub fn default_t_values() -> Vec<f64> {
    (1..=10).map(|k| 0.05 * k as f64).collect()
}

/// `Σ_{|n| ≤ cut} exp(−a n²)` with `a = t(2π/L)²`, and the absolute tail bound.
fn theta(a: f64, cut: usize) -> (f64, f64) {
    let mut sum = 1.0;
    for n in 1..=cut {
        sum += 2.0 * (-a * (n * n) as f64).exp();
    }
    let n1 = (cut + 1) as f64;
    let ratio = (-a * (2.0 * n1 + 1.0)).exp();
    let tail = 2.0 * (-a * n1 * n1).exp() / (1.0 - ratio);
    (sum, tail)
}

fn relative_bound(a: f64, cut: usize) -> f64 {
    let (sum, tail) = theta(a, cut);
    (1.0 + tail / sum).powi(4) - 1.0
}

fn required_cut(a: f64) -> usize {
    let mut n = 1;
    while relative_bound(a, n) > TRUNCATION_LIMIT {
        n += 1;
    }
    n
}

fn validate(side_length: f64, t_values: &[f64], d: C64) -> Result<(), HeatError> {
    if !(side_length.is_finite() && side_length > 0.0) {
        return Err(HeatError::BadInput(format!("side length must be positive, got {side_length}")));
    }
    if !(d.re.is_finite() && d.im.is_finite()) {
        return Err(HeatError::BadInput("non-finite d".into()));
    }
    if t_values.is_empty() {
        return Err(HeatError::BadInput("no t values".into()));
    }
    if let Some(t) = t_values.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
        return Err(HeatError::BadInput(format!("t must be positive, got {t}")));
    }
    Ok(())
}

/// Traces `Σ_n 16 exp(−t(|2πn/L|² + |d|²))` over `|n_μ| ≤ mode_cut`. The
/// 4D sum factorizes into a fourth power of a 1D theta sum.
pub fn heat_trace_torus(side_length: f64, mode_cut: usize, d: C64, t_values: &[f64]) -> Result<Vec<HeatTracePoint>, HeatError> {
    validate(side_length, t_values, d)?;
    let k = 2.0 * PI / side_length;
    t_values
        .iter()
        .map(|&t| {
            let a = t * k * k;
            let bound = relative_bound(a, mode_cut);
            if bound > TRUNCATION_LIMIT || !bound.is_finite() {
                return Err(HeatError::Truncation {
                    t,
                    bound,
                    required_cut: required_cut(a),
                });
            }
            let (sum, _) = theta(a, mode_cut);
            Ok(HeatTracePoint {
                t,
                trace: 16.0 * (-t * d.norm_sqr()).exp() * sum.powi(4),
                truncation_bound: bound,
            })
        })
        .collect()
}

/// Cubic least-squares fit of `t² Tr / V` against `t`.
pub fn fit_coefficients(points: &[HeatTracePoint], volume: f64) -> Result<HeatFit, HeatError> {
    if points.len() < 4 {
        return Err(HeatError::BadInput(format!("need at least 4 t values for the fit, got {}", points.len())));
    }
    let n = points.len();
    let design = DMatrix::from_fn(n, 4, |i, j| points[i].t.powi(j as i32));
    let y = DVector::from_iterator(n, points.iter().map(|p| p.t * p.t * p.trace / volume));
    let svd = design.clone().svd(true, true);
    let c = svd.solve(&y, 1e-14).map_err(|e| HeatError::Fit(e.to_string()))?;
    let residual = (&design * &c - &y).norm();
    Ok(HeatFit {
        a0: c[0],
        a2: c[1],
        a4: c[2],
        residual,
    })
}

pub fn heat_trace_report(side_length: f64, mode_cut: usize, d: C64, t_values: &[f64]) -> Result<HeatTraceReport, HeatError> {
    let points = heat_trace_torus(side_length, mode_cut, d, t_values)?;
    let fit = fit_coefficients(&points, side_length.powi(4))?;
    Ok(HeatTraceReport {
        side_length,
        mode_cut,
        d,
        points,
        fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct_sum(side: f64, cut: i64, d: C64, t: f64) -> f64 {
        let k = 2.0 * PI / side;
        let mut total = 0.0;
        for a in -cut..=cut {
            for b in -cut..=cut {
                for c in -cut..=cut {
                    for e in -cut..=cut {
                        let n2 = (a * a + b * b + c * c + e * e) as f64;
                        total += 16.0 * (-t * (k * k * n2 + d.norm_sqr())).exp();
                    }
                }
            }
        }
        total
    }

    #[test]
    fn matches_direct_mode_sum() {
        let d = C64::new(0.3, -0.8);
        let (side, cut, t) = (1.5, 6, 0.4);
        let got = heat_trace_torus(side, cut, d, &[t]).unwrap()[0].trace;
        let want = direct_sum(side, cut as i64, d, t);
        assert!((got - want).abs() < 1e-12 * want);
    }

    #[test]
    fn mass_factorizes() {
        let ts = default_t_values();
        let zero = heat_trace_torus(2.0 * PI, 30, C64::new(0.0, 0.0), &ts).unwrap();
        let d = C64::new(0.0, -1.3);
        let massive = heat_trace_torus(2.0 * PI, 30, d, &ts).unwrap();
        for (z, m) in zero.iter().zip(&massive) {
            let expected = (-z.t * d.norm_sqr()).exp() * z.trace;
            assert!((m.trace - expected).abs() < 1e-12 * expected);
        }
    }

    #[test]
    fn fitted_densities() {
        let r = heat_trace_report(2.0 * PI, 30, C64::new(0.0, 0.0), &default_t_values()).unwrap();
        assert!((r.fit.a0 * PI * PI - 1.0).abs() < 0.01);
        let r = heat_trace_report(2.0 * PI, 30, C64::new(0.0, -1.0), &default_t_values()).unwrap();
        assert!((r.fit.a0 * PI * PI - 1.0).abs() < 0.01);
        assert!((r.fit.a2 * PI * PI + 1.0).abs() < 0.01);
    }

    #[test]
    fn refuses_short_cut() {
        let err = heat_trace_torus(2.0 * PI, 3, C64::new(0.0, 0.0), &[0.05]).unwrap_err();
        let HeatError::Truncation { required_cut, .. } = err else {
            panic!("expected truncation error, got {err:?}");
        };
        assert!(heat_trace_torus(2.0 * PI, required_cut, C64::new(0.0, 0.0), &[0.05]).is_ok());
        assert!(heat_trace_torus(2.0 * PI, required_cut - 1, C64::new(0.0, 0.0), &[0.05]).is_err());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(heat_trace_torus(-1.0, 10, C64::new(0.0, 0.0), &[0.1]), Err(HeatError::BadInput(_))));
        assert!(matches!(heat_trace_torus(1.0, 10, C64::new(0.0, 0.0), &[0.0]), Err(HeatError::BadInput(_))));
        assert!(matches!(heat_trace_torus(1.0, 10, C64::new(0.0, 0.0), &[]), Err(HeatError::BadInput(_))));
        let pts = heat_trace_torus(2.0 * PI, 30, C64::new(0.0, 0.0), &[0.1, 0.2]).unwrap();
        assert!(fit_coefficients(&pts, 1.0).is_err());
    }
}
