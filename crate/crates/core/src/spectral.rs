//! Scalar functions of c that control the spectrum: A₁, A, B, J, A₂, B₂,
//! together with the embedding-eigenvalue scan.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::interp::lagrange_deriv_weights;
use crate::profiles::{CriticalValue, ShearProfile};
use crate::rayleigh::{boundary_values, solve_phi1, RayleighError, RayleighSolution, SolverOptions};
use crate::singular::{self, c_tilde_nodes, SingularError, SolQuad, GAP_FRACTION};

/// Below this y_c the boundary channel of J switches to its limit.
pub const J_LIMIT_YC: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("alpha must be positive, got {0}")]
    NonPositiveAlpha(f64),
    #[error("∂_yφ₁(0, c) = {dphi:e} vanishes while y_c = {y_c}")]
    DegenerateBoundary { y_c: f64, dphi: f64 },
    #[error(transparent)]
    Rayleigh(#[from] RayleighError),
    #[error(transparent)]
    Singular(#[from] SingularError),
}

/// One c node of the spectral tables.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SpectralRow {
    pub c: f64,
    pub c_tilde: f64,
    pub y_c: f64,
    pub rho: f64,
    pub rho0: f64,
    pub rho1: f64,
    pub du_c: f64,
    pub d2u_c: f64,
    pub a1: f64,
    pub a: f64,
    pub b: f64,
    pub j: f64,
    pub a2: f64,
    pub b2: f64,
    pub ii2: f64,
    pub ii3: f64,
    pub phi1_at_0: f64,
    pub dphi1_at_0: f64,
}

impl SpectralRow {
    pub fn ab_sq(&self) -> f64 {
        self.a * self.a + self.b * self.b
    }
    pub fn ab2_sq(&self) -> f64 {
        self.a2 * self.a2 + self.b2 * self.b2
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralTables {
    pub alpha: f64,
    pub profile: String,
    pub gap: f64,
    pub rows: Vec<SpectralRow>,
}

/// A₁ from the c-derivative of the principal value ∫dy/(u - c).
pub fn compute_a1(profile: &ShearProfile, cv: &CriticalValue) -> Result<f64, SingularError> {
    singular::a1(profile, cv, profile.sc().v1 * GAP_FRACTION)
}

/// A = A₁ + u'(y_c) ρ II₃, B = π ρ u''(y_c) / u'(y_c)².
pub fn compute_ab(a1: f64, ii3: f64, cv: &CriticalValue) -> (f64, f64) {
    let a = a1 + cv.du_c * cv.rho * ii3;
    let b = std::f64::consts::PI * cv.rho * cv.d2u_c / (cv.du_c * cv.du_c);
    (a, b)
}

/// J = u'(y_c)(u(1) - c) / (φ₁(0) ∂_yφ₁(0)); near y_c = 0 the limit
/// -15 u''(0)(u(1) - u(0)) / (8α²) is used.
pub fn compute_j(
    profile: &ShearProfile,
    alpha: f64,
    cv: &CriticalValue,
    phi1_0: f64,
    dphi1_0: f64,
) -> Result<f64, SpectralError> {
    if alpha <= 0.0 {
        return Err(SpectralError::NonPositiveAlpha(alpha));
    }
    if cv.y_c < J_LIMIT_YC {
        return Ok(-15.0 * profile.d2u(0.0) * (profile.u1 - profile.u0) / (8.0 * alpha * alpha));
    }
    if dphi1_0.abs() < 1e-300 {
        return Err(SpectralError::DegenerateBoundary { y_c: cv.y_c, dphi: dphi1_0 });
    }
    Ok(cv.du_c * (profile.u1 - cv.c_r) / (phi1_0 * dphi1_0))
}

/// A₂ = (u(0) - c) A + J, B₂ = (u(0) - c) B.
pub fn compute_a2b2(a: f64, b: f64, j: f64, cv: &CriticalValue) -> (f64, f64) {
    (-cv.rho1 * a + j, -cv.rho1 * b)
}

/// Everything at one c̃ node, including the Rayleigh solution and the
/// cached quadrature used downstream by the kernels.
pub struct SpectralNode {
    pub cv: CriticalValue,
    pub row: SpectralRow,
    pub sol: RayleighSolution,
    pub quad: SolQuad,
}

pub fn compute_node(
    profile: &ShearProfile,
    alpha: f64,
    c_tilde: f64,
    opts: &SolverOptions,
) -> Result<SpectralNode, SpectralError> {
    if alpha <= 0.0 {
        return Err(SpectralError::NonPositiveAlpha(alpha));
    }
    let cv = CriticalValue::from_c_tilde(profile, c_tilde);
    let sol = solve_phi1(profile, alpha, &cv, opts)?;
    let quad = SolQuad::new(&sol);
    let ii3 = quad.ii3();
    let ii2 = singular::ii2(profile, &cv);
    let a1 = compute_a1(profile, &cv)?;
    let (a, b) = compute_ab(a1, ii3, &cv);
    let (p0, dp0) = boundary_values(&sol);
    let j = compute_j(profile, alpha, &cv, p0.re, dp0.re)?;
    let (a2, b2) = compute_a2b2(a, b, j, &cv);
    let row = SpectralRow {
        c: cv.c_r,
        c_tilde,
        y_c: cv.y_c,
        rho: cv.rho,
        rho0: cv.rho0,
        rho1: cv.rho1,
        du_c: cv.du_c,
        d2u_c: cv.d2u_c,
        a1,
        a,
        b,
        j,
        a2,
        b2,
        ii2,
        ii3,
        phi1_at_0: p0.re,
        dphi1_at_0: dp0.re,
    };
    Ok(SpectralNode { cv, row, sol, quad })
}

/// Tables on `n_c` nodes uniform in c̃, computed in parallel.
pub fn spectral_tables(
    profile: &ShearProfile,
    alpha: f64,
    n_c: usize,
    opts: &SolverOptions,
) -> Result<SpectralTables, SpectralError> {
    let v1 = profile.sc().v1;
    let nodes = c_tilde_nodes(v1, n_c);
    let rows = nodes
        .par_iter()
        .map(|&ct| compute_node(profile, alpha, ct, opts).map(|n| n.row))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SpectralTables { alpha, profile: profile.name.clone(), gap: v1 * GAP_FRACTION, rows })
}

/// Ratios entering the lower bounds: (A²+B²)/(1+αρ₀)² and
/// (A₂²+B₂²) α⁴ / ((1+αρ₀)²(1+αy_c)⁴).
pub fn bound_ratios(t: &SpectralTables) -> (Vec<f64>, Vec<f64>) {
    let a = t.alpha;
    t.rows
        .iter()
        .map(|r| {
            let w = (1.0 + a * r.rho0).powi(2);
            (r.ab_sq() / w, r.ab2_sq() * a.powi(4) / (w * (1.0 + a * r.y_c).powi(4)))
        })
        .unzip()
}

/// Smallest C with every value in [1/C, C].
pub fn fitted_constant(values: &[f64]) -> f64 {
    values.iter().map(|&v| v.max(1.0 / v)).fold(1.0, f64::max)
}

/// Nodes where A²+B² or the scaled A₂²+B₂² fall below `threshold` and
/// u''(y_c) vanishes to tolerance; empty means no embedding eigenvalue.
pub fn scan_embedding(profile: &ShearProfile, t: &SpectralTables, threshold: f64) -> Vec<f64> {
    let (r1, r2) = bound_ratios(t);
    let tol = 1e-8 * profile.norm_c2();
    t.rows
        .iter()
        .zip(r1.iter().zip(&r2))
        .filter(|(r, (a, b))| a.min(**b) < threshold && r.d2u_c.abs() < tol)
        .map(|(r, _)| r.c)
        .collect()
}

/// ∂_c of values sampled on a uniform c̃ grid: five-point stencils in c̃
/// with ∂_c = (2c̃)⁻¹ ∂_c̃.
pub fn c_derivative(c_tilde: &[f64], values: &[f64]) -> Vec<f64> {
    let n = c_tilde.len();
    let m = 5.min(n);
    let mut w = vec![0.0; m];
    (0..n)
        .map(|i| {
            let s = i.saturating_sub(m / 2).min(n - m);
            lagrange_deriv_weights(&c_tilde[s..s + m], c_tilde[i], &mut w);
            let d: f64 = (0..m).map(|k| w[k] * values[s + k]).sum();
            d / (2.0 * c_tilde[i])
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn poiseuille_b_closed_form() {
        let p = ShearProfile::poiseuille();
        for &c in &[0.1, 0.25, 0.5, 0.9] {
            let cv = CriticalValue::real(&p, c).unwrap();
            let (_, b) = compute_ab(0.0, 0.0, &cv);
            assert!((b - 0.5 * PI * (1.0 - c)).abs() < 1e-12);
        }
        let cv = CriticalValue::real(&p, 0.25).unwrap();
        assert!((compute_ab(0.0, 0.0, &cv).1 - 0.375 * PI).abs() < 1e-12);
    }

    #[test]
    fn alpha_zero_gives_a_equal_a1() {
        let p = ShearProfile::poiseuille();
        let cv = CriticalValue::real(&p, 0.36).unwrap();
        let sol = solve_phi1(&p, 0.0, &cv, &SolverOptions::default()).unwrap();
        let ii3 = SolQuad::new(&sol).ii3();
        assert_eq!(ii3, 0.0);
        let a1 = compute_a1(&p, &cv).unwrap();
        assert_eq!(compute_ab(a1, ii3, &cv).0, a1);
        assert!(matches!(compute_node(&p, 0.0, 0.6, &SolverOptions::default()), Err(SpectralError::NonPositiveAlpha(_))));
    }

    #[test]
    fn endpoint_limits() {
        let p = ShearProfile::poiseuille();
        let cv = CriticalValue::real(&p, 0.0).unwrap();
        let (a2, b2) = compute_a2b2(0.7, 0.3, -2.0, &cv);
        assert_eq!((a2, b2), (-2.0, 0.0));
        let cv1 = CriticalValue::real(&p, 1.0).unwrap();
        assert_eq!(compute_j(&p, 1.0, &cv1, 2.0, -1.0).unwrap(), 0.0);
    }

    #[test]
    fn c_derivative_of_quadratic_in_c() {
        let ct: Vec<f64> = (1..40).map(|i| i as f64 / 40.0).collect();
        let v: Vec<f64> = ct.iter().map(|t| (t * t).powi(2)).collect();
        let d = c_derivative(&ct, &v);
        for (t, dv) in ct.iter().zip(&d) {
            assert!((dv - 2.0 * t * t).abs() < 1e-10);
        }
    }
}
