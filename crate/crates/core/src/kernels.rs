//! Damping kernels K_o and K_e assembled from the Λ operators.
//!
//! With f = g'' - α²g,
//! ∫₀¹ ψ̂_o f dy = -∫ K_o e^{-iαct} dc and likewise for the even channel.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::funcs::{CurvatureWeighted, Parity, RealFn};
use crate::profiles::ShearProfile;
use crate::rayleigh::SolverOptions;
use crate::singular::{c_tilde_nodes, ii11, IntProfile, SingularError, GAP_FRACTION};
use crate::spectral::{c_derivative, compute_node, SpectralError, SpectralNode, SpectralRow};

/// Relative floor for A²+B² and the scaled A₂²+B₂².
pub const DEGENERACY_THRESHOLD: f64 = 1e-8;
const INT_CELLS: usize = 1024;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("{channel} channel denominator {value:e} below threshold {threshold:e} at c = {c}")]
    SpectralDegeneracy { channel: &'static str, c: f64, value: f64, threshold: f64 },
    #[error("{parity:?} test function violates its boundary conditions: {detail}")]
    ParityContract { parity: Parity, detail: String },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Singular(#[from] SingularError),
}

/// Odd channel: g(0) = g(1) = 0. Even channel: g'(0) = g(1) = 0.
pub fn validate_test_function<F: RealFn + ?Sized>(g: &F, parity: Parity) -> Result<(), KernelError> {
    let tol = 1e-10;
    let (name, v) = match parity {
        Parity::Odd => ("g(0)", g.val(0.0)),
        Parity::Even => ("g'(0)", g.der(0.0)),
    };
    if v.abs() > tol {
        return Err(KernelError::ParityContract { parity, detail: format!("{name} = {v:e}") });
    }
    let g1 = g.val(1.0);
    if g1.abs() > tol {
        return Err(KernelError::ParityContract { parity, detail: format!("g(1) = {g1:e}") });
    }
    Ok(())
}

/// Vorticity parts and test functions on [0, 1].
#[derive(Clone, Copy)]
pub struct KernelData<'a> {
    pub omega_o: &'a dyn RealFn,
    pub omega_e: &'a dyn RealFn,
    pub g_odd: &'a dyn RealFn,
    pub g_even: &'a dyn RealFn,
}

/// c-independent precomputation: Int(·) of every function entering II₁,₁.
pub struct KernelContext<'a> {
    pub profile: &'a ShearProfile,
    pub data: KernelData<'a>,
    pub ug_odd: CurvatureWeighted<'a, dyn RealFn + 'a>,
    pub ug_even: CurvatureWeighted<'a, dyn RealFn + 'a>,
    pub int_omega_o: IntProfile,
    pub int_omega_e: IntProfile,
    pub int_ug_odd: IntProfile,
    pub int_ug_even: IntProfile,
}

impl<'a> KernelContext<'a> {
    pub fn new(profile: &'a ShearProfile, data: KernelData<'a>) -> Result<Self, KernelError> {
        validate_test_function(data.g_odd, Parity::Odd)?;
        validate_test_function(data.g_even, Parity::Even)?;
        let ug_odd = CurvatureWeighted { f: data.g_odd, profile };
        let ug_even = CurvatureWeighted { f: data.g_even, profile };
        Ok(Self {
            profile,
            data,
            int_omega_o: IntProfile::new(data.omega_o, INT_CELLS),
            int_omega_e: IntProfile::new(data.omega_e, INT_CELLS),
            int_ug_odd: IntProfile::new(&ug_odd, INT_CELLS),
            int_ug_even: IntProfile::new(&ug_even, INT_CELLS),
            ug_odd,
            ug_even,
        })
    }
}

/// Kernel quantities at one c node.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct KernelRow {
    pub c: f64,
    pub c_tilde: f64,
    pub c_o: f64,
    pub d_o: f64,
    pub c_e: f64,
    pub d_e: f64,
    pub e_e: f64,
    /// II₁(ω_o), II₁(ω_e)
    pub ii1_o: f64,
    pub ii1_e: f64,
    pub lambda1: f64,
    pub lambda11: f64,
    pub lambda12: f64,
    pub lambda2: f64,
    pub lambda21: f64,
    pub lambda22: f64,
    /// Λ₁(ω_e), entering Λ₃.
    pub lambda1_e: f64,
    pub lambda3: f64,
    pub lambda31: f64,
    pub lambda4: f64,
    pub lambda41: f64,
    /// Λ₂(g_even), entering Λ₄.
    pub lambda2_e: f64,
    pub k_o: f64,
    pub k_e: f64,
}

/// Λ_{1,1}, Λ_{1,2}: A₁φ(y_c) + ρu''(y_c)II₁,₁(φ) and ρu''(y_c)II₁,₂(φ) + u'ρII₃φ(y_c).
pub fn lambda_1(row: &SpectralRow, phi_c: f64, ii11: f64, ii12: f64) -> (f64, f64) {
    let l11 = row.a1 * phi_c + row.rho * row.d2u_c * ii11;
    let l12 = row.rho * row.d2u_c * ii12 + row.du_c * row.rho * row.ii3 * phi_c;
    (l11, l12)
}

/// Λ_{2,1}, Λ_{2,2}: as Λ₁ with II₁(u''g) in place of u''(y_c)II₁(g).
pub fn lambda_2(row: &SpectralRow, g_c: f64, ii11_ug: f64, ii12_ug: f64) -> (f64, f64) {
    let l21 = row.a1 * g_c + row.rho * ii11_ug;
    let l22 = row.rho * ii12_ug + row.du_c * row.rho * row.ii3 * g_c;
    (l21, l22)
}

/// Λ_{3,1} = J(u''/u' E(ω_e) + ω_e(y_c)), Λ_{4,1} = J(E(u''g)/u' + g(y_c)).
pub fn lambda_34_parts(row: &SpectralRow, e_omega: f64, omega_c: f64, e_ug: f64, g_c: f64) -> (f64, f64) {
    let l31 = row.j * (row.d2u_c / row.du_c * e_omega + omega_c);
    let l41 = row.j * (e_ug / row.du_c + g_c);
    (l31, l41)
}

/// Denominator floors for the two channels at one node.
pub fn thresholds(alpha: f64, row: &SpectralRow) -> (f64, f64) {
    let w = (1.0 + alpha * row.rho0).powi(2);
    (DEGENERACY_THRESHOLD * w, DEGENERACY_THRESHOLD * w * (1.0 + alpha * row.y_c).powi(4) / alpha.powi(4))
}

/// All kernel quantities at one spectral node.
pub fn kernel_row(ctx: &KernelContext, alpha: f64, node: &SpectralNode) -> Result<KernelRow, KernelError> {
    let p = ctx.profile;
    let row = &node.row;
    let q = &node.quad;
    let d = &ctx.data;
    let ct = row.c_tilde;
    let gap = p.sc().v1 * GAP_FRACTION;
    let y_c = row.y_c;

    let (t_o, t_e) = thresholds(alpha, row);
    let ab = row.ab_sq();
    if ab < t_o {
        return Err(KernelError::SpectralDegeneracy { channel: "odd", c: row.c, value: ab, threshold: t_o });
    }
    let ab2 = row.ab2_sq();
    if ab2 < t_e {
        return Err(KernelError::SpectralDegeneracy { channel: "even", c: row.c, value: ab2, threshold: t_e });
    }

    let ii11_o = ii11(p, &ctx.int_omega_o, ct, gap)?;
    let ii11_e = ii11(p, &ctx.int_omega_e, ct, gap)?;
    let ii11_ug = ii11(p, &ctx.int_ug_odd, ct, gap)?;
    let ii11_uge = ii11(p, &ctx.int_ug_even, ct, gap)?;
    let ii12_o = q.ii12(d.omega_o);
    let ii12_e = q.ii12(d.omega_e);
    let ii12_ug = q.ii12(&ctx.ug_odd);
    let ii12_uge = q.ii12(&ctx.ug_even);

    let om_o = d.omega_o.val(y_c);
    let om_e = d.omega_e.val(y_c);
    let go = d.g_odd.val(y_c);
    let ge = d.g_even.val(y_c);
    let pi = std::f64::consts::PI;

    let ii1_o = ii11_o + ii12_o;
    let ii1_e = ii11_e + ii12_e;
    let c_o = row.rho * om_o / row.du_c * pi;
    let d_o = row.du_c * row.rho * ii1_o;
    let c_e = row.rho * om_e / row.du_c * pi;
    let d_e = row.du_c * row.rho * ii1_e;
    let e_e = q.e_op(d.omega_e);
    let e_ug = q.e_op(&ctx.ug_even);

    let (l11, l12) = lambda_1(row, om_o, ii11_o, ii12_o);
    let (l21, l22) = lambda_2(row, go, ii11_ug, ii12_ug);
    let (l11e, l12e) = lambda_1(row, om_e, ii11_e, ii12_e);
    let (l21e, l22e) = lambda_2(row, ge, ii11_uge, ii12_uge);
    let (l31, l41) = lambda_34_parts(row, e_e, om_e, e_ug, ge);
    let lambda1 = l11 + l12;
    let lambda2 = l21 + l22;
    let lambda1_e = l11e + l12e;
    let lambda2_e = l21e + l22e;
    let lambda3 = -row.rho1 * lambda1_e + l31;
    let lambda4 = -row.rho1 * lambda2_e + l41;

    Ok(KernelRow {
        c: row.c,
        c_tilde: ct,
        c_o,
        d_o,
        c_e,
        d_e,
        e_e,
        ii1_o,
        ii1_e,
        lambda1,
        lambda11: l11,
        lambda12: l12,
        lambda2,
        lambda21: l21,
        lambda22: l22,
        lambda1_e,
        lambda3,
        lambda31: l31,
        lambda4,
        lambda41: l41,
        lambda2_e,
        k_o: lambda1 * lambda2 / (ab * row.du_c),
        k_e: lambda3 * lambda4 / (row.du_c * ab2),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelTables {
    pub alpha: f64,
    pub spectral: Vec<SpectralRow>,
    pub rows: Vec<KernelRow>,
}

impl KernelTables {
    pub fn c(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.c).collect()
    }
    pub fn c_tilde(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.c_tilde).collect()
    }
    pub fn k_o(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.k_o).collect()
    }
    pub fn k_e(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.k_e).collect()
    }
}

/// Spectral and kernel rows on `n_c` nodes uniform in c̃.
pub fn kernel_tables(
    ctx: &KernelContext,
    alpha: f64,
    n_c: usize,
    opts: &SolverOptions,
) -> Result<KernelTables, KernelError> {
    let nodes = c_tilde_nodes(ctx.profile.sc().v1, n_c);
    let out = nodes
        .par_iter()
        .map(|&ct| {
            let node = compute_node(ctx.profile, alpha, ct, opts)?;
            let k = kernel_row(ctx, alpha, &node)?;
            Ok((node.row, k))
        })
        .collect::<Result<Vec<_>, KernelError>>()?;
    let (spectral, rows) = out.into_iter().unzip();
    Ok(KernelTables { alpha, spectral, rows })
}

/// Discrete ‖K‖_{L¹_c}, ‖∂_cK‖_{L¹_c}, ‖∂_c²K‖_{L¹_c} on the c̃ grid.
///
/// Integrals are taken in c̃ with dc = 2c̃ dc̃; derivatives use five-point
/// stencils in c̃ and the chain rule.
pub fn kernel_norms(c_tilde: &[f64], k: &[f64]) -> [f64; 3] {
    let d1 = c_derivative(c_tilde, k);
    let d2 = c_derivative(c_tilde, &d1);
    let w = crate::quad::trapezoid_weights(c_tilde);
    let l1 = |v: &[f64]| -> f64 { v.iter().zip(&w).zip(c_tilde).map(|((x, w), t)| x.abs() * w * 2.0 * t).sum() };
    [l1(k), l1(&d1), l1(&d2)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcs::{FunctionSpec, ParityPart};
    use crate::profiles::CriticalValue;
    use crate::rayleigh::solve_phi1;
    use crate::singular::SolQuad;

    #[test]
    fn parity_contracts() {
        assert!(validate_test_function(&FunctionSpec::sin_pi(1.0), Parity::Odd).is_ok());
        assert!(validate_test_function(&FunctionSpec::cos_pi(0.5), Parity::Even).is_ok());
        let bad = FunctionSpec::sin_pi(0.5);
        assert!(matches!(
            validate_test_function(&bad, Parity::Even),
            Err(KernelError::ParityContract { .. })
        ));
    }

    #[test]
    fn constant_even_vorticity_cancels_at_alpha_zero() {
        // ω_e ≡ 1, φ₁ ≡ 1: E = -y_c and u''/u' E + 1 = 0 at c = 1/4
        let p = ShearProfile::poiseuille();
        let cv = CriticalValue::real(&p, 0.25).unwrap();
        let sol = solve_phi1(&p, 0.0, &cv, &SolverOptions::default()).unwrap();
        let q = SolQuad::new(&sol);
        let one = FunctionSpec::constant(1.0);
        let e = q.e_op(&one);
        assert!((e + 0.5).abs() < 1e-14);
        let row = SpectralRow {
            c: 0.25,
            c_tilde: 0.5,
            y_c: 0.5,
            rho: cv.rho,
            rho0: cv.rho0,
            rho1: cv.rho1,
            du_c: cv.du_c,
            d2u_c: cv.d2u_c,
            a1: 0.0,
            a: 0.0,
            b: 0.0,
            j: -1.7,
            a2: 0.0,
            b2: 0.0,
            ii2: 0.0,
            ii3: 0.0,
            phi1_at_0: 1.0,
            dphi1_at_0: 0.0,
        };
        let (l31, _) = lambda_34_parts(&row, e, 1.0, 0.0, 0.0);
        assert!(l31.abs() < 1e-14);
    }

    #[test]
    fn zero_vorticity_gives_zero_kernels() {
        let p = ShearProfile::poiseuille();
        let zero = FunctionSpec::constant(0.0);
        let g = FunctionSpec::sin_pi(1.0);
        let ge = FunctionSpec::cos_pi(0.5);
        let ctx = KernelContext::new(&p, KernelData { omega_o: &zero, omega_e: &zero, g_odd: &g, g_even: &ge }).unwrap();
        let node = compute_node(&p, 1.0, 0.4, &SolverOptions::default()).unwrap();
        let k = kernel_row(&ctx, 1.0, &node).unwrap();
        assert_eq!(k.k_o, 0.0);
        assert_eq!(k.k_e, 0.0);
        assert_eq!(k.lambda1, 0.0);
    }

    #[test]
    fn kernels_are_bilinear() {
        let p = ShearProfile::poiseuille();
        let w = FunctionSpec::Sum { terms: vec![FunctionSpec::cos_pi(0.5), FunctionSpec::sin_pi(1.0)] };
        let w3 = FunctionSpec::Product { factors: vec![w.clone(), FunctionSpec::constant(3.0)] };
        let (wo, we) = (ParityPart::new(w.clone(), Parity::Odd), ParityPart::new(w.clone(), Parity::Even));
        let (wo3, we3) = (ParityPart::new(w3.clone(), Parity::Odd), ParityPart::new(w3, Parity::Even));
        let g = FunctionSpec::sin_pi(1.0);
        let ge = FunctionSpec::cos_pi(0.5);
        let node = compute_node(&p, 1.0, 0.7, &SolverOptions::default()).unwrap();
        let c1 = KernelContext::new(&p, KernelData { omega_o: &wo, omega_e: &we, g_odd: &g, g_even: &ge }).unwrap();
        let c3 = KernelContext::new(&p, KernelData { omega_o: &wo3, omega_e: &we3, g_odd: &g, g_even: &ge }).unwrap();
        let k1 = kernel_row(&c1, 1.0, &node).unwrap();
        let k3 = kernel_row(&c3, 1.0, &node).unwrap();
        assert!((k3.k_o - 3.0 * k1.k_o).abs() < 1e-12 * k1.k_o.abs().max(1e-300));
        assert!((k3.k_e - 3.0 * k1.k_e).abs() < 1e-12 * k1.k_e.abs().max(1e-300));
        assert!(k1.k_o.is_finite() && k1.k_e.is_finite());
    }
}
