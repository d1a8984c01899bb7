//! Time evolution from the spectral representation: limiting-absorption
//! coefficients, Φ̃ on a (y, c) grid, oscillatory integrals in c, velocity
//! and vorticity diagnostics, decay fits and the pure-transport baseline.

use std::f64::consts::PI;

use rayon::prelude::*;
use thiserror::Error;

use crate::funcs::{Parity, ParityPart, RealFn};
use crate::interp::{lagrange_eval, lagrange_weights, stencil_start};
use crate::kernels::{thresholds, KernelError, KernelTables};
use crate::profiles::{CriticalValue, ShearProfile};
use crate::quad::{gauss, simpson_weights};
use crate::rayleigh::{RayleighError, SolverOptions};
use crate::singular::{c_tilde_nodes, ii11, IntProfile, Node, SingularError, SolQuad, GAP_FRACTION};
use crate::spectral::{compute_node, SpectralError, SpectralNode, SpectralRow};
use crate::C64;

/// Largest phase α t Δc allowed across one Filon panel.
pub const PHASE_LIMIT: f64 = 1.0;
/// Largest refinement factor the Filon guard may apply.
pub const MAX_REFINE: usize = 64;
/// Targets closer than this to y_c take the limit value of Φ there.
pub const COLLAR: f64 = 1e-10;
pub const MIN_FIT_SAMPLES: usize = 10;
/// Default interior probe for the depletion series.
pub const Y_PROBE: f64 = 0.6;
const INT_CELLS: usize = 1024;
const TRANSPORT_ORDER: usize = 10;
const TRANSPORT_MAX_PANELS: usize = 4_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvolutionError {
    #[error("α t = {alpha_t} needs a Filon refinement of {needed}, above {MAX_REFINE}")]
    UnderResolved { alpha_t: f64, needed: usize },
    #[error("degenerate series: {0}")]
    DegenerateSeries(String),
    #[error("non-finite Φ̃ at c = {c}, y = {y}")]
    SingularAssembly { c: f64, y: f64 },
    #[error("grid: {0}")]
    Grid(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Rayleigh(#[from] RayleighError),
    #[error(transparent)]
    Singular(#[from] SingularError),
}

// ---------------------------------------------------------------- Filon

/// ∫_{-h}^{h} s^j e^{-iωs} ds for j = 0, 1, 2.
pub fn filon_moments(omega: f64, h: f64) -> [C64; 3] {
    let theta = omega * h;
    if theta.abs() < 0.5 {
        let mut out = [C64::default(); 3];
        for (j, o) in out.iter_mut().enumerate() {
            // Σ_k (-iω)^k / k! ∫ s^{j+k}, odd powers vanish
            let mut term = C64::new(1.0, 0.0);
            let mut acc = C64::default();
            for k in 0..30 {
                if (j + k) % 2 == 0 {
                    let p = (j + k + 1) as f64;
                    acc += term * (2.0 * h.powi((j + k + 1) as i32) / p);
                }
                term *= C64::new(0.0, -omega) / (k + 1) as f64;
            }
            *o = acc;
        }
        return out;
    }
    let (sn, cs) = theta.sin_cos();
    let w = omega;
    [
        C64::new(2.0 * sn / w, 0.0),
        C64::new(0.0, -2.0 * (sn / (w * w) - h * cs / w)),
        C64::new(2.0 * (h * h * sn / w + 2.0 * h * cs / (w * w) - 2.0 * sn / (w * w * w)), 0.0),
    ]
}

/// Lagrange basis on (-h, s1, h) as coefficients of 1, s, s².
fn quadratic_basis(h: f64, s1: f64) -> [[f64; 3]; 3] {
    let d0 = 2.0 * h * (h + s1);
    let d1 = s1 * s1 - h * h;
    let d2 = 2.0 * h * (h - s1);
    [
        [s1 * h / d0, -(s1 + h) / d0, 1.0 / d0],
        [-h * h / d1, 0.0, 1.0 / d1],
        [-h * s1 / d2, (h - s1) / d2, 1.0 / d2],
    ]
}

/// Weights with ∫ F(c) e^{-iωc} dc ≈ Σ wᵢ F(cᵢ) over [c₀, c_N], exact when F
/// is quadratic on each consecutive triple. With an odd number of intervals
/// the last one uses the quadratic through the last three nodes.
pub fn filon_weights_c(c: &[f64], omega: f64) -> Vec<C64> {
    let n = c.len();
    let mut w = vec![C64::default(); n];
    if n < 2 {
        return w;
    }
    if n == 2 {
        let m = 0.5 * (c[0] + c[1]);
        let h = 0.5 * (c[1] - c[0]);
        let mo = filon_moments(omega, h);
        let ph = C64::from_polar(1.0, -omega * m);
        w[0] = ph * (mo[0] * 0.5 - mo[1] / (2.0 * h));
        w[1] = ph * (mo[0] * 0.5 + mo[1] / (2.0 * h));
        return w;
    }
    let mut k = 0;
    while k + 2 < n {
        let (x0, x1, x2) = (c[k], c[k + 1], c[k + 2]);
        let m = 0.5 * (x0 + x2);
        let h = 0.5 * (x2 - x0);
        let mo = filon_moments(omega, h);
        let ph = C64::from_polar(1.0, -omega * m);
        for (j, b) in quadratic_basis(h, x1 - m).iter().enumerate() {
            w[k + j] += ph * (mo[0] * b[0] + mo[1] * b[1] + mo[2] * b[2]);
        }
        k += 2;
    }
    if k + 1 < n {
        // ∫ over [x1, x2] only, in the frame centred on the triple
        let (x0, x1, x2) = (c[n - 3], c[n - 2], c[n - 1]);
        let m = 0.5 * (x0 + x2);
        let h = 0.5 * (x2 - x0);
        let (sa, sb) = (x1 - m, x2 - m);
        let ms = 0.5 * (sa + sb);
        let mo = filon_moments(omega, 0.5 * (sb - sa));
        let ph = C64::from_polar(1.0, -omega * (m + ms));
        let j = [mo[0], mo[0] * ms + mo[1], mo[0] * (ms * ms) + mo[1] * (2.0 * ms) + mo[2]];
        for (i, b) in quadratic_basis(h, x1 - m).iter().enumerate() {
            w[n - 3 + i] += ph * (j[0] * b[0] + j[1] * b[1] + j[2] * b[2]);
        }
    }
    w
}

/// Filon weights on nodes given in c̃ (c = u(0) + c̃²), for the phase
/// e^{-iαct}. Panels whose phase exceeds [`PHASE_LIMIT`] trigger a uniform
/// refinement of the c̃ grid by a power of two; values on the fine grid come
/// from cubic interpolation in c̃, so the returned weights still act on the
/// original nodes.
pub fn filon_weights(c_tilde: &[f64], u0: f64, alpha: f64, t: f64) -> Result<Vec<C64>, EvolutionError> {
    let omega = alpha * t;
    let n = c_tilde.len();
    let c: Vec<f64> = c_tilde.iter().map(|x| u0 + x * x).collect();
    let widest = (0..n.saturating_sub(1)).step_by(2).map(|k| c[(k + 2).min(n - 1)] - c[k]).fold(0.0, f64::max);
    let mut r = 1;
    while omega.abs() * widest / r as f64 > PHASE_LIMIT {
        r *= 2;
        if r > MAX_REFINE {
            return Err(EvolutionError::UnderResolved { alpha_t: omega, needed: r });
        }
    }
    if r == 1 {
        return Ok(filon_weights_c(&c, omega));
    }
    let mut fine = Vec::with_capacity((n - 1) * r + 1);
    for k in 0..n - 1 {
        for j in 0..r {
            fine.push(c_tilde[k] + (c_tilde[k + 1] - c_tilde[k]) * j as f64 / r as f64);
        }
    }
    fine.push(c_tilde[n - 1]);
    let cf: Vec<f64> = fine.iter().map(|x| u0 + x * x).collect();
    let wf = filon_weights_c(&cf, omega);
    let mut w = vec![C64::default(); n];
    let m = 4.min(n);
    let mut lw = vec![0.0; m];
    for (i, &x) in fine.iter().enumerate() {
        let k = (i / r).min(n - 2);
        let s = stencil_start(n, k, m);
        lagrange_weights(&c_tilde[s..s + m], x, &mut lw);
        for j in 0..m {
            w[s + j] += wf[i] * lw[j];
        }
    }
    Ok(w)
}

/// c̃ nodes of a table with the two endpoints (where K and Φ̃ vanish) added.
pub fn extended_c_tilde(profile: &ShearProfile, interior: &[f64]) -> Vec<f64> {
    let mut x = Vec::with_capacity(interior.len() + 2);
    x.push(0.0);
    x.extend_from_slice(interior);
    x.push(profile.sc().v1);
    x
}

/// ∫₀¹ ψ̂_{o/e}(t, y) f(y) dy = -∫ K(c) e^{-iαct} dc over Ran u.
pub fn psi_projected(profile: &ShearProfile, kt: &KernelTables, parity: Parity, t: f64) -> Result<C64, EvolutionError> {
    let ct = extended_c_tilde(profile, &kt.c_tilde());
    let k = match parity {
        Parity::Odd => kt.k_o(),
        Parity::Even => kt.k_e(),
    };
    let w = filon_weights(&ct, profile.u0, kt.alpha, t)?;
    Ok(-k.iter().zip(&w[1..]).map(|(k, w)| w * *k).sum::<C64>())
}

// ----------------------------------------------------- limit coefficients

/// The channel scalars C, D, E at one c node.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ChannelData {
    pub c_o: f64,
    pub d_o: f64,
    pub c_e: f64,
    pub d_e: f64,
    pub e_e: f64,
}

/// Boundary values of the resolvent coefficients as c ± i0 approaches a real c.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LimitCoefficients {
    pub c: f64,
    pub mu_o_plus: C64,
    pub mu_o_minus: C64,
    pub mu_e_plus: C64,
    pub mu_e_minus: C64,
    pub nu_e_plus: C64,
    pub nu_e_minus: C64,
    /// (AC_o + BD_o) / ((A² + B²) ρ).
    pub mu1: f64,
    pub nu1: f64,
    /// -φ(0)φ'(0) ν₁.
    pub mu2: f64,
    /// Relative mismatch between the two forms of the even denominator.
    pub denominator_residual: f64,
}

/// Odd-part and even-part Int(·) profiles of one vorticity, reused across c.
pub struct ChannelContext<'a> {
    pub omega_o: ParityPart<&'a dyn RealFn>,
    pub omega_e: ParityPart<&'a dyn RealFn>,
    pub int_o: IntProfile,
    pub int_e: IntProfile,
}

impl<'a> ChannelContext<'a> {
    pub fn new(omega0: &'a dyn RealFn) -> Self {
        let omega_o = ParityPart::new(omega0, Parity::Odd);
        let omega_e = ParityPart::new(omega0, Parity::Even);
        let int_o = IntProfile::new(&omega_o, INT_CELLS);
        let int_e = IntProfile::new(&omega_e, INT_CELLS);
        Self { omega_o, omega_e, int_o, int_e }
    }
}

pub fn channel_data(profile: &ShearProfile, ctx: &ChannelContext, node: &SpectralNode) -> Result<ChannelData, EvolutionError> {
    let row = &node.row;
    let gap = profile.sc().v1 * GAP_FRACTION;
    let ii1_o = ii11(profile, &ctx.int_o, row.c_tilde, gap)? + node.quad.ii12(&ctx.omega_o);
    let ii1_e = ii11(profile, &ctx.int_e, row.c_tilde, gap)? + node.quad.ii12(&ctx.omega_e);
    Ok(ChannelData {
        c_o: row.rho * ctx.omega_o.val(row.y_c) / row.du_c * PI,
        d_o: row.du_c * row.rho * ii1_o,
        c_e: row.rho * ctx.omega_e.val(row.y_c) / row.du_c * PI,
        d_e: row.du_c * row.rho * ii1_e,
        e_e: node.quad.e_op(&ctx.omega_e),
    })
}

/// μ±^o, μ±^e, ν±^e from the tables at one node.
///
/// φ(0)φ'(0) = ρ₁²φ₁(0)φ₁'(0) and ρ = ρ₁(u(1) - c) share the factor ρ₁,
/// which is divided out before forming the even-channel ratios; their
/// denominators use the A₂, B₂ form and the direct form is kept only for
/// the residual.
pub fn limit_coefficients(alpha: f64, row: &SpectralRow, d: &ChannelData) -> Result<LimitCoefficients, EvolutionError> {
    let (t_o, t_e) = thresholds(alpha, row);
    let ab = row.ab_sq();
    if ab < t_o {
        return Err(KernelError::SpectralDegeneracy { channel: "odd", c: row.c, value: ab, threshold: t_o }.into());
    }
    let ab2 = row.ab2_sq();
    if ab2 < t_e {
        return Err(KernelError::SpectralDegeneracy { channel: "even", c: row.c, value: ab2, threshold: t_e }.into());
    }
    let i = C64::i();
    let inv_a = 1.0 / alpha;
    let apb = C64::new(row.a, row.b);
    let amb = C64::new(row.a, -row.b);
    let mu_o_plus = (-d.c_o + i * d.d_o) / amb * inv_a;
    let mu_o_minus = (d.c_o + i * d.d_o) / apb * inv_a;

    let pp = row.phi1_at_0 * row.dphi1_at_0;
    let r1 = row.rho1;
    let up = row.du_c * (row.rho / r1.max(f64::MIN_POSITIVE));
    // denominators divided by ρ₁: -φ₁(0)φ₁'(0)(A₂ ∓ iB₂)
    let den_plus = -pp * C64::new(row.a2, -row.b2);
    let den_minus = -pp * C64::new(row.a2, row.b2);
    let num_mu = |sign: f64| r1 * pp * (i * d.d_e - sign * d.c_e) - i * d.e_e * up;
    let mu_e_plus = num_mu(1.0) / den_plus * inv_a;
    let mu_e_minus = num_mu(-1.0) / den_minus * inv_a;
    let nu_e_plus = -(i * d.d_e - d.c_e - i * d.e_e * amb) / (den_plus * r1) * inv_a;
    let nu_e_minus = -(i * d.d_e + d.c_e - i * d.e_e * apb) / (den_minus * r1) * inv_a;

    let q = r1 * r1 * pp;
    let direct = q * apb - row.du_c * row.rho;
    let identity = -r1 * pp * C64::new(row.a2, row.b2);
    let scale = (q * apb).norm() + (row.du_c * row.rho).abs();
    let denominator_residual = if scale > 0.0 { (direct - identity).norm() / scale } else { 0.0 };

    let mu1 = (row.a * d.c_o + row.b * d.d_o) / (ab * row.rho);
    let qa = q * row.a - row.du_c * row.rho;
    let nu1 = -(q * (row.a * d.c_e + row.b * d.d_e) - row.du_c * row.rho * (row.b * d.e_e + d.c_e)) / (qa * qa + q * q * row.b * row.b);
    Ok(LimitCoefficients {
        c: row.c,
        mu_o_plus,
        mu_o_minus,
        mu_e_plus,
        mu_e_minus,
        nu_e_plus,
        nu_e_minus,
        mu1,
        nu1,
        mu2: -q * nu1,
        denominator_residual,
    })
}

// ------------------------------------------------------- pointwise Φ̃

/// φ(y) ∫_a^y W(z)/φ(z)² dz at the `targets` (breaks of `q`), with a = 0
/// below y_c and a = 1 above.
///
/// W is given at the Gauss nodes of `q`, with w_c = W(y_c) and
/// dw_c = W'(y_c). The integrand is split as M + R with
/// M = w_c/(u'²s²) + (dw_c - 2p w_c)/(u'²s), s = z - y_c, p = u''/(2u');
/// M is integrated in closed form and R is bounded. At y_c the value is
/// the limit -w_c/u'(y_c).
pub fn h_transform(
    profile: &ShearProfile,
    cv: &CriticalValue,
    q: &SolQuad,
    w: impl Fn(usize) -> C64,
    w_c: C64,
    dw_c: C64,
    targets: &[f64],
) -> Vec<C64> {
    let y_c = cv.y_c;
    let du = cv.du_c;
    let inv = 1.0 / (du * du);
    let bc = dw_c - w_c * (cv.d2u_c / du);
    let sigma = |z: f64| profile.slope_between(y_c, z);
    let nb = q.breaks.len();
    let panel_sum = |k: usize| -> C64 {
        let mut acc = C64::default();
        for i in q.panel(k) {
            let s = q.x[i] - y_c;
            let sg = sigma(q.x[i]);
            let p1 = 1.0 + q.g[i];
            let r = (w(i) / (sg * sg * p1 * p1) - (w_c + bc * s) * inv) / (s * s);
            acc += r * q.w[i];
        }
        acc
    };
    let mut f = vec![C64::default(); nb];
    for k in q.ic..nb - 1 {
        f[k + 1] = f[k] + panel_sum(k);
    }
    for k in (0..q.ic).rev() {
        f[k] = f[k + 1] - panel_sum(k);
    }
    let mant = |s: f64| -w_c * inv / s + bc * inv * s.abs().ln();
    targets
        .iter()
        .map(|&y| {
            let s = y - y_c;
            if s.abs() < COLLAR {
                return -w_c / du;
            }
            let k = nearest(&q.breaks, y);
            let a = if s < 0.0 { 0 } else { nb - 1 };
            if k == a {
                return C64::default();
            }
            let sa = q.breaks[a] - y_c;
            let sg = sigma(y);
            let p1 = 1.0 + q.gb[k];
            let phi = sg * s * p1;
            (f[k] - f[a] - mant(sa) + bc * inv * s.abs().ln()) * phi - w_c * (sg * p1 * inv)
        })
        .collect()
}

fn nearest(x: &[f64], t: f64) -> usize {
    let k = x.partition_point(|&v| v < t);
    if k == 0 {
        0
    } else if k == x.len() || (t - x[k - 1]) <= (x[k] - t) {
        (k - 1).min(x.len() - 1)
    } else {
        k
    }
}

/// Φ̃ = α(Φ₋ - Φ₊) on a y grid, one column per c node, with the coefficients.
#[derive(Debug, Clone)]
pub struct Representation {
    pub alpha: f64,
    pub u0: f64,
    /// Uniform grid on [-1, 1] (odd length, symmetric).
    pub y: Vec<f64>,
    /// c̃ nodes including the endpoints.
    pub c_tilde: Vec<f64>,
    /// Φ̃ columns on `y`; the endpoint columns are zero.
    pub phi_tilde: Vec<Vec<f64>>,
    pub coefficients: Vec<LimitCoefficients>,
}

pub fn symmetric_grid(n_y: usize) -> Result<Vec<f64>, EvolutionError> {
    if n_y < 5 || n_y % 2 == 0 {
        return Err(EvolutionError::Grid(format!("n_y = {n_y} must be odd and at least 5")));
    }
    Ok((0..n_y).map(|j| -1.0 + 2.0 * j as f64 / (n_y - 1) as f64).collect())
}

/// Φ̃ at one c node on the nonnegative half of the grid, returned as
/// (odd part, even part) on `half`.
pub fn phi_tilde_column(
    profile: &ShearProfile,
    alpha: f64,
    node: &SpectralNode,
    coeff: &LimitCoefficients,
    half: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let q = SolQuad::with_breaks(&node.sol, half);
    let one = C64::new(1.0, 0.0);
    let hf = h_transform(profile, &node.cv, &q, |_| one, one, C64::default(), half);
    let dmu_o = coeff.mu_o_minus - coeff.mu_o_plus;
    let dmu_e = coeff.mu_e_minus - coeff.mu_e_plus;
    let dnu = coeff.nu_e_minus - coeff.nu_e_plus;
    let y_c = node.cv.y_c;
    let mut odd = Vec::with_capacity(half.len());
    let mut even = Vec::with_capacity(half.len());
    for (&y, h) in half.iter().zip(&hf) {
        odd.push(alpha * (dmu_o * h).re);
        let mut e = dmu_e * h;
        if y < y_c {
            e += dnu * node.sol.phi_at(y).re;
        }
        even.push(alpha * e.re);
    }
    (odd, even)
}

/// Build Φ̃ on an `n_y` grid for `n_c` nodes uniform in c̃.
pub fn build_representation(
    profile: &ShearProfile,
    alpha: f64,
    omega0: &dyn RealFn,
    n_y: usize,
    n_c: usize,
    opts: &SolverOptions,
) -> Result<Representation, EvolutionError> {
    if alpha <= 0.0 {
        return Err(SpectralError::NonPositiveAlpha(alpha).into());
    }
    let y = symmetric_grid(n_y)?;
    let mid = n_y / 2;
    let half: Vec<f64> = y[mid..].to_vec();
    let ctx = ChannelContext::new(omega0);
    let nodes = c_tilde_nodes(profile.sc().v1, n_c);
    let cols = nodes
        .par_iter()
        .map(|&ct| -> Result<(Vec<f64>, LimitCoefficients), EvolutionError> {
            let node = compute_node(profile, alpha, ct, opts)?;
            let data = channel_data(profile, &ctx, &node)?;
            let coeff = limit_coefficients(alpha, &node.row, &data)?;
            let (odd, even) = phi_tilde_column(profile, alpha, &node, &coeff, &half);
            let mut col = vec![0.0; n_y];
            for j in 0..half.len() {
                col[mid + j] = odd[j] + even[j];
                col[mid - j] = -odd[j] + even[j];
            }
            col[mid] = even[0];
            if let Some(j) = col.iter().position(|v| !v.is_finite()) {
                return Err(EvolutionError::SingularAssembly { c: node.row.c, y: y[j] });
            }
            Ok((col, coeff))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut phi_tilde = Vec::with_capacity(n_c + 2);
    let mut coefficients = Vec::with_capacity(n_c);
    phi_tilde.push(vec![0.0; n_y]);
    for (col, coeff) in cols {
        phi_tilde.push(col);
        coefficients.push(coeff);
    }
    phi_tilde.push(vec![0.0; n_y]);
    Ok(Representation {
        alpha,
        u0: profile.u0,
        y,
        c_tilde: extended_c_tilde(profile, &nodes),
        phi_tilde,
        coefficients,
    })
}

impl Representation {
    fn combine(&self, w: &[C64]) -> Vec<C64> {
        let n = self.y.len();
        let mut out = vec![C64::default(); n];
        for (col, wi) in self.phi_tilde.iter().zip(w) {
            if *wi == C64::default() {
                continue;
            }
            for (o, v) in out.iter_mut().zip(col) {
                *o += wi * *v;
            }
        }
        let s = 1.0 / (2.0 * PI);
        out.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// ψ̂(t, ·) = (2π)⁻¹ ∫ Φ̃(·, c) e^{-iαct} dc on the stored grid.
    pub fn psi(&self, t: f64) -> Result<Vec<C64>, EvolutionError> {
        let w = filon_weights(&self.c_tilde, self.u0, self.alpha, t)?;
        Ok(self.combine(&w))
    }

    /// ∂_tψ̂(t, ·), the same integral against -iαc.
    pub fn psi_dt(&self, t: f64) -> Result<Vec<C64>, EvolutionError> {
        let mut w = filon_weights(&self.c_tilde, self.u0, self.alpha, t)?;
        for (wi, ct) in w.iter_mut().zip(&self.c_tilde) {
            *wi *= C64::new(0.0, -self.alpha * (self.u0 + ct * ct));
        }
        Ok(self.combine(&w))
    }
}

/// Φ₊(y, c) on `y` ⊂ [-1, 1] for real c, assembled from the boundary-value
/// coefficients (both channels, with the particular solution).
pub fn phi_plus(
    profile: &ShearProfile,
    alpha: f64,
    omega0: &dyn RealFn,
    c: f64,
    y: &[f64],
    opts: &SolverOptions,
) -> Result<Vec<C64>, EvolutionError> {
    if alpha <= 0.0 {
        return Err(SpectralError::NonPositiveAlpha(alpha).into());
    }
    let ct = (c - profile.u0).max(0.0).sqrt();
    let node = compute_node(profile, alpha, ct, opts)?;
    let ctx = ChannelContext::new(omega0);
    let data = channel_data(profile, &ctx, &node)?;
    let coeff = limit_coefficients(alpha, &node.row, &data)?;
    let mut half: Vec<f64> = y.iter().map(|v| v.abs()).collect();
    half.sort_by(f64::total_cmp);
    half.dedup();
    let q = SolQuad::with_breaks(&node.sol, &half);
    let y_c = node.cv.y_c;
    let ia = C64::new(0.0, alpha);
    let channel = |om: &dyn RealFn, mu: C64| -> Vec<C64> {
        // Ψ(z) = ∫_{y_c}^z φ₁ω at the Gauss nodes
        let qv = |n: Node| match n {
            Node::Gauss(i) => (1.0 + q.g[i]) * om.val(q.x[i]),
            Node::Break(k) => (1.0 + q.gb[k]) * om.val(q.breaks[k]),
        };
        let dq = |n: Node| match n {
            Node::Gauss(i) => q.dphi1[i] * om.val(q.x[i]) + (1.0 + q.g[i]) * om.der(q.x[i]),
            Node::Break(k) => q.dphib[k] * om.val(q.breaks[k]) + (1.0 + q.gb[k]) * om.der(q.breaks[k]),
        };
        let psi = q.cumulative(qv, dq);
        h_transform(profile, &node.cv, &q, |i| psi[i] / ia + mu, mu, C64::new(om.val(y_c), 0.0) / ia, &half)
    };
    let odd = channel(&ctx.omega_o, coeff.mu_o_plus);
    let mut even = channel(&ctx.omega_e, coeff.mu_e_plus);
    for (e, &t) in even.iter_mut().zip(&half) {
        if t < y_c {
            *e += coeff.nu_e_plus * node.sol.phi_at(t).re;
        }
    }
    Ok(y
        .iter()
        .map(|&t| {
            let j = nearest(&half, t.abs());
            if t < 0.0 {
                -odd[j] + even[j]
            } else {
                odd[j] + even[j]
            }
        })
        .collect())
}

// ---------------------------------------------------------- diagnostics

/// First and second derivatives on a uniform grid, fourth order, with
/// one-sided stencils at the two ends of the grid.
pub fn fd_derivatives(h: f64, f: &[C64]) -> (Vec<C64>, Vec<C64>) {
    let n = f.len();
    let mut d1 = vec![C64::default(); n];
    let mut d2 = vec![C64::default(); n];
    const F1: [f64; 5] = [-25.0, 48.0, -36.0, 16.0, -3.0];
    const F2: [f64; 6] = [45.0, -154.0, 214.0, -156.0, 61.0, -10.0];
    const N1: [f64; 5] = [-3.0, -10.0, 18.0, -6.0, 1.0];
    const N2: [f64; 6] = [10.0, -15.0, -4.0, 14.0, -6.0, 1.0];
    let dot = |c: &[f64], idx: &dyn Fn(usize) -> usize| -> C64 { c.iter().enumerate().map(|(k, &a)| f[idx(k)] * a).sum() };
    for i in 0..n {
        if i >= 2 && i + 2 < n {
            d1[i] = (f[i - 2] - f[i - 1] * 8.0 + f[i + 1] * 8.0 - f[i + 2]) / (12.0 * h);
            d2[i] = (-f[i - 2] + f[i - 1] * 16.0 - f[i] * 30.0 + f[i + 1] * 16.0 - f[i + 2]) / (12.0 * h * h);
        } else if i < 2 {
            let (c1, c2): (&[f64], &[f64]) = if i == 0 { (&F1, &F2) } else { (&N1, &N2) };
            let base = i.saturating_sub(1);
            d1[i] = dot(c1, &|k| base + k) / (12.0 * h);
            d2[i] = dot(c2, &|k| base + k) / (12.0 * h * h);
        } else {
            let (c1, c2): (&[f64], &[f64]) = if i == n - 1 { (&F1, &F2) } else { (&N1, &N2) };
            d1[i] = -dot(c1, &|k| n - 1 - k) / (12.0 * h);
            d2[i] = dot(c2, &|k| n - 1 - k) / (12.0 * h * h);
        }
    }
    (d1, d2)
}

/// ψ̂, ω̂ and the norm series on a uniform grid of [-1, 1].
#[derive(Debug, Clone)]
pub struct EvolutionState {
    pub alpha: f64,
    pub y: Vec<f64>,
    pub t: Vec<f64>,
    pub psi: Vec<Vec<C64>>,
    pub omega: Vec<Vec<C64>>,
    pub norm_v: Vec<f64>,
    pub norm_v2: Vec<f64>,
    pub omega0_abs: Vec<f64>,
    pub omega_probe_abs: Vec<f64>,
    pub y_probe: f64,
}

/// ‖V̂‖² = ∫|∂_yψ̂|² + α²|ψ̂|², ‖V̂²‖ = α‖ψ̂‖ by Simpson's rule.
pub fn velocity_norms(h: f64, alpha: f64, psi: &[C64], dpsi: &[C64]) -> (f64, f64) {
    let w = simpson_weights(psi.len(), h);
    let p2: f64 = psi.iter().zip(&w).map(|(p, w)| p.norm_sqr() * w).sum();
    let d2: f64 = dpsi.iter().zip(&w).map(|(p, w)| p.norm_sqr() * w).sum();
    ((d2 + alpha * alpha * p2).sqrt(), alpha * p2.sqrt())
}

/// ‖V̂‖² recomputed by parts: -Re ∫ ψ̂ (conj ψ̂'' - α² conj ψ̂) dy. Returns
/// the relative difference from the direct form.
pub fn energy_identity_residual(h: f64, alpha: f64, psi: &[C64]) -> f64 {
    let (d1, d2) = fd_derivatives(h, psi);
    let w = simpson_weights(psi.len(), h);
    let direct: f64 = psi.iter().zip(&d1).zip(&w).map(|((p, d), w)| (d.norm_sqr() + alpha * alpha * p.norm_sqr()) * w).sum();
    let parts: f64 = -psi.iter().zip(&d2).zip(&w).map(|((p, d), w)| (p * (d - p * (alpha * alpha)).conj()).re * w).sum::<f64>();
    (direct - parts).abs() / direct.max(f64::MIN_POSITIVE)
}

impl EvolutionState {
    /// Derive ω̂ = -(∂_y² - α²)ψ̂ and the norm series from ψ̂ samples on a
    /// uniform grid including the walls.
    pub fn from_psi(alpha: f64, y: Vec<f64>, t: Vec<f64>, psi: Vec<Vec<C64>>, y_probe: f64) -> Self {
        let h = y[1] - y[0];
        let mut omega = Vec::with_capacity(psi.len());
        let mut norm_v = Vec::new();
        let mut norm_v2 = Vec::new();
        let mut omega0_abs = Vec::new();
        let mut omega_probe_abs = Vec::new();
        let mid = nearest(&y, 0.0);
        for p in &psi {
            let (d1, d2) = fd_derivatives(h, p);
            let om: Vec<C64> = p.iter().zip(&d2).map(|(p, d)| p * (alpha * alpha) - d).collect();
            let (nv, nv2) = velocity_norms(h, alpha, p, &d1);
            norm_v.push(nv);
            norm_v2.push(nv2);
            omega0_abs.push(om[mid].norm());
            omega_probe_abs.push(lagrange_eval(&y, &om, y_probe, 4).norm());
            omega.push(om);
        }
        Self { alpha, y, t, psi, omega, norm_v, norm_v2, omega0_abs, omega_probe_abs, y_probe }
    }

    /// ω̂(t, y) e^{iαu(y)t} at sample k; its limit in t is the profile ω_∞.
    pub fn scattering_profile(&self, profile: &ShearProfile, k: usize) -> Vec<C64> {
        let t = self.t[k];
        self.omega[k].iter().zip(&self.y).map(|(w, &y)| w * C64::from_polar(1.0, self.alpha * profile.u(y) * t)).collect()
    }
}

/// |ω̂(t, 0)| and |ω̂(t, y_probe)| with the summary used by the depletion
/// experiment.
#[derive(Debug, Clone)]
pub struct DepletionSeries {
    pub t: Vec<f64>,
    pub at_zero: Vec<f64>,
    pub at_probe: Vec<f64>,
    pub y_probe: f64,
    /// |ω̂(t_last, 0)| / |ω̂(0, 0)|.
    pub ratio_zero: f64,
    /// Fraction of successive differences after `t_trend` that are negative.
    pub decreasing_fraction: f64,
    /// min and max of |ω̂(t, y_probe)| / |ω̂(0, y_probe)|.
    pub probe_range: (f64, f64),
}

pub fn depletion_series(state: &EvolutionState, t_trend: f64) -> DepletionSeries {
    let a = &state.omega0_abs;
    let b = &state.omega_probe_abs;
    let ratio_zero = a.last().copied().unwrap_or(0.0) / a.first().copied().unwrap_or(1.0);
    let after: Vec<f64> = state.t.iter().zip(a).filter(|(t, _)| **t >= t_trend).map(|(_, v)| *v).collect();
    let diffs = after.len().saturating_sub(1);
    let neg = after.windows(2).filter(|w| w[1] < w[0]).count();
    let b0 = b.first().copied().unwrap_or(1.0);
    let probe_range = b.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v / b0), hi.max(v / b0)));
    DepletionSeries {
        t: state.t.clone(),
        at_zero: a.clone(),
        at_probe: b.clone(),
        y_probe: state.y_probe,
        ratio_zero,
        decreasing_fraction: if diffs == 0 { 0.0 } else { neg as f64 / diffs as f64 },
        probe_range,
    }
}

// ------------------------------------------------------------ transport

/// ∫_{y_lo}^{y_hi} ω̂₀(y) η(y) e^{-iαu(y)t} dy for the transport-only flow.
///
/// The substitution z = v(y) turns the phase into α(u(0) + z²)t; panels in
/// z keep the phase variation 2αt|z|Δz below one and carry a
/// `TRANSPORT_ORDER`-point Gauss rule.
pub fn transport_reference(
    profile: &ShearProfile,
    omega0: &dyn Fn(f64) -> f64,
    eta: &dyn Fn(f64) -> f64,
    alpha: f64,
    t: f64,
    range: (f64, f64),
) -> Result<C64, EvolutionError> {
    let sc = profile.sc();
    let (za, zb) = (sc.v(range.0), sc.v(range.1));
    let rule = gauss(TRANSPORT_ORDER);
    let at = (alpha * t).abs();
    let mut z = za;
    let mut acc = C64::default();
    let mut panels = 0;
    while z < zb {
        let mut h = (0.05f64).min(zb - z);
        while 2.0 * at * z.abs().max((z + h).abs()) * h > PHASE_LIMIT {
            h *= 0.5;
        }
        for (x, w) in rule.x.iter().zip(&rule.w) {
            let s = z + h * x;
            let y = sc.inv(s);
            let amp = omega0(y) * eta(y) * sc.dinv(s);
            acc += C64::from_polar(amp * w * h, -alpha * t * (profile.u0 + s * s));
        }
        z += h;
        panels += 1;
        if panels > TRANSPORT_MAX_PANELS {
            return Err(EvolutionError::UnderResolved { alpha_t: alpha * t, needed: panels });
        }
    }
    Ok(acc)
}

// -------------------------------------------------------------- fitting

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub samples: usize,
}

/// Least-squares line through (ln t, ln v) for t in the window.
pub fn decay_fit(t: &[f64], v: &[f64], window: (f64, f64)) -> Result<DecayFit, EvolutionError> {
    let pts: Vec<(f64, f64)> = t.iter().zip(v).filter(|(t, _)| **t >= window.0 && **t <= window.1).map(|(t, v)| (*t, *v)).collect();
    if pts.len() < MIN_FIT_SAMPLES {
        return Err(EvolutionError::DegenerateSeries(format!(
            "{} samples in [{}, {}], need {MIN_FIT_SAMPLES}",
            pts.len(),
            window.0,
            window.1
        )));
    }
    if let Some((t, v)) = pts.iter().find(|(t, v)| !(*v > 0.0) || !(*t > 0.0)) {
        return Err(EvolutionError::DegenerateSeries(format!("value {v} at t = {t}")));
    }
    let n = pts.len() as f64;
    let xs: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(DecayFit { exponent: slope, intercept: my - slope * mx, r_squared, samples: pts.len() })
}

/// ∫₀^T (‖V̂‖² + ‖∂_tV̂‖²) dt by the trapezoid rule.
pub fn h1_time_integral(t: &[f64], norm_v: &[f64], norm_dv: &[f64]) -> f64 {
    t.windows(2)
        .enumerate()
        .map(|(k, w)| {
            let a = norm_v[k].powi(2) + norm_dv[k].powi(2);
            let b = norm_v[k + 1].powi(2) + norm_dv[k + 1].powi(2);
            0.5 * (w[1] - w[0]) * (a + b)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate_panels;
    use crate::rayleigh::solve_phi1;

    #[test]
    fn filon_is_exact_for_quadratics() {
        let c: Vec<f64> = (0..=40).map(|i| (i as f64 / 40.0).powi(2)).collect();
        for &om in &[0.0, 0.3, 7.0, 250.0] {
            let w = filon_weights_c(&c, om);
            let f = |x: f64| 1.0 - 2.0 * x + 3.0 * x * x;
            let got: C64 = c.iter().zip(&w).map(|(x, w)| w * f(*x)).sum();
            let want: C64 = integrate_panels(12, 0.0, 1.0, 400, |x| C64::from_polar(f(x), -om * x));
            assert!((got - want).norm() < 1e-12, "ω = {om}: {got} vs {want}");
        }
    }

    #[test]
    fn filon_guard_refines_and_gives_up() {
        let ct: Vec<f64> = (0..=64).map(|i| i as f64 / 64.0).collect();
        let w0 = filon_weights(&ct, 0.0, 1.0, 0.0).unwrap();
        let total: f64 = w0.iter().map(|w| w.re).sum();
        assert!((total - 1.0).abs() < 1e-14);
        let w = filon_weights(&ct, 0.0, 1.0, 200.0).unwrap();
        let f: Vec<f64> = ct.iter().map(|x| (3.0 * x).sin() * x * x).collect();
        let got: C64 = f.iter().zip(&w).map(|(f, w)| w * *f).sum();
        let want: C64 = integrate_panels(12, 0.0, 1.0, 2000, |c: f64| C64::from_polar((3.0 * c.sqrt()).sin() * c, -200.0 * c));
        assert!((got - want).norm() < 1e-5 * want.norm().max(1e-3), "{got} vs {want}");
        assert!(matches!(filon_weights(&ct, 0.0, 1.0, 1e6), Err(EvolutionError::UnderResolved { .. })));
    }

    #[test]
    fn decay_fit_examples() {
        let t: Vec<f64> = (1..=20).map(|k| k as f64).collect();
        let a: Vec<f64> = t.iter().map(|t| 3.0 / t).collect();
        let b: Vec<f64> = t.iter().map(|t| 3.0 / (t * t)).collect();
        let c = vec![2.5; t.len()];
        assert!((decay_fit(&t, &a, (0.0, 100.0)).unwrap().exponent + 1.0).abs() < 1e-12);
        assert!((decay_fit(&t, &b, (0.0, 100.0)).unwrap().exponent + 2.0).abs() < 1e-12);
        assert!(decay_fit(&t, &c, (0.0, 100.0)).unwrap().exponent.abs() < 1e-12);
        assert!(matches!(decay_fit(&t, &a, (0.0, 5.0)), Err(EvolutionError::DegenerateSeries(_))));
        let mut z = a.clone();
        z[3] = 0.0;
        assert!(matches!(decay_fit(&t, &z, (0.0, 100.0)), Err(EvolutionError::DegenerateSeries(_))));
    }

    fn row_at(ct: f64) -> (SpectralNode, ChannelData) {
        let p = ShearProfile::poiseuille();
        let node = compute_node(&p, 1.0, ct, &SolverOptions::default()).unwrap();
        let f = crate::funcs::FunctionSpec::Sum {
            terms: vec![crate::funcs::FunctionSpec::cos_pi(0.5), crate::funcs::FunctionSpec::SinPi { k: 1.0, amp: 0.5 }],
        };
        let ctx = ChannelContext::new(&f);
        let d = channel_data(&p, &ctx, &node).unwrap();
        (node, d)
    }

    #[test]
    fn limit_coefficient_identities() {
        let (node, d) = row_at(0.55);
        let r = &node.row;
        let a = 1.0;
        let lc = limit_coefficients(a, r, &d).unwrap();
        assert!(lc.denominator_residual < 1e-12);
        // the ±iB structure gives μ₊ = -conj(μ₋) for real data
        for (p, m) in [(lc.mu_o_plus, lc.mu_o_minus), (lc.mu_e_plus, lc.mu_e_minus), (lc.nu_e_plus, lc.nu_e_minus)] {
            assert!((p + m.conj()).norm() < 1e-14 * (1.0 + p.norm()));
        }
        let dmu = lc.mu_o_minus - lc.mu_o_plus;
        assert!((dmu - C64::new(2.0 / a * r.rho * lc.mu1, 0.0)).norm() < 1e-12 * dmu.norm());
        let dnu = lc.nu_e_minus - lc.nu_e_plus;
        assert!((dnu.re - 2.0 / a * lc.nu1).abs() < 1e-10 * dnu.norm() && dnu.im.abs() < 1e-10 * dnu.norm());
        let dmue = lc.mu_e_minus - lc.mu_e_plus;
        assert!((dmue.re - 2.0 / a * lc.mu2).abs() < 1e-10 * dmue.norm().max(1e-12));
        let zero = limit_coefficients(a, r, &ChannelData::default()).unwrap();
        assert_eq!(zero.mu_o_plus, C64::default());
        assert_eq!(zero.nu_e_minus, C64::default());
        assert_eq!(zero.mu1, 0.0);
    }

    #[test]
    fn h_transform_matches_direct_quadrature() {
        let p = ShearProfile::poiseuille();
        let cv = CriticalValue::real(&p, 0.49).unwrap();
        let sol = solve_phi1(&p, 1.5, &cv, &SolverOptions::default()).unwrap();
        let targets = [0.0, 0.25, 0.5, 0.7 - 1e-7, 0.7, 0.7 + 1e-7, 0.9, 1.0];
        let q = SolQuad::with_breaks(&sol, &targets);
        let one = C64::new(1.0, 0.0);
        let hf = h_transform(&p, &cv, &q, |_| one, one, C64::default(), &targets);
        let direct = |y: f64, a: f64| -> f64 {
            let phi = sol.phi_at(y).re;
            phi * integrate_panels(16, a, y, 64, |z| 1.0 / sol.phi_at(z).re.powi(2))
        };
        for (&y, h) in targets.iter().zip(&hf) {
            if y == 0.25 || y == 0.5 {
                assert!((h.re - direct(y, 0.0)).abs() < 1e-10, "y = {y}");
            }
            if y == 0.9 {
                assert!((h.re - direct(y, 1.0)).abs() < 1e-10, "y = {y}");
            }
            assert_eq!(h.im, 0.0);
        }
        assert_eq!(hf[0], C64::default());
        assert_eq!(hf[7], C64::default());
        let lim = -1.0 / cv.du_c;
        assert_eq!(hf[4].re, lim);
        assert!((hf[3].re - lim).abs() < 1e-5 && (hf[5].re - lim).abs() < 1e-5);
    }

    #[test]
    fn finite_differences_exact_on_quartics() {
        let y = symmetric_grid(33).unwrap();
        let h = y[1] - y[0];
        let f: Vec<C64> = y.iter().map(|&t| C64::new(t.powi(4) - t, 2.0 * t * t)).collect();
        let (d1, d2) = fd_derivatives(h, &f);
        for (i, &t) in y.iter().enumerate() {
            assert!((d1[i] - C64::new(4.0 * t.powi(3) - 1.0, 4.0 * t)).norm() < 1e-11);
            assert!((d2[i] - C64::new(12.0 * t * t, 4.0)).norm() < 1e-9);
        }
    }

    #[test]
    fn energy_identity_on_smooth_stream_function() {
        let y = symmetric_grid(513).unwrap();
        let h = y[1] - y[0];
        let psi: Vec<C64> = y.iter().map(|&t| C64::new((PI * t).sin() * (1.0 + t), (0.5 * PI * t).cos())).collect();
        assert!(energy_identity_residual(h, 1.3, &psi) < 1e-6);
    }

    #[test]
    fn transport_at_time_zero_is_the_pairing() {
        let p = ShearProfile::poiseuille();
        let v = transport_reference(&p, &|y| y * y, &|y| 1.0 + y, 1.0, 0.0, (-1.0, 1.0)).unwrap();
        assert!((v - C64::new(2.0 / 3.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn state_vorticity_inverts_the_stream_function() {
        let y = symmetric_grid(129).unwrap();
        let psi: Vec<C64> = y.iter().map(|&t| C64::new(1.0 - t * t, 0.0)).collect();
        let st = EvolutionState::from_psi(2.0, y.clone(), vec![0.0], vec![psi], Y_PROBE);
        for (w, &t) in st.omega[0].iter().zip(&y) {
            assert!((w.re - (2.0 + 4.0 * (1.0 - t * t))).abs() < 1e-9);
        }
        assert!((st.omega_probe_abs[0] - (2.0 + 4.0 * 0.64)).abs() < 1e-9);
    }
}
