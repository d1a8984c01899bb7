//! Principal-value and regularized integrals: the Hilbert transform on
//! `(-v(1), v(1))`, the Z and average operators, and the building blocks
//! II₁,₁, II₁,₂, II₂, II₃ and E.
//!
//! Every principal value is computed by subtracting the singular model and
//! adding its integral in closed form.

use std::ops::Sub;

use thiserror::Error;

use crate::funcs::RealFn;
use crate::interp::hermite5;
use crate::profiles::{CriticalValue, ShearProfile};
use crate::quad::{gauss, integrate, integrate_panels, Scalar};
use crate::rayleigh::RayleighSolution;
use crate::C64;

/// Default endpoint gap as a fraction of v(1).
pub const GAP_FRACTION: f64 = 1.0 / 4096.0;
const HILBERT_ORDER: usize = 12;
const HILBERT_PANELS: f64 = 16.0;
const SOL_ORDER: usize = 8;
/// Largest panel used around a critical point.
pub const MAX_PANEL: f64 = 1.0 / 32.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SingularError {
    #[error("c̃ = {c_tilde} is closer than {gap:e} to the endpoint ±{v1}")]
    EndpointTooClose { c_tilde: f64, v1: f64, gap: f64 },
    #[error("function is not even: |g(c̃) - g(-c̃)| = {defect:e} at c̃ = {c_tilde}")]
    NotEven { c_tilde: f64, defect: f64 },
    #[error("function must vanish at the origin, g(0) = {0:e}")]
    NonzeroOrigin(f64),
}

/// Symmetric c̃ grid on (-v(1), v(1)) with trapezoid weights.
#[derive(Debug, Clone)]
pub struct PvGrid {
    pub v1: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub endpoint_gap: f64,
}

impl PvGrid {
    /// `n` positive nodes uniform on [gap, v1 - gap], mirrored.
    pub fn new(v1: f64, n: usize) -> Self {
        let gap = v1 * GAP_FRACTION;
        let pos = c_tilde_nodes(v1, n);
        let mut nodes: Vec<f64> = pos.iter().rev().map(|z| -z).collect();
        nodes.extend_from_slice(&pos);
        let weights = crate::quad::trapezoid_weights(&nodes);
        Self { v1, nodes, weights, endpoint_gap: gap }
    }

    pub fn positive(&self) -> &[f64] {
        &self.nodes[self.nodes.len() / 2..]
    }
}

/// `n` nodes uniform in c̃ on [gap, v1 - gap]. Under refinement the extreme
/// nodes stay fixed.
pub fn c_tilde_nodes(v1: f64, n: usize) -> Vec<f64> {
    let gap = v1 * GAP_FRACTION;
    if n == 1 {
        return vec![0.5 * v1];
    }
    let h = (v1 - 2.0 * gap) / (n - 1) as f64;
    (0..n).map(|i| gap + h * i as f64).collect()
}

/// H(g)(c̃) = p.v.∫_{-v1}^{v1} g(z) / (c̃ - z) dz.
pub fn hilbert_pv<T, F>(g: F, v1: f64, ct: f64, gap: f64) -> Result<T, SingularError>
where
    T: Scalar + Sub<Output = T>,
    F: Fn(f64) -> T,
{
    if v1 - ct.abs() < gap * (1.0 - 1e-12) || v1 - ct.abs() <= 0.0 {
        return Err(SingularError::EndpointTooClose { c_tilde: ct, v1, gap });
    }
    let gc = g(ct);
    let mut br = vec![-v1, v1];
    for p in [0.0, ct] {
        if p > -v1 && p < v1 && br.iter().all(|&b| b != p) {
            br.push(p);
        }
    }
    br.sort_by(f64::total_cmp);
    let hmax = v1 / HILBERT_PANELS;
    let mut acc = T::default();
    for w in br.windows(2) {
        let len = w[1] - w[0];
        let np = (len / hmax).ceil().max(1.0) as usize;
        acc = acc + integrate_panels(HILBERT_ORDER, w[0], w[1], np, |z| (g(z) - gc) * (1.0 / (ct - z)));
    }
    Ok(acc + gc * ((v1 + ct) / (v1 - ct)).ln())
}

/// d/dc̃ H(g) = H(g') + g(-v1)/(v1 + c̃) + g(v1)/(v1 - c̃), given H(g').
pub fn hilbert_deriv(h_of_dg: f64, g_minus: f64, g_plus: f64, v1: f64, ct: f64) -> f64 {
    h_of_dg + g_minus / (v1 + ct) + g_plus / (v1 - ct)
}

/// P(c) = p.v.∫₀¹ dy / (u - c) and its c-derivative.
pub fn pv_inverse(profile: &ShearProfile, ct: f64, gap: f64) -> Result<(f64, f64), SingularError> {
    let sc = profile.sc();
    let v1 = sc.v1;
    let hp: C64 = hilbert_pv(
        |z| {
            let (_, d1, d2) = sc.inv_derivs(z);
            C64::new(d1, d2)
        },
        v1,
        ct,
        gap,
    )?;
    let h = hp.re;
    let hv1 = sc.dinv(v1);
    let hd = hilbert_deriv(hp.im, hv1, hv1, v1, ct);
    let p = -h / (2.0 * ct);
    let dp = (h / (2.0 * ct * ct) - hd / (2.0 * ct)) / (2.0 * ct);
    Ok((p, dp))
}

/// dP/dc by a five-point stencil in c̃ (cross-check of `pv_inverse`).
pub fn pv_inverse_stencil(profile: &ShearProfile, ct: f64, step: f64, gap: f64) -> Result<f64, SingularError> {
    let mut vals = [0.0; 4];
    for (k, off) in [-2.0, -1.0, 1.0, 2.0].iter().enumerate() {
        vals[k] = pv_inverse(profile, ct + off * step, gap)?.0;
    }
    let dp_dct = (vals[0] - 8.0 * vals[1] + 8.0 * vals[2] - vals[3]) / (12.0 * step);
    Ok(dp_dct / (2.0 * ct))
}

/// A₁(c) = ρ u'(y_c) ∂_c P(c).
pub fn a1(profile: &ShearProfile, cv: &CriticalValue, gap: f64) -> Result<f64, SingularError> {
    let (_, dp) = pv_inverse(profile, cv.c_tilde, gap)?;
    Ok(cv.rho * cv.du_c * dp)
}

/// Panel breaks on [0, 1] graded around `y_c`: the local step is half the
/// distance to the mirror point -y_c, capped at `hmax`.
pub fn critical_breaks(y_c: f64, hmax: f64) -> Vec<f64> {
    let floor = 1e-6 * hmax;
    let mut left = Vec::new();
    let mut y = y_c;
    while y > 0.0 {
        let step = (0.5 * (y + y_c)).min(hmax).max(floor);
        y -= step;
        if y < 0.25 * step {
            y = 0.0;
        }
        left.push(y);
    }
    left.reverse();
    let mut out = left;
    out.push(y_c);
    let mut y = y_c;
    while y < 1.0 {
        let step = (0.5 * (y + y_c)).min(hmax).max(floor);
        y += step;
        if y > 1.0 - 0.25 * step {
            y = 1.0;
        }
        out.push(y);
    }
    out
}

/// II₂(c) = p.v.∫₀¹ (u'(y) - u'(y_c)) / (u(y) - c)² dy.
pub fn ii2(profile: &ShearProfile, cv: &CriticalValue) -> f64 {
    let y_c = cv.y_c;
    let m = cv.d2u_c / (cv.du_c * cv.du_c);
    let br = critical_breaks(y_c, MAX_PANEL);
    let mut acc = 0.0;
    for w in br.windows(2) {
        acc += integrate(HILBERT_ORDER, w[0], w[1], |y| {
            let s = y - y_c;
            let d0 = profile.deriv_slope(0, y_c, y);
            let d1 = profile.deriv_slope(1, y_c, y);
            (d1 / (d0 * d0) - m) / s
        });
    }
    acc + m * ((1.0 - y_c) / y_c).ln()
}

/// Int(φ)(y) = ∫₀^y φ, extended evenly to [-1, 0].
#[derive(Debug, Clone)]
pub struct IntProfile {
    h: f64,
    vals: Vec<f64>,
    d: Vec<f64>,
    s: Vec<f64>,
}

impl IntProfile {
    pub fn new<F: RealFn + ?Sized>(phi: &F, cells: usize) -> Self {
        let h = 1.0 / cells as f64;
        let mut vals = Vec::with_capacity(cells + 1);
        let mut acc = 0.0;
        vals.push(0.0);
        for k in 0..cells {
            let a = k as f64 * h;
            acc += integrate(SOL_ORDER, a, a + h, |y| phi.val(y));
            vals.push(acc);
        }
        let nodes = (0..=cells).map(|k| k as f64 * h);
        let d = nodes.clone().map(|y| phi.val(y)).collect();
        let s = nodes.map(|y| phi.der(y)).collect();
        Self { h, vals, d, s }
    }

    fn eval(&self, y: f64) -> (f64, f64) {
        let n = self.vals.len() - 1;
        let k = ((y / self.h) as usize).min(n - 1);
        let x0 = k as f64 * self.h;
        hermite5(x0, x0 + self.h, self.vals[k], self.vals[k + 1], self.d[k], self.d[k + 1], self.s[k], self.s[k + 1], y)
    }

    pub fn val(&self, y: f64) -> f64 {
        self.eval(y.abs().min(1.0)).0
    }

    /// d/dy of the even extension: sign(y) φ(|y|).
    pub fn der(&self, y: f64) -> f64 {
        let d = self.eval(y.abs().min(1.0)).1;
        if y < 0.0 {
            -d
        } else {
            d
        }
    }
}

/// II₁,₁(φ)(c) through the Hilbert transform in the c̃ variable:
/// (1/2c̃)[H(G)/(2c̃²) - ∂_c̃H(G)/(2c̃)] with G = (Int(φ)∘v⁻¹ - Int(φ)(y_c))(v⁻¹)'.
pub fn ii11(profile: &ShearProfile, int: &IntProfile, ct: f64, gap: f64) -> Result<f64, SingularError> {
    let sc = profile.sc();
    let v1 = sc.v1;
    let nc = int.val(sc.inv(ct));
    let hp: C64 = hilbert_pv(
        |z| {
            let (y, h, h2) = sc.inv_derivs(z);
            let nn = int.val(y) - nc;
            C64::new(nn * h, int.der(y) * h * h + nn * h2)
        },
        v1,
        ct,
        gap,
    )?;
    let g1 = (int.val(1.0) - nc) * sc.dinv(v1);
    let hd = hilbert_deriv(hp.im, g1, g1, v1, ct);
    Ok((hp.re / (2.0 * ct * ct) - hd / (2.0 * ct)) / (2.0 * ct))
}

/// Direct y-space evaluation of II₁,₁: p.v.∫₀¹ (N(y) - N(y_c)) / (u - u(y_c))² dy
/// with the model φ(y_c)/(u'(y_c)² (y - y_c)) subtracted.
pub fn ii11_direct(profile: &ShearProfile, int: &IntProfile, cv: &CriticalValue) -> f64 {
    let y_c = cv.y_c;
    let nc = int.val(y_c);
    let model = int.der(y_c) / (cv.du_c * cv.du_c);
    let br = critical_breaks(y_c, MAX_PANEL);
    let mut acc = 0.0;
    for w in br.windows(2) {
        acc += integrate(HILBERT_ORDER, w[0], w[1], |y| {
            let s = y - y_c;
            let d0 = profile.deriv_slope(0, y_c, y);
            let q = if s.abs() < 1e-4 {
                integrate(8, 0.0, 1.0, |t| int.der(y_c + t * s))
            } else {
                (int.val(y) - nc) / s
            };
            (q / (d0 * d0) - model) / s
        });
    }
    acc + model * ((1.0 - y_c) / y_c).ln()
}

/// Quadrature nodes on [0, 1] adapted to a Rayleigh solution at real c:
/// the solution grid merged with panels graded around y_c, with φ₁ data
/// cached at every node.
#[derive(Debug, Clone)]
pub struct SolQuad {
    pub y_c: f64,
    pub du_c: f64,
    pub breaks: Vec<f64>,
    /// Index of y_c in `breaks`.
    pub ic: usize,
    /// Gauss nodes, `SOL_ORDER` per panel.
    pub x: Vec<f64>,
    pub w: Vec<f64>,
    /// φ₁ - 1, ∂_yφ₁ and u - c at the Gauss nodes.
    pub g: Vec<f64>,
    pub dphi1: Vec<f64>,
    pub umc: Vec<f64>,
    /// φ₁ - 1 and ∂_yφ₁ at the breaks.
    pub gb: Vec<f64>,
    pub dphib: Vec<f64>,
}

pub const SOL_NODES: usize = SOL_ORDER;

impl SolQuad {
    pub fn new(sol: &RayleighSolution) -> Self {
        Self::with_breaks(sol, &[])
    }

    /// As [`SolQuad::new`] with `extra` points in [0, 1] added as breaks.
    /// Points within 1e-12 of an existing break are merged into it.
    pub fn with_breaks(sol: &RayleighSolution, extra: &[f64]) -> Self {
        let y_c = sol.c.y_c;
        let mut br: Vec<f64> = sol.y.clone();
        br.extend(critical_breaks(y_c, MAX_PANEL));
        br.extend(extra.iter().copied().filter(|t| (0.0..=1.0).contains(t)));
        br.sort_by(f64::total_cmp);
        let mut breaks: Vec<f64> = Vec::with_capacity(br.len());
        for b in br {
            match breaks.last() {
                Some(&l) if b - l < 1e-12 => {
                    if b == y_c {
                        *breaks.last_mut().unwrap() = y_c;
                    }
                }
                _ => breaks.push(b),
            }
        }
        let ic = breaks.iter().position(|&b| b == y_c).expect("y_c is a break");
        let rule = gauss(SOL_ORDER);
        let np = breaks.len() - 1;
        let mut x = Vec::with_capacity(np * SOL_ORDER);
        let mut w = Vec::with_capacity(np * SOL_ORDER);
        for p in breaks.windows(2) {
            let h = p[1] - p[0];
            for (xi, wi) in rule.x.iter().zip(&rule.w) {
                x.push(p[0] + h * xi);
                w.push(h * wi);
            }
        }
        let mut g = Vec::with_capacity(x.len());
        let mut dphi1 = Vec::with_capacity(x.len());
        let mut umc = Vec::with_capacity(x.len());
        for &t in &x {
            let (a, b) = sol.eval(t);
            g.push(a.re);
            dphi1.push(b.re);
            umc.push(sol.u_minus_c(t).re);
        }
        let mut gb = Vec::with_capacity(breaks.len());
        let mut dphib = Vec::with_capacity(breaks.len());
        for &t in &breaks {
            let (a, b) = sol.eval(t);
            gb.push(a.re);
            dphib.push(b.re);
        }
        Self { y_c, du_c: sol.c.du_c, breaks, ic, x, w, g, dphi1, umc, gb, dphib }
    }

    pub fn panels(&self) -> usize {
        self.breaks.len() - 1
    }

    /// Node range of panel k.
    pub fn panel(&self, k: usize) -> std::ops::Range<usize> {
        k * SOL_ORDER..(k + 1) * SOL_ORDER
    }

    /// ∫₀¹ f(y) dy over the cached nodes.
    pub fn integrate(&self, mut f: impl FnMut(usize) -> f64) -> f64 {
        (0..self.x.len()).map(|i| self.w[i] * f(i)).sum()
    }

    /// Cumulative integral ∫_{y_c}^z q, sampled at the Gauss nodes.
    ///
    /// `q` and `dq` are the integrand and its derivative as functions of the
    /// node index (`Node::Gauss`) or break index (`Node::Break`). Interior values
    /// come from quintic Hermite interpolation between panel ends, which is
    /// exact enough because the end values use the full Gauss rule.
    pub fn cumulative<T>(&self, q: impl Fn(Node) -> T, dq: impl Fn(Node) -> T) -> Vec<T>
    where
        T: Scalar + Sub<Output = T>,
    {
        let nb = self.breaks.len();
        let mut at_break = vec![T::default(); nb];
        let mut out = vec![T::default(); self.x.len()];
        let panel_sum = |k: usize| -> T {
            let mut s = T::default();
            for i in self.panel(k) {
                s = s + q(Node::Gauss(i)) * self.w[i];
            }
            s
        };
        for k in self.ic..nb - 1 {
            at_break[k + 1] = at_break[k] + panel_sum(k);
        }
        for k in (0..self.ic).rev() {
            at_break[k] = at_break[k + 1] - panel_sum(k);
        }
        for k in 0..nb - 1 {
            let (b0, b1) = (self.breaks[k], self.breaks[k + 1]);
            let (d0, d1) = (q(Node::Break(k)), q(Node::Break(k + 1)));
            let (s0, s1) = (dq(Node::Break(k)), dq(Node::Break(k + 1)));
            for i in self.panel(k) {
                out[i] = hermite5(b0, b1, at_break[k], at_break[k + 1], d0, d1, s0, s1, self.x[i]).0;
            }
        }
        out
    }

    /// II₃(c) = ∫₀¹ (1/φ₁² - 1) / (u - c)² dy.
    pub fn ii3(&self) -> f64 {
        self.integrate(|i| {
            let g = self.g[i];
            let u = self.umc[i];
            -g * (2.0 + g) / ((1.0 + g) * (1.0 + g) * u * u)
        })
    }

    /// II₁,₂(φ)(c) = ∫₀¹ ∫_{y_c}^z φ(y) (φ₁(y)/φ₁(z)² - 1) dy / (u(z) - c)² dz.
    pub fn ii12<F: RealFn + ?Sized>(&self, phi: &F) -> f64 {
        let (pv, pd) = self.sample(phi);
        let (bv, bd) = self.sample_breaks(phi);
        let q = |n: Node| match n {
            Node::Gauss(i) => C64::new(pv[i] * self.g[i], pv[i]),
            Node::Break(k) => C64::new(bv[k] * self.gb[k], bv[k]),
        };
        let dq = |n: Node| match n {
            Node::Gauss(i) => C64::new(pd[i] * self.g[i] + pv[i] * self.dphi1[i], pd[i]),
            Node::Break(k) => C64::new(bd[k] * self.gb[k] + bv[k] * self.dphib[k], bd[k]),
        };
        // re: ∫ φ(φ₁ - 1), im: ∫ φ
        let cum = self.cumulative(q, dq);
        self.integrate(|i| {
            let g = self.g[i];
            let p1 = 1.0 + g;
            let u = self.umc[i];
            (cum[i].re - cum[i].im * g * (2.0 + g)) / (p1 * p1 * u * u)
        })
    }

    /// II₁(φ) = II₁,₁(φ) + II₁,₂(φ).
    pub fn ii1<F: RealFn + ?Sized>(&self, profile: &ShearProfile, phi: &F, ct: f64, gap: f64) -> Result<f64, SingularError> {
        let int = IntProfile::new(phi, 1024);
        Ok(ii11(profile, &int, ct, gap)? + self.ii12(phi))
    }

    /// E(φ)(c) = ∫_{y_c}^0 φ φ₁ dy.
    pub fn e_op<F: RealFn + ?Sized>(&self, phi: &F) -> f64 {
        let mut acc = 0.0;
        for k in 0..self.ic {
            for i in self.panel(k) {
                acc += self.w[i] * phi.val(self.x[i]) * (1.0 + self.g[i]);
            }
        }
        -acc
    }

    /// Values and derivatives of φ at the Gauss nodes.
    pub fn sample<F: RealFn + ?Sized>(&self, phi: &F) -> (Vec<f64>, Vec<f64>) {
        (self.x.iter().map(|&t| phi.val(t)).collect(), self.x.iter().map(|&t| phi.der(t)).collect())
    }

    pub fn sample_breaks<F: RealFn + ?Sized>(&self, phi: &F) -> (Vec<f64>, Vec<f64>) {
        (self.breaks.iter().map(|&t| phi.val(t)).collect(), self.breaks.iter().map(|&t| phi.der(t)).collect())
    }
}

/// Index into the cached nodes of a [`SolQuad`].
#[derive(Debug, Clone, Copy)]
pub enum Node {
    Gauss(usize),
    Break(usize),
}

/// II₃ for a solution (convenience wrapper).
pub fn ii3(sol: &RayleighSolution) -> f64 {
    SolQuad::new(sol).ii3()
}

/// Z(g)(c̃) = g'(c̃) - g(c̃)/c̃ for even g with g(0) = 0.
pub fn op_z<F: RealFn + ?Sized>(g: &F, ct: f64) -> Result<f64, SingularError> {
    let scale = g.val(ct).abs().max(g.val(-ct).abs()).max(1.0);
    let defect = (g.val(ct) - g.val(-ct)).abs();
    if defect > 1e-10 * scale {
        return Err(SingularError::NotEven { c_tilde: ct, defect });
    }
    let g0 = g.val(0.0);
    if g0.abs() > 1e-12 * scale {
        return Err(SingularError::NonzeroOrigin(g0));
    }
    if ct == 0.0 {
        return Ok(0.0);
    }
    if ct.abs() < 1e-6 {
        return Ok(0.5 * g.der2(0.0) * ct);
    }
    Ok(g.der(ct) - g.val(ct) / ct)
}

/// A^{(z)}(g)(c̃) = (1/(z - c̃)) ∫_{c̃}^z g.
pub fn op_average<T: Scalar>(g: impl Fn(f64) -> T, z: f64, ct: f64) -> T {
    if z == ct {
        return g(z);
    }
    let panels = ((z - ct).abs() * 16.0).ceil().max(1.0) as usize;
    integrate_panels(16, ct, z, panels, &g) * (1.0 / (z - ct))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcs::FnTriple;
    use std::f64::consts::PI;

    #[test]
    fn hilbert_closed_forms() {
        let gap = GAP_FRACTION;
        let h0: f64 = hilbert_pv(|_| 1.0, 1.0, 0.0, gap).unwrap();
        assert!(h0.abs() < 1e-15);
        let h1: f64 = hilbert_pv(|z| z, 1.0, 0.0, gap).unwrap();
        assert!((h1 + 2.0).abs() < 1e-13);
        let h2: f64 = hilbert_pv(|z| z, 1.0, 0.5, gap).unwrap();
        assert!((h2 - (0.5 * 3f64.ln() - 2.0)).abs() < 1e-13);
        assert!(matches!(
            hilbert_pv(|z| z, 1.0, 1.0 - 1e-6, gap),
            Err(SingularError::EndpointTooClose { .. })
        ));
    }

    #[test]
    fn pv_inverse_poiseuille_closed_form() {
        let p = ShearProfile::poiseuille();
        let (pv, dp) = pv_inverse(&p, 0.5, GAP_FRACTION).unwrap();
        assert!((pv + 3f64.ln()).abs() < 1e-13);
        // d/dc [(1/2√c) ln((1-√c)/(1+√c))] at c = 1/4
        let f = |c: f64| (0.5 / c.sqrt()) * ((1.0 - c.sqrt()) / (1.0 + c.sqrt())).ln();
        let h = 1e-5;
        let fd = (f(0.25 - 2.0 * h) - 8.0 * f(0.25 - h) + 8.0 * f(0.25 + h) - f(0.25 + 2.0 * h)) / (12.0 * h);
        assert!((dp - fd).abs() < 1e-8 * fd.abs());
        let st = pv_inverse_stencil(&p, 0.5, 1e-3, GAP_FRACTION).unwrap();
        assert!((dp - st).abs() < 1e-8 * dp.abs());
    }

    #[test]
    fn a1_identity_holds_for_poiseuille() {
        let p = ShearProfile::poiseuille();
        for &ct in &[0.01, 0.2, 0.5, 0.9, 0.99] {
            let cv = CriticalValue::from_c_tilde(&p, ct);
            let a = a1(&p, &cv, GAP_FRACTION).unwrap();
            let rhs = p.u0 - p.u1 - cv.rho * ii2(&p, &cv);
            assert!((a - rhs).abs() < 1e-9, "ct={ct}: {a} vs {rhs}");
        }
    }

    #[test]
    fn ii11_matches_pv_inverse_for_matched_quadratic() {
        // φ = 2y gives Int(φ) = u, so II₁,₁ reduces to P(c)
        let p = ShearProfile::poiseuille();
        let phi = FnTriple { f: |y: f64| 2.0 * y, df: |_| 2.0, d2f: |_| 0.0 };
        let int = IntProfile::new(&phi, 256);
        let v = ii11(&p, &int, 0.5, GAP_FRACTION).unwrap();
        assert!((v + 3f64.ln()).abs() < 1e-10, "{v}");
        let cv = CriticalValue::real(&p, 0.25).unwrap();
        let d = ii11_direct(&p, &int, &cv);
        assert!((d + 3f64.ln()).abs() < 1e-10, "{d}");
    }

    #[test]
    fn int_profile_is_even() {
        let phi = FnTriple { f: |y: f64| (PI * y).cos(), df: |y: f64| -PI * (PI * y).sin(), d2f: |y: f64| -PI * PI * (PI * y).cos() };
        let int = IntProfile::new(&phi, 128);
        assert_eq!(int.val(0.0), 0.0);
        for &y in &[0.1, 0.37, 0.9] {
            assert!((int.val(y) - (PI * y).sin() / PI).abs() < 1e-13);
            assert_eq!(int.val(y), int.val(-y));
            assert_eq!(int.der(y), -int.der(-y));
        }
    }

    #[test]
    fn z_operator_examples() {
        let g2 = FnTriple { f: |c: f64| c * c, df: |c: f64| 2.0 * c, d2f: |_| 2.0 };
        let g4 = FnTriple { f: |c: f64| c.powi(4), df: |c: f64| 4.0 * c.powi(3), d2f: |c: f64| 12.0 * c * c };
        for &c in &[0.0, 1e-8, 0.3, -0.7] {
            assert!((op_z(&g2, c).unwrap() - c).abs() < 1e-15);
            assert!((op_z(&g4, c).unwrap() - 3.0 * c.powi(3)).abs() < 1e-15);
        }
        let odd = FnTriple { f: |c: f64| c.powi(3), df: |c: f64| 3.0 * c * c, d2f: |c: f64| 6.0 * c };
        assert!(matches!(op_z(&odd, 0.5), Err(SingularError::NotEven { .. })));
        let lifted = FnTriple { f: |c: f64| 1.0 + c * c, df: |c: f64| 2.0 * c, d2f: |_| 2.0 };
        assert!(matches!(op_z(&lifted, 0.5), Err(SingularError::NonzeroOrigin(_))));
    }

    #[test]
    fn average_examples() {
        assert!((op_average(|_| 3.0, 1.0, 0.2) - 3.0).abs() < 1e-14);
        assert!((op_average(|z| z, 1.0, 0.0) - 0.5).abs() < 1e-14);
        assert!((op_average(|z| z * z, 0.4, 0.4) - 0.16).abs() < 1e-15);
    }

    #[test]
    fn critical_breaks_cover_the_interval() {
        for &y_c in &[1.0 / 4096.0, 0.01, 0.5, 0.999] {
            let b = critical_breaks(y_c, MAX_PANEL);
            assert_eq!(b[0], 0.0);
            assert_eq!(*b.last().unwrap(), 1.0);
            assert!(b.contains(&y_c));
            assert!(b.windows(2).all(|w| w[1] > w[0]));
        }
    }
}
