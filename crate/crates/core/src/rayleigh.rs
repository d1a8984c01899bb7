//! Regular solution of the homogeneous Rayleigh equation through
//! `phi1 = phi / (u - c)`, the fixed point of `phi1 = 1 + alpha² T phi1`.
//!
//! `T f(y) = ∫_{y_c}^y (u(y')-c)^{-2} ∫_{y_c}^{y'} f(z) (u(z)-c)² dz dy'`.
//! All quadrature weights of `T` are linear in the nodal values of `f`, so
//! they are assembled once per critical value and every Picard sweep is a
//! pair of cumulative passes outward from `y_c`.

use thiserror::Error;

use crate::interp::{hermite5, lagrange_deriv_weights, lagrange_weights, locate, stencil_start};
use crate::profiles::{critical_value, CriticalValue, ShearProfile};
use crate::quad::gauss;
use crate::C64;

const STENCIL: usize = 4;
const NQ: usize = 6;
/// Distance below which a grid node other than `y_c` counts as sitting on it.
pub const REGULARIZATION_WIDTH: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RayleighError {
    #[error("grid node y = {y} lies within {width:e} of the critical point y_c = {y_c}")]
    SingularEvaluation { y: f64, y_c: f64, width: f64 },
    #[error("Picard iteration stalled after {iterations} sweeps (last update {update:e}, contraction {contraction:.3})")]
    NoConvergence { iterations: usize, update: f64, contraction: f64 },
    #[error("alpha must be finite and non-negative, got {0}")]
    InvalidAlpha(f64),
    #[error("y grid must be increasing, start at 0 and end at 1")]
    InvalidGrid,
    #[error(transparent)]
    Profile(#[from] crate::profiles::ProfileError),
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Number of uniform base nodes on [0, 1].
    pub n: usize,
    /// Relative sup-norm tolerance on the Picard update.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { n: 1025, tol: 1e-11, max_iter: 200 }
    }
}

/// u(y) - c without cancellation near y_c.
pub fn u_minus_c(profile: &ShearProfile, cv: &CriticalValue, y: f64) -> C64 {
    let d = (y - cv.y_c) * profile.slope_between(cv.y_c, y);
    C64::new(d + cv.c_r - cv.c.re, -cv.c.im)
}

/// Uniform grid on [0, 1] with `y_c` inserted.
///
/// An interior node closer than h/8 to `y_c` is replaced by it. When `y_c`
/// sits within eight cells of the wall the first cells are replaced by nodes
/// graded geometrically from `y_c`, which resolves the scale `y_c` that
/// `u - c` develops there.
pub fn rayleigh_grid(y_c: f64, n: usize) -> (Vec<f64>, usize) {
    let h = 1.0 / (n - 1) as f64;
    let mut y: Vec<f64> = (0..n).map(|j| j as f64 * h).collect();
    if y_c > 0.0 && y_c < 8.0 * h {
        let edge = 8.0 * h;
        let mut graded = vec![0.0, 0.5 * y_c, y_c];
        let mut t = 1.5 * y_c;
        while t < edge / 1.25 {
            graded.push(t);
            t *= 1.5;
        }
        graded.extend(y.iter().copied().filter(|&v| v >= edge - 0.5 * h));
        y = graded;
    } else {
        let k = (y_c / h).round() as usize;
        let k = k.min(n - 1);
        if (y[k] - y_c).abs() <= h / 8.0 && k != 0 && k != n - 1 {
            y[k] = y_c;
        } else if y[k] != y_c {
            let pos = y.partition_point(|&v| v < y_c);
            y.insert(pos, y_c);
        }
    }
    let ic = y.iter().position(|&v| v == y_c).expect("y_c inserted");
    (y, ic)
}

#[derive(Debug, Clone)]
struct CellMap {
    s: usize,
    a: [C64; STENCIL],
    r: C64,
    e: [C64; STENCIL],
}

/// Precomputed linear maps of `T` on a fixed grid and critical value.
#[derive(Debug, Clone)]
pub struct TOperator {
    pub y: Vec<f64>,
    pub ic: usize,
    w: Vec<C64>,
    cells: Vec<CellMap>,
}

impl TOperator {
    pub fn new(profile: &ShearProfile, cv: &CriticalValue, y: Vec<f64>, ic: usize) -> Self {
        let n = y.len();
        let rule = gauss(NQ);
        let w: Vec<C64> = y.iter().map(|&t| u_minus_c(profile, cv, t).powi(2)).collect();
        let mut cells = Vec::with_capacity(n - 1);
        let mut lw = [0.0; STENCIL];
        for k in 0..n - 1 {
            let s = stencil_start(n, k, STENCIL);
            let xs = &y[s..s + STENCIL];
            let (lo, hi) = (y[k], y[k + 1]);
            let h = hi - lo;
            let near = if k >= ic { lo } else { hi };
            let mut a = [C64::default(); STENCIL];
            let mut e = [C64::default(); STENCIL];
            let mut r = C64::default();
            for (&xq, &wq) in rule.x.iter().zip(&rule.w) {
                let x = lo + h * xq;
                let wx = u_minus_c(profile, cv, x).powi(2);
                lagrange_weights(xs, x, &mut lw);
                for j in 0..STENCIL {
                    a[j] += wx * (lw[j] * wq * h);
                }
                // ∫_{near}^{x} L_j w, signed
                let sub = x - near;
                let mut b = [C64::default(); STENCIL];
                for (&xs2, &ws2) in rule.x.iter().zip(&rule.w) {
                    let z = near + sub * xs2;
                    let wz = u_minus_c(profile, cv, z).powi(2);
                    lagrange_weights(xs, z, &mut lw);
                    for j in 0..STENCIL {
                        b[j] += wz * (lw[j] * ws2 * sub);
                    }
                }
                let rq = C64::new(wq * h, 0.0) / wx;
                r += rq;
                for j in 0..STENCIL {
                    e[j] += rq * b[j];
                }
            }
            cells.push(CellMap { s, a, r, e });
        }
        Self { y, ic, w, cells }
    }

    /// Returns (T f, T_{2,2} f) at the nodes, where `T_{2,2} f = ∂_y T f`.
    pub fn apply(&self, f: &[C64]) -> (Vec<C64>, Vec<C64>) {
        let n = self.y.len();
        let mut inner = vec![C64::default(); n];
        let mut tf = vec![C64::default(); n];
        let dot = |c: &CellMap, v: &[C64; STENCIL]| -> C64 {
            let mut acc = C64::default();
            for j in 0..STENCIL {
                acc += v[j] * f[c.s + j];
            }
            acc
        };
        for k in self.ic..n - 1 {
            let c = &self.cells[k];
            inner[k + 1] = inner[k] + dot(c, &c.a);
            tf[k + 1] = tf[k] + c.r * inner[k] + dot(c, &c.e);
        }
        for k in (0..self.ic).rev() {
            let c = &self.cells[k];
            inner[k] = inner[k + 1] - dot(c, &c.a);
            tf[k] = tf[k + 1] - (c.r * inner[k + 1] + dot(c, &c.e));
        }
        let t22 = inner
            .iter()
            .zip(&self.w)
            .enumerate()
            .map(|(i, (&ii, &w))| if i == self.ic { C64::default() } else { ii / w })
            .collect();
        (tf, t22)
    }

    /// Inner integral ∫_{y_c}^y f (u-c)² at the nodes.
    fn inner(&self, f: &[C64]) -> Vec<C64> {
        let n = self.y.len();
        let mut inner = vec![C64::default(); n];
        for k in self.ic..n - 1 {
            let c = &self.cells[k];
            let mut acc = C64::default();
            for j in 0..STENCIL {
                acc += c.a[j] * f[c.s + j];
            }
            inner[k + 1] = inner[k] + acc;
        }
        for k in (0..self.ic).rev() {
            let c = &self.cells[k];
            let mut acc = C64::default();
            for j in 0..STENCIL {
                acc += c.a[j] * f[c.s + j];
            }
            inner[k] = inner[k + 1] - acc;
        }
        inner
    }
}

/// Apply T to nodal samples `f` on the standard grid for `cv`.
pub fn apply_t(profile: &ShearProfile, cv: &CriticalValue, f: &[C64], n: usize) -> Vec<C64> {
    let (y, ic) = rayleigh_grid(cv.y_c, n);
    assert_eq!(y.len(), f.len(), "f must be sampled on rayleigh_grid(y_c, n)");
    TOperator::new(profile, cv, y, ic).apply(f).0
}

/// Converged regular solution for one (alpha, c).
#[derive(Debug, Clone)]
pub struct RayleighSolution {
    pub alpha: f64,
    pub c: CriticalValue,
    pub profile: ShearProfile,
    pub y: Vec<f64>,
    pub ic: usize,
    /// phi1 - 1, kept separately for relative accuracy near y_c.
    pub phi1m1: Vec<C64>,
    pub phi1: Vec<C64>,
    pub dphi1: Vec<C64>,
    pub d2phi1: Vec<C64>,
    pub phi: Vec<C64>,
    /// 𝓕 = ∂_y phi1 / phi1.
    pub f: Vec<C64>,
    pub iterations: usize,
    pub last_update: f64,
    pub contraction: f64,
    pub fixed_point_residual: f64,
    pub tol: f64,
    pub base_n: usize,
}

pub fn solve_phi1(
    profile: &ShearProfile,
    alpha: f64,
    cv: &CriticalValue,
    opts: &SolverOptions,
) -> Result<RayleighSolution, RayleighError> {
    let (y, ic) = rayleigh_grid(cv.y_c, opts.n);
    solve_on_grid(profile, alpha, cv, y, ic, opts)
}

/// Solve on a caller-supplied grid on [0, 1]; `y_c` is inserted if missing.
pub fn solve_phi1_on(
    profile: &ShearProfile,
    alpha: f64,
    cv: &CriticalValue,
    grid: &[f64],
    opts: &SolverOptions,
) -> Result<RayleighSolution, RayleighError> {
    if grid.len() < 5 || grid[0] != 0.0 || *grid.last().unwrap() != 1.0 || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(RayleighError::InvalidGrid);
    }
    let mut y = grid.to_vec();
    if cv.is_real() {
        if let Some(&bad) = y.iter().find(|&&t| t != cv.y_c && (t - cv.y_c).abs() < REGULARIZATION_WIDTH) {
            return Err(RayleighError::SingularEvaluation { y: bad, y_c: cv.y_c, width: REGULARIZATION_WIDTH });
        }
    }
    if !y.contains(&cv.y_c) {
        let pos = y.partition_point(|&v| v < cv.y_c);
        y.insert(pos, cv.y_c);
    }
    let ic = y.iter().position(|&v| v == cv.y_c).unwrap();
    solve_on_grid(profile, alpha, cv, y, ic, opts)
}

fn sup(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn solve_on_grid(
    profile: &ShearProfile,
    alpha: f64,
    cv: &CriticalValue,
    y: Vec<f64>,
    ic: usize,
    opts: &SolverOptions,
) -> Result<RayleighSolution, RayleighError> {
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(RayleighError::InvalidAlpha(alpha));
    }
    let op = TOperator::new(profile, cv, y, ic);
    let n = op.y.len();
    let a2 = alpha * alpha;
    let one = C64::new(1.0, 0.0);
    let mut g = vec![C64::default(); n];
    let mut iterations = 0;
    let mut update = 0.0;
    let mut prev_update = f64::NAN;
    let mut contraction = 0.0;
    if a2 > 0.0 {
        loop {
            iterations += 1;
            let phi1: Vec<C64> = g.iter().map(|&v| v + one).collect();
            let (tf, _) = op.apply(&phi1);
            let next: Vec<C64> = tf.iter().map(|&v| v * a2).collect();
            update = next.iter().zip(&g).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            if prev_update.is_finite() && prev_update > 0.0 {
                contraction = update / prev_update;
            }
            prev_update = update;
            g = next;
            let scale = 1.0f64.max(1.0 + sup(&g));
            if update < opts.tol * scale {
                break;
            }
            if iterations >= opts.max_iter || !update.is_finite() {
                return Err(RayleighError::NoConvergence { iterations, update, contraction });
            }
        }
    }
    let phi1: Vec<C64> = g.iter().map(|&v| v + one).collect();
    let (tf, t22) = op.apply(&phi1);
    let fixed_point_residual = tf
        .iter()
        .zip(&g)
        .map(|(t, gg)| (t * a2 - gg).norm())
        .fold(0.0, f64::max);
    let inner = op.inner(&phi1);
    let dphi1: Vec<C64> = t22.iter().map(|&v| v * a2).collect();
    let mut d2phi1 = vec![C64::default(); n];
    let mut phi = vec![C64::default(); n];
    for i in 0..n {
        let umc = u_minus_c(profile, cv, op.y[i]);
        phi[i] = umc * phi1[i];
        d2phi1[i] = if i == ic {
            if cv.is_real() {
                if cv.du_c > 0.0 {
                    C64::new(a2 / 3.0, 0.0)
                } else {
                    C64::new(a2 / 5.0, 0.0)
                }
            } else {
                phi1[i] * a2
            }
        } else {
            let du = profile.du(op.y[i]);
            phi1[i] * a2 - inner[i] * (2.0 * du * a2) / (umc * op.w[i])
        };
    }
    let f = dphi1.iter().zip(&phi1).map(|(d, p)| d / p).collect();
    Ok(RayleighSolution {
        alpha,
        c: *cv,
        profile: profile.clone(),
        y: op.y,
        ic,
        phi1m1: g,
        phi1,
        dphi1,
        d2phi1,
        phi,
        f,
        iterations,
        last_update: update,
        contraction,
        fixed_point_residual,
        tol: opts.tol,
        base_n: opts.n,
    })
}

impl RayleighSolution {
    fn hermite(&self, vals: &[C64], t: f64) -> (C64, C64) {
        let k = locate(&self.y, t);
        hermite5(
            self.y[k],
            self.y[k + 1],
            vals[k],
            vals[k + 1],
            self.dphi1[k],
            self.dphi1[k + 1],
            self.d2phi1[k],
            self.d2phi1[k + 1],
            t,
        )
    }
    /// phi1(t) - 1.
    pub fn phi1m1_at(&self, t: f64) -> C64 {
        self.hermite(&self.phi1m1, t).0
    }
    pub fn phi1_at(&self, t: f64) -> C64 {
        self.phi1m1_at(t) + 1.0
    }
    /// (phi1 - 1, ∂_y phi1) at t.
    pub fn eval(&self, t: f64) -> (C64, C64) {
        self.hermite(&self.phi1m1, t)
    }
    pub fn u_minus_c(&self, t: f64) -> C64 {
        u_minus_c(&self.profile, &self.c, t)
    }
    /// phi = (u - c) phi1.
    pub fn phi_at(&self, t: f64) -> C64 {
        self.u_minus_c(t) * self.phi1_at(t)
    }
    /// Maximum over nodes of |phi1 - 1 - alpha² T phi1|.
    pub fn residual(&self) -> f64 {
        self.fixed_point_residual
    }
}

/// (phi1(0), ∂_y phi1(0)), the pair entering J(c).
pub fn boundary_values(sol: &RayleighSolution) -> (C64, C64) {
    (sol.phi1[0], sol.dphi1[0])
}

#[derive(Debug, Clone)]
pub struct LogDerivatives {
    pub f: Vec<C64>,
    pub g: Vec<C64>,
    pub g1: Vec<C64>,
    /// sup |𝓕' + 𝓕² + 2u'/(u-c) 𝓕 - alpha²| away from a (2Δy)-collar of y_c.
    pub riccati_residual: f64,
    /// ∂_y 𝓕 at y_c.
    pub slope_at_yc: C64,
}

/// Five-point derivative of nodal samples at node i.
pub fn node_derivative(y: &[f64], v: &[C64], i: usize) -> C64 {
    let m = 5;
    let s = i.saturating_sub(2).min(y.len() - m);
    let mut w = [0.0; 5];
    lagrange_deriv_weights(&y[s..s + m], y[i], &mut w);
    (0..m).map(|j| v[s + j] * w[j]).sum()
}

/// 𝓕, 𝓖 = ∂_c phi1 / phi1 and 𝓖₁ = 𝓕/u'(y_c) + 𝓖.
///
/// 𝓖 comes from centred differences over solves at c ± h_c with
/// h_c = 1e-4 (u(1) - u(0)), one-sided next to the ends of Ran u.
pub fn log_derivatives(sol: &RayleighSolution) -> Result<LogDerivatives, RayleighError> {
    let p = &sol.profile;
    let hc = 1e-4 * (p.u1 - p.u0);
    let opts = SolverOptions { n: sol.base_n, tol: sol.tol, max_iter: 200 };
    let shifted = |d: f64| -> Result<RayleighSolution, RayleighError> {
        let cv = critical_value(p, sol.c.c + d, sol.c.domain)?;
        solve_phi1(p, sol.alpha, &cv, &opts)
    };
    let cr = sol.c.c_r;
    let (stencil, weights): (Vec<f64>, Vec<f64>) = if cr - hc < p.u0 {
        (vec![0.0, hc, 2.0 * hc], vec![-1.5, 2.0, -0.5])
    } else if cr + hc > p.u1 {
        (vec![-2.0 * hc, -hc, 0.0], vec![0.5, -2.0, 1.5])
    } else {
        (vec![-hc, hc], vec![-0.5, 0.5])
    };
    let sols: Vec<Option<RayleighSolution>> = stencil
        .iter()
        .map(|&d| if d == 0.0 { Ok(None) } else { shifted(d).map(Some) })
        .collect::<Result<_, _>>()?;
    let n = sol.y.len();
    let mut g = vec![C64::default(); n];
    for i in 0..n {
        let t = sol.y[i];
        let mut acc = C64::default();
        for (s, &w) in sols.iter().zip(&weights) {
            let v = match s {
                Some(s) => s.phi1m1_at(t),
                None => sol.phi1m1[i],
            };
            acc += v * w;
        }
        g[i] = acc / (hc * sol.phi1[i]);
    }
    g[sol.ic] = C64::default();
    let f = sol.f.clone();
    let g1 = if sol.c.du_c > 0.0 {
        f.iter().zip(&g).map(|(ff, gg)| ff / sol.c.du_c + gg).collect()
    } else {
        g.clone()
    };
    let dy = 1.0 / (sol.base_n - 1) as f64;
    let a2 = sol.alpha * sol.alpha;
    let mut riccati_residual: f64 = 0.0;
    for i in 0..n {
        let t = sol.y[i];
        if (t - sol.c.y_c).abs() <= 2.0 * dy {
            continue;
        }
        let df = node_derivative(&sol.y, &f, i);
        let coef = 2.0 * p.du(t) / sol.u_minus_c(t);
        let r = df + f[i] * f[i] + coef * f[i] - a2;
        riccati_residual = riccati_residual.max(r.norm());
    }
    let slope_at_yc = node_derivative(&sol.y, &f, sol.ic);
    Ok(LogDerivatives { f, g, g1, riccati_residual, slope_at_yc })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::CriticalValue;

    #[test]
    fn grid_contains_critical_point() {
        for &yc in &[0.0, 1e-5, 0.003, 0.25, 0.5000001, 1.0] {
            let (y, ic) = rayleigh_grid(yc, 129);
            assert_eq!(y[ic], yc);
            assert_eq!(y[0], 0.0);
            assert_eq!(*y.last().unwrap(), 1.0);
            assert!(y.windows(2).all(|w| w[1] > w[0]), "yc = {yc}");
        }
    }

    #[test]
    fn t_of_zero_is_zero_and_vanishes_at_yc() {
        let p = ShearProfile::poiseuille();
        let cv = CriticalValue::real(&p, 0.25).unwrap();
        let (y, ic) = rayleigh_grid(cv.y_c, 257);
        let op = TOperator::new(&p, &cv, y.clone(), ic);
        let zero = vec![C64::default(); y.len()];
        assert!(op.apply(&zero).0.iter().all(|v| v.norm() == 0.0));
        let ones = vec![C64::new(1.0, 0.0); y.len()];
        assert_eq!(op.apply(&ones).0[ic].norm(), 0.0);
    }

    #[test]
    fn alpha_zero_gives_unit_solution() {
        let p = ShearProfile::poiseuille();
        let cv = CriticalValue::real(&p, 0.3).unwrap();
        let s = solve_phi1(&p, 0.0, &cv, &SolverOptions { n: 129, ..Default::default() }).unwrap();
        assert!(s.phi1.iter().all(|v| (v - 1.0).norm() == 0.0));
        assert!(s.f.iter().all(|v| v.norm() == 0.0));
        assert_eq!(boundary_values(&s), (C64::new(1.0, 0.0), C64::default()));
    }

    #[test]
    fn user_grid_too_close_to_yc_is_rejected() {
        let p = ShearProfile::poiseuille();
        let cv = CriticalValue::real(&p, 0.25).unwrap();
        let grid = [0.0, 0.25, 0.5 + 1e-12, 0.75, 1.0];
        let r = solve_phi1_on(&p, 1.0, &cv, &grid, &SolverOptions::default());
        assert!(matches!(r, Err(RayleighError::SingularEvaluation { .. })));
    }
}
