//! Independent ground truth: a finite-difference discretization of the
//! Rayleigh operator `R = -(∂²-α²)⁻¹(u'' - u(∂²-α²))` with exact
//! matrix-exponential evolution, a direct solver for the inhomogeneous
//! Rayleigh boundary-value problem at complex `c`, and a stiff-safe IVP
//! integration of the `phi1` equation.
//!
//! Nothing here calls into the Rayleigh fixed point or the singular
//! integrals; the two pipelines only meet in tests.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::interp::locate;
use crate::profiles::{CriticalValue, ShearProfile};
use crate::C64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("grid size n = {0} is below the minimum of 64")]
    GridTooSmall(usize),
    #[error("the discrete operator ∂²-α² is singular")]
    SingularAssembly,
    #[error("non-finite state at t = {0}")]
    StepFailure(f64),
    #[error("|u - c| = {gap:e} at y = {y}: the coefficient is numerically singular")]
    NearSingular { y: f64, gap: f64 },
    #[error("IVP integration failed at y = {0}")]
    IvpFailure(f64),
}

/// Fourth-order finite-difference matrices on a uniform grid of [-1, 1]
/// with Dirichlet conditions eliminated.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    pub n: usize,
    pub alpha: f64,
    /// All n nodes, including the two walls.
    pub y: Vec<f64>,
    /// ∂²-α² on the n-2 interior nodes.
    pub l: DMatrix<f64>,
    /// The Rayleigh operator on interior stream-function values.
    pub r: DMatrix<f64>,
}

/// Interior second-derivative matrix, fourth order, Dirichlet walls.
pub fn laplacian_1d(n: usize) -> DMatrix<f64> {
    let m = n - 2;
    let h = 2.0 / (n - 1) as f64;
    let s = 1.0 / (12.0 * h * h);
    let mut d = DMatrix::zeros(m, m);
    // full-grid node j = i + 1
    let put = |d: &mut DMatrix<f64>, i: usize, j: isize, v: f64| {
        if j >= 1 && (j as usize) <= m {
            d[(i, j as usize - 1)] += v * s;
        }
    };
    for i in 0..m {
        let j = i as isize + 1;
        if i == 0 {
            for (k, v) in [10.0, -15.0, -4.0, 14.0, -6.0, 1.0].iter().enumerate() {
                put(&mut d, i, k as isize, *v);
            }
        } else if i == m - 1 {
            let last = (n - 1) as isize;
            for (k, v) in [10.0, -15.0, -4.0, 14.0, -6.0, 1.0].iter().enumerate() {
                put(&mut d, i, last - k as isize, *v);
            }
        } else {
            for (k, v) in [-1.0, 16.0, -30.0, 16.0, -1.0].iter().enumerate() {
                put(&mut d, i, j - 2 + k as isize, *v);
            }
        }
    }
    d
}

fn assemble_from(y: Vec<f64>, u: &[f64], d2u: &[f64], alpha: f64) -> Result<OperatorMatrix, OracleError> {
    let n = y.len();
    let m = n - 2;
    let mut l = laplacian_1d(n);
    for i in 0..m {
        l[(i, i)] -= alpha * alpha;
    }
    let mut b = l.clone();
    for i in 0..m {
        for j in 0..m {
            b[(i, j)] *= u[i + 1];
        }
        b[(i, i)] -= d2u[i + 1];
    }
    let lu = l.clone().lu();
    let r = lu.solve(&b).ok_or(OracleError::SingularAssembly)?;
    Ok(OperatorMatrix { n, alpha, y, l, r })
}

pub fn uniform_nodes(n: usize) -> Vec<f64> {
    (0..n).map(|j| -1.0 + 2.0 * j as f64 / (n - 1) as f64).collect()
}

/// Assemble R for the full dynamics.
pub fn assemble(profile: &ShearProfile, alpha: f64, n: usize) -> Result<OperatorMatrix, OracleError> {
    if n < 64 {
        return Err(OracleError::GridTooSmall(n));
    }
    let y = uniform_nodes(n);
    let u: Vec<f64> = y.iter().map(|&t| profile.u(t)).collect();
    let d2u: Vec<f64> = y.iter().map(|&t| profile.d2u(t)).collect();
    assemble_from(y, &u, &d2u, alpha)
}

/// Assemble R with the u'' term switched off (pure transport).
pub fn assemble_transport(profile: &ShearProfile, alpha: f64, n: usize) -> Result<OperatorMatrix, OracleError> {
    if n < 64 {
        return Err(OracleError::GridTooSmall(n));
    }
    let y = uniform_nodes(n);
    let u: Vec<f64> = y.iter().map(|&t| profile.u(t)).collect();
    assemble_from(y, &u, &vec![0.0; n], alpha)
}

impl OperatorMatrix {
    pub fn interior(&self) -> &[f64] {
        &self.y[1..self.n - 1]
    }

    /// ψ̂₀ = -(∂²-α²)⁻¹ ω̂₀ on interior nodes.
    pub fn stream_from_vorticity(&self, omega: &[C64]) -> Vec<C64> {
        let lu = self.l.clone().lu();
        let (re, im) = split(omega);
        let xr = lu.solve(&re).expect("L invertible");
        let xi = lu.solve(&im).expect("L invertible");
        (0..omega.len()).map(|i| -C64::new(xr[i], xi[i])).collect()
    }

    /// ω̂ = -(∂²-α²) ψ̂ on interior nodes.
    pub fn vorticity(&self, psi: &[C64]) -> Vec<C64> {
        let (re, im) = split(psi);
        let a = &self.l * re;
        let b = &self.l * im;
        (0..psi.len()).map(|i| -C64::new(a[i], b[i])).collect()
    }

    /// R x for complex x.
    pub fn apply_r(&self, x: &[C64]) -> Vec<C64> {
        let (re, im) = split(x);
        let a = &self.r * re;
        let b = &self.r * im;
        (0..x.len()).map(|i| C64::new(a[i], b[i])).collect()
    }

    /// exp(-i θ R) as the real block [[cos θR, sin θR], [-sin θR, cos θR]].
    pub fn propagator(&self, theta: f64) -> DMatrix<f64> {
        let m = self.n - 2;
        let mut big = DMatrix::zeros(2 * m, 2 * m);
        let tr = &self.r * theta;
        big.view_mut((0, m), (m, m)).copy_from(&tr);
        big.view_mut((m, 0), (m, m)).copy_from(&(-tr));
        big.exp()
    }
}

fn split(x: &[C64]) -> (DVector<f64>, DVector<f64>) {
    (
        DVector::from_iterator(x.len(), x.iter().map(|z| z.re)),
        DVector::from_iterator(x.len(), x.iter().map(|z| z.im)),
    )
}

fn apply_block(e: &DMatrix<f64>, x: &[C64]) -> Vec<C64> {
    let m = x.len();
    let v = DVector::from_iterator(2 * m, x.iter().map(|z| z.re).chain(x.iter().map(|z| z.im)));
    let w = e * v;
    (0..m).map(|i| C64::new(w[i], w[m + i])).collect()
}

/// ψ̂(t) = exp(-iαtR) ψ̂₀ at each requested time (interior values).
///
/// Uniformly spaced samples reuse one step propagator; otherwise each
/// sample gets its own exponential.
pub fn evolve_direct(m: &OperatorMatrix, psi0: &[C64], t_samples: &[f64]) -> Result<Vec<Vec<C64>>, OracleError> {
    let mut out = Vec::with_capacity(t_samples.len());
    if t_samples.is_empty() {
        return Ok(out);
    }
    let uniform = t_samples.len() > 2 && {
        let dt = t_samples[1] - t_samples[0];
        dt > 0.0 && t_samples.windows(2).all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-12 * dt.max(1.0))
    };
    let check = |v: &Vec<C64>, t: f64| -> Result<(), OracleError> {
        if v.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            Ok(())
        } else {
            Err(OracleError::StepFailure(t))
        }
    };
    if uniform {
        let dt = t_samples[1] - t_samples[0];
        let first = if t_samples[0] == 0.0 {
            psi0.to_vec()
        } else {
            apply_block(&m.propagator(m.alpha * t_samples[0]), psi0)
        };
        check(&first, t_samples[0])?;
        let step = m.propagator(m.alpha * dt);
        let mut cur = first;
        out.push(cur.clone());
        for &t in &t_samples[1..] {
            cur = apply_block(&step, &cur);
            check(&cur, t)?;
            out.push(cur.clone());
        }
    } else {
        for &t in t_samples {
            let v = if t == 0.0 { psi0.to_vec() } else { apply_block(&m.propagator(m.alpha * t), psi0) };
            check(&v, t)?;
            out.push(v);
        }
    }
    Ok(out)
}

/// Eigenvalues of R and the ones flagged as discrete spectrum.
#[derive(Debug, Clone)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<C64>,
    pub max_abs_imag: f64,
    pub median_abs_imag: f64,
    /// |Im λ| above which an eigenvalue is reported as discrete.
    pub threshold: f64,
    pub discrete: Vec<C64>,
}

/// Full eigensolve. The threshold is `max(10 × median |Im λ|, floor)`; the
/// floor keeps round-off level imaginary parts from being flagged.
pub fn discrete_spectrum(m: &OperatorMatrix) -> SpectrumReport {
    let ev = m.r.complex_eigenvalues();
    let eigenvalues: Vec<C64> = ev.iter().copied().collect();
    let mut im: Vec<f64> = eigenvalues.iter().map(|z| z.im.abs()).collect();
    im.sort_by(f64::total_cmp);
    let median = im[im.len() / 2];
    let max = *im.last().unwrap();
    let scale = eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let threshold = (10.0 * median).max(1e-6 * scale.max(1.0));
    let discrete = eigenvalues.iter().copied().filter(|z| z.im.abs() > threshold).collect();
    SpectrumReport { eigenvalues, max_abs_imag: max, median_abs_imag: median, threshold, discrete }
}

/// Remove the components of `psi` along the eigenvectors of the given
/// eigenvalues (oblique projection with left eigenvectors).
pub fn project_out(m: &OperatorMatrix, eigenvalues: &[C64], psi: &[C64]) -> Vec<C64> {
    let k = m.n - 2;
    let rc: DMatrix<C64> = m.r.map(|v| C64::new(v, 0.0));
    let mut out = DVector::from_column_slice(psi);
    for &lam in eigenvalues {
        let shift = lam + C64::new(1e-10 * lam.norm().max(1.0), 0.0);
        let a = &rc - DMatrix::from_diagonal_element(k, k, shift);
        let at = a.transpose();
        let lu = a.lu();
        let lut = at.lu();
        let mut v = DVector::from_element(k, C64::new(1.0, 0.0));
        let mut w = v.clone();
        for _ in 0..3 {
            v = lu.solve(&v).unwrap_or(v.clone());
            v /= C64::new(v.norm(), 0.0);
            w = lut.solve(&w).unwrap_or(w.clone());
            w /= C64::new(w.norm(), 0.0);
        }
        let wv = w.dot(&v);
        let wx = w.dot(&out);
        out -= v * (wx / wv);
    }
    out.iter().copied().collect()
}

/// Solution of Φ'' - α²Φ - u''Φ/(u-c) = f on [-1, 1], Φ(±1) = 0.
#[derive(Debug, Clone)]
pub struct BvpSolution {
    pub c: C64,
    pub y: Vec<f64>,
    pub phi: Vec<C64>,
}

impl BvpSolution {
    /// Linear interpolation on the solver mesh.
    pub fn eval(&self, t: f64) -> C64 {
        let k = locate(&self.y, t);
        let s = ((t - self.y[k]) / (self.y[k + 1] - self.y[k])).clamp(0.0, 1.0);
        self.phi[k] * (1.0 - s) + self.phi[k + 1] * s
    }
    pub fn sup_norm(&self) -> f64 {
        self.phi.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Mesh on [-1, 1] graded towards the points where u = Re c.
pub fn graded_mesh(centres: &[f64], h_min: f64, h_max: f64, growth: f64) -> Vec<f64> {
    let mut y = vec![-1.0];
    let mut t = -1.0;
    while t < 1.0 {
        let d = centres.iter().map(|&c| (t - c).abs()).fold(f64::INFINITY, f64::min);
        let h = (h_min + (growth - 1.0) * d).clamp(h_min, h_max);
        t += h;
        if t > 1.0 - 0.5 * h {
            break;
        }
        y.push(t);
    }
    y.push(1.0);
    y
}

/// Second-order finite differences on a graded mesh, tridiagonal solve.
pub fn solve_inhom_bvp(
    profile: &ShearProfile,
    alpha: f64,
    c: C64,
    f: &dyn Fn(f64) -> C64,
) -> Result<BvpSolution, OracleError> {
    let y_c = if c.re <= profile.u0 {
        0.0
    } else {
        crate::profiles::y_of(profile, c.re.min(profile.u1))
    };
    let h_min = (c.im.abs() / 100.0).clamp(1e-7, 1e-3);
    let y = graded_mesh(&[-y_c, y_c], h_min, 2e-3, 1.01);
    let phi = solve_on_mesh(profile, alpha, c, f, &y)?;
    Ok(BvpSolution { c, y, phi })
}

/// Same discretization on a caller-supplied mesh.
pub fn solve_on_mesh(
    profile: &ShearProfile,
    alpha: f64,
    c: C64,
    f: &dyn Fn(f64) -> C64,
    y: &[f64],
) -> Result<Vec<C64>, OracleError> {
    let n = y.len();
    let m = n - 2;
    let mut lower = vec![C64::default(); m];
    let mut diag = vec![C64::default(); m];
    let mut upper = vec![C64::default(); m];
    let mut rhs = vec![C64::default(); m];
    let tol = 1e-14 * (profile.u1 - profile.u0).abs().max(1.0);
    for i in 0..m {
        let j = i + 1;
        let hl = y[j] - y[j - 1];
        let hr = y[j + 1] - y[j];
        let hm = 0.5 * (hl + hr);
        let umc = C64::new(profile.u(y[j]), 0.0) - c;
        if umc.norm() < tol {
            return Err(OracleError::NearSingular { y: y[j], gap: umc.norm() });
        }
        lower[i] = C64::new(1.0 / (hl * hm), 0.0);
        upper[i] = C64::new(1.0 / (hr * hm), 0.0);
        diag[i] = C64::new(-1.0 / (hl * hm) - 1.0 / (hr * hm) - alpha * alpha, 0.0) - profile.d2u(y[j]) / umc;
        rhs[i] = f(y[j]);
    }
    // Thomas algorithm
    for i in 1..m {
        let w = lower[i] / diag[i - 1];
        diag[i] = diag[i] - w * upper[i - 1];
        let prev = rhs[i - 1];
        rhs[i] -= w * prev;
    }
    let mut x = vec![C64::default(); m];
    x[m - 1] = rhs[m - 1] / diag[m - 1];
    for i in (0..m - 1).rev() {
        x[i] = (rhs[i] - upper[i] * x[i + 1]) / diag[i];
    }
    let mut phi = vec![C64::default(); n];
    phi[1..n - 1].copy_from_slice(&x);
    Ok(phi)
}

/// Outcome of the ε → 0 experiment at one real c.
#[derive(Debug, Clone)]
pub struct LimitReport {
    pub eps: Vec<f64>,
    /// sup |Φ(c+iε_k) - Φ(c+iε_{k+1})| on the comparison grid.
    pub cauchy: Vec<f64>,
    pub last_sup: f64,
    /// sup |Φ(c+iε_last) - Φ₊| when a reference is supplied.
    pub direct_error: Option<f64>,
    pub reference_sup: Option<f64>,
}

/// Solve with f = ω̂₀ / (iα(u - c)) along c + iε and measure convergence.
pub fn limiting_absorption(
    profile: &ShearProfile,
    alpha: f64,
    c_real: f64,
    eps: &[f64],
    omega: &dyn Fn(f64) -> C64,
    reference: Option<&dyn Fn(f64) -> C64>,
) -> Result<LimitReport, OracleError> {
    let grid: Vec<f64> = (0..=8000).map(|i| -1.0 + i as f64 / 4000.0).collect();
    let mut samples: Vec<Vec<C64>> = Vec::new();
    for &e in eps {
        let c = C64::new(c_real, e);
        let f = |t: f64| omega(t) / (C64::new(0.0, alpha) * (C64::new(profile.u(t), 0.0) - c));
        let sol = solve_inhom_bvp(profile, alpha, c, &f)?;
        samples.push(grid.iter().map(|&t| sol.eval(t)).collect());
    }
    let sup_diff = |a: &[C64], b: &[C64]| a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    let cauchy = samples.windows(2).map(|w| sup_diff(&w[0], &w[1])).collect();
    let last = samples.last().cloned().unwrap_or_default();
    let last_sup = last.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let (direct_error, reference_sup) = match reference {
        Some(r) => {
            let rv: Vec<C64> = grid.iter().map(|&t| r(t)).collect();
            (Some(sup_diff(&last, &rv)), Some(rv.iter().map(|z| z.norm()).fold(0.0, f64::max)))
        }
        None => (None, None),
    };
    Ok(LimitReport { eps: eps.to_vec(), cauchy, last_sup, direct_error, reference_sup })
}

type State = [C64; 2];

fn rhs(profile: &ShearProfile, alpha: f64, c: C64, y: f64, s: &State) -> State {
    let umc = C64::new(profile.u(y), 0.0) - c;
    [s[1], s[0] * (alpha * alpha) - s[1] * (2.0 * profile.du(y)) / umc]
}

fn axpy(s: &State, k: &[State], coef: &[f64], h: f64) -> State {
    let mut out = *s;
    for (kk, &a) in k.iter().zip(coef) {
        if a != 0.0 {
            out[0] += kk[0] * (a * h);
            out[1] += kk[1] * (a * h);
        }
    }
    out
}

/// Adaptive Dormand-Prince 5(4) from `y0` to `y1`.
fn dopri(
    profile: &ShearProfile,
    alpha: f64,
    c: C64,
    y0: f64,
    y1: f64,
    mut s: State,
    rtol: f64,
) -> Result<State, OracleError> {
    const A: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
    const E: [f64; 7] = [
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ];
    let dir = (y1 - y0).signum();
    let mut y = y0;
    let mut h = 1e-4 * dir;
    let mut steps = 0;
    while (y1 - y) * dir > 0.0 {
        if (y + h - y1) * dir > 0.0 {
            h = y1 - y;
        }
        let mut k = [[C64::default(); 2]; 7];
        k[0] = rhs(profile, alpha, c, y, &s);
        for i in 0..6 {
            let st = axpy(&s, &k[..=i], &A[i], h);
            k[i + 1] = rhs(profile, alpha, c, y + C[i] * h, &st);
        }
        let next = axpy(&s, &k[..6], &A[5], h);
        let mut err: f64 = 0.0;
        for comp in 0..2 {
            let mut e = C64::default();
            for i in 0..7 {
                e += k[i][comp] * (E[i] * h);
            }
            let sc = rtol * (1e-3 + s[comp].norm().max(next[comp].norm()));
            err = err.max(e.norm() / sc);
        }
        if !err.is_finite() {
            return Err(OracleError::IvpFailure(y));
        }
        if err <= 1.0 {
            y += h;
            s = next;
        }
        let fac = (0.9 * err.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
        h *= fac;
        steps += 1;
        if steps > 2_000_000 {
            return Err(OracleError::IvpFailure(y));
        }
    }
    Ok(s)
}

/// φ₁ and ∂_yφ₁ at the requested points from the IVP
/// φ₁'' + 2u'/(u-c) φ₁' = α²φ₁ started at y_c with the local series
/// φ₁ = 1 + α²s²/6 - α²u''(y_c)/(36u'(y_c)) s³.
pub fn ivp_phi1(
    profile: &ShearProfile,
    alpha: f64,
    cv: &CriticalValue,
    targets: &[f64],
    rtol: f64,
) -> Result<Vec<(C64, C64)>, OracleError> {
    let a2 = alpha * alpha;
    let k3 = if cv.du_c > 0.0 { -a2 * cv.d2u_c / (36.0 * cv.du_c) } else { 0.0 };
    let start = |s: f64| -> State {
        [C64::new(1.0 + a2 * s * s / 6.0 + k3 * s.powi(3), 0.0), C64::new(a2 * s / 3.0 + 3.0 * k3 * s * s, 0.0)]
    };
    let s0 = 1e-3f64.min(0.25 * cv.y_c.max(1e-3));
    let mut out = vec![(C64::default(), C64::default()); targets.len()];
    let mut order: Vec<usize> = (0..targets.len()).collect();
    order.sort_by(|&a, &b| targets[a].total_cmp(&targets[b]));
    let (left, right): (Vec<usize>, Vec<usize>) = order.iter().partition(|&&i| targets[i] < cv.y_c);
    let mut y = cv.y_c + s0;
    let mut st = start(s0);
    for &i in &right {
        let t = targets[i];
        if t - cv.y_c < s0 {
            out[i] = (start(t - cv.y_c)[0], start(t - cv.y_c)[1]);
            continue;
        }
        st = dopri(profile, alpha, cv.c, y, t, st, rtol)?;
        y = t;
        out[i] = (st[0], st[1]);
    }
    if cv.y_c > 0.0 {
        let sl = -s0.min(0.5 * cv.y_c);
        let mut y = cv.y_c + sl;
        let mut st = start(sl);
        for &i in left.iter().rev() {
            let t = targets[i];
            if cv.y_c - t < sl.abs() {
                out[i] = (start(t - cv.y_c)[0], start(t - cv.y_c)[1]);
                continue;
            }
            st = dopri(profile, alpha, cv.c, y, t, st, rtol)?;
            y = t;
            out[i] = (st[0], st[1]);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laplacian_is_exact_on_quintics() {
        let n = 65;
        let d = laplacian_1d(n);
        let y = uniform_nodes(n);
        // f vanishes at ±1
        let f = |t: f64| (1.0 - t * t) * (0.3 + t + 0.5 * t * t * t);
        let d2f = |t: f64| {
            // f = 0.3 + t + 0.5t³ - 0.3t² - t³ - 0.5t⁵
            -0.6 + 6.0 * 0.5 * t - 6.0 * t - 10.0 * t * t * t
        };
        let v = DVector::from_iterator(n - 2, y[1..n - 1].iter().map(|&t| f(t)));
        let r = &d * v;
        for i in 0..n - 2 {
            assert!((r[i] - d2f(y[i + 1])).abs() < 1e-9, "row {i}");
        }
    }

    #[test]
    fn couette_spectrum_is_the_velocity_range() {
        // without curvature R is similar to multiplication by u
        let p = ShearProfile::couette();
        let m = assemble(&p, 1.0, 65).unwrap();
        let rep = discrete_spectrum(&m);
        assert!(rep.discrete.is_empty());
        for z in &rep.eigenvalues {
            assert!(z.im.abs() < 1e-8 && z.re.abs() < 1.0 + 1e-8, "{z}");
        }
    }

    #[test]
    fn bvp_conjugation_symmetry() {
        let p = ShearProfile::poiseuille();
        let f = |t: f64| C64::new((std::f64::consts::PI * t).cos() + t, 0.0);
        let a = solve_inhom_bvp(&p, 1.0, C64::new(0.3, 0.05), &f).unwrap();
        let b = solve_inhom_bvp(&p, 1.0, C64::new(0.3, -0.05), &f).unwrap();
        for (x, y) in a.phi.iter().zip(&b.phi) {
            assert!((x - y.conj()).norm() < 1e-12);
        }
    }
}
