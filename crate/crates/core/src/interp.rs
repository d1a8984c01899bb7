//! Local polynomial interpolation on sorted, possibly non-uniform nodes.

use crate::quad::Scalar;
use std::ops::Sub;

/// Index `k` of the cell `[x[k], x[k+1]]` containing `t` (clamped to the grid).
pub fn locate(x: &[f64], t: f64) -> usize {
    let n = x.len();
    debug_assert!(n >= 2);
    let k = x.partition_point(|&xi| xi <= t);
    k.saturating_sub(1).min(n - 2)
}

/// First index of an `m`-point stencil centred on cell `k`, clamped to the grid.
pub fn stencil_start(n: usize, k: usize, m: usize) -> usize {
    (k + 1).saturating_sub(m / 2).min(n.saturating_sub(m))
}

/// Lagrange basis weights for evaluating at `t` from nodes `xs`.
pub fn lagrange_weights(xs: &[f64], t: f64, out: &mut [f64]) {
    for (j, o) in out.iter_mut().enumerate().take(xs.len()) {
        let mut l = 1.0;
        for (m, &xm) in xs.iter().enumerate() {
            if m != j {
                l *= (t - xm) / (xs[j] - xm);
            }
        }
        *o = l;
    }
}

/// Weights of the derivative of the Lagrange interpolant at `t`.
pub fn lagrange_deriv_weights(xs: &[f64], t: f64, out: &mut [f64]) {
    let n = xs.len();
    for j in 0..n {
        let mut denom = 1.0;
        for m in 0..n {
            if m != j {
                denom *= xs[j] - xs[m];
            }
        }
        let mut s = 0.0;
        for k in 0..n {
            if k == j {
                continue;
            }
            let mut p = 1.0;
            for m in 0..n {
                if m != j && m != k {
                    p *= t - xs[m];
                }
            }
            s += p;
        }
        out[j] = s / denom;
    }
}

/// Local `m`-point Lagrange interpolation of samples `f` on nodes `x` at `t`.
pub fn lagrange_eval<T: Scalar>(x: &[f64], f: &[T], t: f64, m: usize) -> T {
    let k = locate(x, t);
    let s = stencil_start(x.len(), k, m);
    let mut w = [0.0; 8];
    lagrange_weights(&x[s..s + m], t, &mut w[..m]);
    let mut acc = T::default();
    for j in 0..m {
        acc = acc + f[s + j] * w[j];
    }
    acc
}

/// Local `m`-point Lagrange derivative of samples `f` at `t`.
pub fn lagrange_deriv<T: Scalar>(x: &[f64], f: &[T], t: f64, m: usize) -> T {
    let k = locate(x, t);
    let s = stencil_start(x.len(), k, m);
    let mut w = [0.0; 8];
    lagrange_deriv_weights(&x[s..s + m], t, &mut w[..m]);
    let mut acc = T::default();
    for j in 0..m {
        acc = acc + f[s + j] * w[j];
    }
    acc
}

/// Quintic Hermite interpolation from values, first and second derivatives.
#[allow(clippy::too_many_arguments)]
pub fn hermite5<T: Scalar + Sub<Output = T>>(
    x0: f64,
    x1: f64,
    f0: T,
    f1: T,
    d0: T,
    d1: T,
    s0: T,
    s1: T,
    x: f64,
) -> (T, T) {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let t4 = t3 * t;
    let t5 = t4 * t;
    let h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
    let h1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
    let h2 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5);
    let h3 = 0.5 * (t3 - 2.0 * t4 + t5);
    let h4 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
    let h5 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
    let g0 = -30.0 * t2 + 60.0 * t3 - 30.0 * t4;
    let g1 = 1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4;
    let g2 = 0.5 * (2.0 * t - 9.0 * t2 + 12.0 * t3 - 5.0 * t4);
    let g3 = 0.5 * (3.0 * t2 - 8.0 * t3 + 5.0 * t4);
    let g4 = -12.0 * t2 + 28.0 * t3 - 15.0 * t4;
    let g5 = 30.0 * t2 - 60.0 * t3 + 30.0 * t4;
    let val = f0 * h0 + d0 * (h * h1) + s0 * (h * h * h2) + s1 * (h * h * h3) + d1 * (h * h4) + f1 * h5;
    let der = f0 * (g0 / h) + d0 * g1 + s0 * (h * g2) + s1 * (h * g3) + d1 * g4 + f1 * (g5 / h);
    (val, der)
}
