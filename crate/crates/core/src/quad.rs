//! Gauss-Legendre rules mapped to `[0, 1]` and a few composite helpers.

use std::num::NonZeroUsize;
use std::ops::{Add, Mul};
use std::sync::OnceLock;

use gauss_quad::legendre::GaussLegendre;

const MAX_ORDER: usize = 64;

/// Nodes and weights on the unit interval.
#[derive(Debug, Clone)]
pub struct Rule {
    pub x: Vec<f64>,
    pub w: Vec<f64>,
}

static RULES: [OnceLock<Rule>; MAX_ORDER + 1] = [const { OnceLock::new() }; MAX_ORDER + 1];

/// Gauss-Legendre rule with `n` points on `[0, 1]`, cached per order.
pub fn gauss(n: usize) -> &'static Rule {
    assert!((1..=MAX_ORDER).contains(&n), "unsupported Gauss order {n}");
    RULES[n].get_or_init(|| {
        let gl = GaussLegendre::new(NonZeroUsize::new(n).unwrap());
        let mut pairs: Vec<(f64, f64)> = gl.iter().map(|(x, w)| (*x, *w)).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        Rule {
            x: pairs.iter().map(|p| 0.5 * (p.0 + 1.0)).collect(),
            w: pairs.iter().map(|p| 0.5 * p.1).collect(),
        }
    })
}

/// Anything that can be summed with real weights (`f64`, `Complex64`).
pub trait Scalar: Copy + Default + Add<Output = Self> + Mul<f64, Output = Self> {}
impl<T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>> Scalar for T {}

/// Single-panel Gauss rule on `[a, b]`.
pub fn integrate<T: Scalar>(n: usize, a: f64, b: f64, mut f: impl FnMut(f64) -> T) -> T {
    let r = gauss(n);
    let h = b - a;
    let mut acc = T::default();
    for (x, w) in r.x.iter().zip(&r.w) {
        acc = acc + f(a + h * x) * (w * h);
    }
    acc
}

/// Composite Gauss rule with `panels` equal panels on `[a, b]`.
pub fn integrate_panels<T: Scalar>(
    n: usize,
    a: f64,
    b: f64,
    panels: usize,
    mut f: impl FnMut(f64) -> T,
) -> T {
    let h = (b - a) / panels as f64;
    let mut acc = T::default();
    for p in 0..panels {
        let lo = a + h * p as f64;
        acc = acc + integrate(n, lo, lo + h, &mut f);
    }
    acc
}

/// Composite Gauss rule over consecutive breakpoints.
pub fn integrate_breaks<T: Scalar>(n: usize, breaks: &[f64], mut f: impl FnMut(f64) -> T) -> T {
    let mut acc = T::default();
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            acc = acc + integrate(n, w[0], w[1], &mut f);
        }
    }
    acc
}

/// Panels on `[a, b]` graded geometrically towards `a` (ratio `q`, `levels` levels),
/// then split evenly into `panels` pieces on the remaining outer part.
pub fn graded_breaks(a: f64, b: f64, q: f64, levels: usize, panels: usize) -> Vec<f64> {
    let len = b - a;
    let mut inner = Vec::with_capacity(levels + panels + 1);
    inner.push(a);
    let mut scale = q.powi(levels as i32);
    for _ in 0..levels {
        inner.push(a + len * scale);
        scale /= q;
    }
    let start = *inner.last().unwrap();
    let start = if levels == 0 { a } else { start };
    let h = (b - start) / panels as f64;
    for p in 1..=panels {
        inner.push(start + h * p as f64);
    }
    inner
}

/// Composite trapezoid weights for arbitrary sorted nodes.
pub fn trapezoid_weights(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut w = vec![0.0; n];
    for i in 0..n.saturating_sub(1) {
        let h = x[i + 1] - x[i];
        w[i] += 0.5 * h;
        w[i + 1] += 0.5 * h;
    }
    w
}

/// Composite Simpson weights on a uniform grid with an odd number of nodes;
/// falls back to a trapezoid tail when the count is even.
pub fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![0.0; n];
    if n < 3 {
        return trapezoid_weights(&(0..n).map(|i| i as f64 * h).collect::<Vec<_>>());
    }
    let m = if n % 2 == 1 { n } else { n - 1 };
    for i in (0..m - 1).step_by(2) {
        w[i] += h / 3.0;
        w[i + 1] += 4.0 * h / 3.0;
        w[i + 2] += h / 3.0;
    }
    if m < n {
        w[n - 2] += 0.5 * h;
        w[n - 1] += 0.5 * h;
    }
    w
}
