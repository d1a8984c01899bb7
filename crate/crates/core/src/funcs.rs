//! Real functions of `y` with exact derivatives, used for vorticity data and
//! test functions.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::profiles::ShearProfile;

/// A real function with its first two derivatives.
pub trait RealFn: Sync {
    fn val(&self, y: f64) -> f64;
    fn der(&self, y: f64) -> f64;
    fn der2(&self, y: f64) -> f64;
}

/// Config-level description of a smooth function on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionSpec {
    /// sum a_k y^k
    Poly { coeffs: Vec<f64> },
    /// amp * sin(k pi y)
    SinPi { k: f64, #[serde(default = "one")] amp: f64 },
    /// amp * cos(k pi y)
    CosPi { k: f64, #[serde(default = "one")] amp: f64 },
    Sum { terms: Vec<FunctionSpec> },
    Product { factors: Vec<FunctionSpec> },
}

fn one() -> f64 {
    1.0
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl FunctionSpec {
    pub fn sin_pi(k: f64) -> Self {
        Self::SinPi { k, amp: 1.0 }
    }
    pub fn cos_pi(k: f64) -> Self {
        Self::CosPi { k, amp: 1.0 }
    }
    pub fn constant(a: f64) -> Self {
        Self::Poly { coeffs: vec![a] }
    }

    /// n-th derivative at y.
    pub fn deriv(&self, n: usize, y: f64) -> f64 {
        match self {
            Self::Poly { coeffs } => coeffs
                .iter()
                .enumerate()
                .skip(n)
                .map(|(k, &a)| {
                    let fall: f64 = (0..n).map(|i| (k - i) as f64).product();
                    a * fall * y.powi((k - n) as i32)
                })
                .sum(),
            Self::SinPi { k, amp } => {
                let w = k * PI;
                amp * w.powi(n as i32) * (w * y + n as f64 * PI / 2.0).sin()
            }
            Self::CosPi { k, amp } => {
                let w = k * PI;
                amp * w.powi(n as i32) * (w * y + n as f64 * PI / 2.0).cos()
            }
            Self::Sum { terms } => terms.iter().map(|t| t.deriv(n, y)).sum(),
            Self::Product { factors } => match factors.split_first() {
                None => {
                    if n == 0 {
                        1.0
                    } else {
                        0.0
                    }
                }
                Some((head, rest)) => {
                    let tail = Self::Product { factors: rest.to_vec() };
                    (0..=n).map(|j| binom(n, j) * head.deriv(j, y) * tail.deriv(n - j, y)).sum()
                }
            },
        }
    }

    pub fn eval(&self, y: f64) -> f64 {
        self.deriv(0, y)
    }
}

impl RealFn for FunctionSpec {
    fn val(&self, y: f64) -> f64 {
        self.deriv(0, y)
    }
    fn der(&self, y: f64) -> f64 {
        self.deriv(1, y)
    }
    fn der2(&self, y: f64) -> f64 {
        self.deriv(2, y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    Odd,
    Even,
}

/// Odd or even part of a function: (f(y) ∓ f(-y)) / 2.
#[derive(Debug, Clone)]
pub struct ParityPart<F> {
    pub f: F,
    pub parity: Parity,
}

impl<F: RealFn> ParityPart<F> {
    pub fn new(f: F, parity: Parity) -> Self {
        Self { f, parity }
    }
    fn combine(&self, a: f64, b: f64, flip: bool) -> f64 {
        let odd = matches!(self.parity, Parity::Odd) ^ flip;
        if odd {
            0.5 * (a - b)
        } else {
            0.5 * (a + b)
        }
    }
}

impl<F: RealFn> RealFn for ParityPart<F> {
    fn val(&self, y: f64) -> f64 {
        self.combine(self.f.val(y), self.f.val(-y), false)
    }
    fn der(&self, y: f64) -> f64 {
        // d/dy f(-y) = -f'(-y): the parity of the derivative flips.
        self.combine(self.f.der(y), self.f.der(-y), true)
    }
    fn der2(&self, y: f64) -> f64 {
        self.combine(self.f.der2(y), self.f.der2(-y), false)
    }
}

/// u''(y) f(y).
pub struct CurvatureWeighted<'a, F: ?Sized> {
    pub f: &'a F,
    pub profile: &'a ShearProfile,
}

impl<F: RealFn + ?Sized> RealFn for CurvatureWeighted<'_, F> {
    fn val(&self, y: f64) -> f64 {
        self.profile.d2u(y) * self.f.val(y)
    }
    fn der(&self, y: f64) -> f64 {
        self.profile.d3u(y) * self.f.val(y) + self.profile.d2u(y) * self.f.der(y)
    }
    fn der2(&self, y: f64) -> f64 {
        let p = self.profile;
        p.d4u(y) * self.f.val(y) + 2.0 * p.d3u(y) * self.f.der(y) + p.d2u(y) * self.f.der2(y)
    }
}

/// Plain closures with explicit derivatives.
pub struct FnTriple<A, B, C> {
    pub f: A,
    pub df: B,
    pub d2f: C,
}

impl<A, B, C> RealFn for FnTriple<A, B, C>
where
    A: Fn(f64) -> f64 + Sync,
    B: Fn(f64) -> f64 + Sync,
    C: Fn(f64) -> f64 + Sync,
{
    fn val(&self, y: f64) -> f64 {
        (self.f)(y)
    }
    fn der(&self, y: f64) -> f64 {
        (self.df)(y)
    }
    fn der2(&self, y: f64) -> f64 {
        (self.d2f)(y)
    }
}

impl<T: RealFn + ?Sized> RealFn for &T {
    fn val(&self, y: f64) -> f64 {
        (**self).val(y)
    }
    fn der(&self, y: f64) -> f64 {
        (**self).der(y)
    }
    fn der2(&self, y: f64) -> f64 {
        (**self).der2(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule_matches_closed_form() {
        // y^2 sin(pi y)
        let f = FunctionSpec::Product {
            factors: vec![FunctionSpec::Poly { coeffs: vec![0.0, 0.0, 1.0] }, FunctionSpec::sin_pi(1.0)],
        };
        let y = 0.37;
        let s = (PI * y).sin();
        let c = (PI * y).cos();
        assert!((f.val(y) - y * y * s).abs() < 1e-15);
        assert!((f.der(y) - (2.0 * y * s + PI * y * y * c)).abs() < 1e-14);
        let d2 = 2.0 * s + 4.0 * PI * y * c - PI * PI * y * y * s;
        assert!((f.der2(y) - d2).abs() < 1e-13);
    }

    #[test]
    fn parity_parts_recombine() {
        let f = FunctionSpec::Sum { terms: vec![FunctionSpec::cos_pi(0.5), FunctionSpec::sin_pi(1.0)] };
        let o = ParityPart::new(f.clone(), Parity::Odd);
        let e = ParityPart::new(f.clone(), Parity::Even);
        for &y in &[-0.8, -0.1, 0.0, 0.3, 0.9] {
            assert!((o.val(y) + e.val(y) - f.val(y)).abs() < 1e-15);
            assert!((o.der(y) + e.der(y) - f.der(y)).abs() < 1e-14);
            assert!((o.der2(y) + e.der2(y) - f.der2(y)).abs() < 1e-13);
        }
        assert_eq!(o.val(0.0), 0.0);
        assert!(e.der(0.0).abs() < 1e-15);
    }

    #[test]
    fn spec_roundtrips_through_json() {
        let f = FunctionSpec::Product { factors: vec![FunctionSpec::sin_pi(2.0), FunctionSpec::constant(3.0)] };
        let s = serde_json::to_string(&f).unwrap();
        let g: FunctionSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(f, g);
    }
}
