//! Shear profiles `u(y)` on `[-1, 1]`, class validation, the square-root
//! coordinate `v(y) = sqrt(u(y) - u(0))` and the map `c -> y_c`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::C64;

const VALIDATION_POINTS: usize = 2049;
const MAX_DERIV: usize = 6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProfileError {
    #[error("class violation: {invariant} fails at y = {y}")]
    ClassViolation { invariant: &'static str, y: f64 },
    #[error("profile is not symmetric: |u(y) - u(-y)| = {defect:e} at y = {y}")]
    NonSymmetric { y: f64, defect: f64 },
    #[error("degenerate curvature: m(y) = {m:e} at y = {y}")]
    DegenerateCurvature { y: f64, m: f64 },
    #[error("c_r = {c_r} lies outside [{lo}, {hi}]")]
    OutOfRange { c_r: f64, lo: f64, hi: f64 },
    #[error("unknown builtin profile `{0}`")]
    UnknownBuiltin(String),
    #[error("invalid profile descriptor: {0}")]
    InvalidDescriptor(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClassTag {
    K,
    S,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DescriptorKind {
    Builtin,
    PolyEven,
}

/// Config-level description of a profile.
///
/// `builtin` names: `poiseuille` (u = y²), `scaled` (coeffs `[a, b]`, u = a·y² + b)
/// and `couette` (u = y, class K). `poly_even` takes coefficients of `y^{2j}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileDescriptor {
    pub name: String,
    #[serde(rename = "type")]
    pub kind: DescriptorKind,
    #[serde(default)]
    pub coeffs: Vec<f64>,
    #[serde(default)]
    pub class_tag: Option<ClassTag>,
}

impl ProfileDescriptor {
    pub fn poiseuille() -> Self {
        Self {
            name: "poiseuille".into(),
            kind: DescriptorKind::Builtin,
            coeffs: vec![],
            class_tag: None,
        }
    }
}

/// Constants measured during validation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    /// min of u'(y)/y over (0, 1].
    pub c0: f64,
    /// min of v'(y) over [0, 1] (class S only).
    pub c1: f64,
    /// Two-sided constant C for (u'(y)+u'(y'))(y-y') / (u(y)-u(y')).
    pub ratio_c: f64,
    /// Tolerance used for the "nonzero" checks.
    pub tol: f64,
}

/// Polynomial shear profile with exact derivatives.
#[derive(Debug, Clone)]
pub struct ShearProfile {
    pub name: String,
    pub class_tag: ClassTag,
    pub u0: f64,
    pub u1: f64,
    derivs: Vec<Vec<f64>>,
    sqrt: Option<SqrtCoordinate>,
    pub report: ValidationReport,
}

fn horner(c: &[f64], y: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * y + a)
}

fn differentiate(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(k, &a)| a * k as f64).collect()
}

fn validation_grid() -> Vec<f64> {
    let n = VALIDATION_POINTS - 1;
    (0..=n)
        .map(|j| 0.5 * (1.0 - (std::f64::consts::PI * j as f64 / n as f64).cos()))
        .collect()
}

/// Build a profile from a config descriptor, validating its class.
pub fn build_profile(desc: &ProfileDescriptor) -> Result<ShearProfile, ProfileError> {
    let (coeffs, default_tag) = match desc.kind {
        DescriptorKind::Builtin => match desc.name.as_str() {
            "poiseuille" => (vec![0.0, 0.0, 1.0], ClassTag::S),
            "scaled" | "scaled_poiseuille" => {
                if desc.coeffs.len() != 2 {
                    return Err(ProfileError::InvalidDescriptor(
                        "scaled profile needs coeffs [a, b]".into(),
                    ));
                }
                (vec![desc.coeffs[1], 0.0, desc.coeffs[0]], ClassTag::S)
            }
            "couette" => (vec![0.0, 1.0], ClassTag::K),
            other => return Err(ProfileError::UnknownBuiltin(other.to_string())),
        },
        DescriptorKind::PolyEven => {
            if desc.coeffs.is_empty() {
                return Err(ProfileError::InvalidDescriptor(
                    "poly_even profile needs at least one coefficient".into(),
                ));
            }
            let mut c = vec![0.0; 2 * desc.coeffs.len() - 1];
            for (j, &a) in desc.coeffs.iter().enumerate() {
                c[2 * j] = a;
            }
            (c, ClassTag::S)
        }
    };
    ShearProfile::from_monomials(&desc.name, coeffs, desc.class_tag.unwrap_or(default_tag))
}

impl ShearProfile {
    /// u(y) = y².
    pub fn poiseuille() -> Self {
        Self::from_monomials("poiseuille", vec![0.0, 0.0, 1.0], ClassTag::S)
            .expect("poiseuille is class S")
    }

    /// u(y) = y, the class-K transport stub with u'' = 0.
    pub fn couette() -> Self {
        Self::from_monomials("couette", vec![0.0, 1.0], ClassTag::K).expect("couette is class K")
    }

    /// Profile from monomial coefficients `u(y) = sum a_k y^k`.
    pub fn from_monomials(name: &str, coeffs: Vec<f64>, tag: ClassTag) -> Result<Self, ProfileError> {
        let mut derivs = vec![coeffs];
        for k in 0..MAX_DERIV {
            let d = differentiate(&derivs[k]);
            derivs.push(d);
        }
        let mut p = Self {
            name: name.to_string(),
            class_tag: tag,
            u0: horner(&derivs[0], 0.0),
            u1: horner(&derivs[0], 1.0),
            derivs,
            sqrt: None,
            report: ValidationReport::default(),
        };
        p.report = p.validate()?;
        if tag == ClassTag::S {
            let s = sqrt_coordinate(&p)?;
            p.report.c1 = s.c1;
            p.sqrt = Some(s);
        }
        Ok(p)
    }

    pub fn monomials(&self) -> &[f64] {
        &self.derivs[0]
    }

    /// k-th derivative of u at y (k <= 6).
    pub fn deriv(&self, k: usize, y: f64) -> f64 {
        horner(&self.derivs[k], y)
    }
    pub fn u(&self, y: f64) -> f64 {
        horner(&self.derivs[0], y)
    }
    pub fn du(&self, y: f64) -> f64 {
        horner(&self.derivs[1], y)
    }
    pub fn d2u(&self, y: f64) -> f64 {
        horner(&self.derivs[2], y)
    }
    pub fn d3u(&self, y: f64) -> f64 {
        horner(&self.derivs[3], y)
    }
    pub fn d4u(&self, y: f64) -> f64 {
        horner(&self.derivs[4], y)
    }

    /// Square-root coordinate; `None` for class-K profiles.
    pub fn sqrt_coord(&self) -> Option<&SqrtCoordinate> {
        self.sqrt.as_ref()
    }

    /// Square-root coordinate of a class-S profile.
    pub fn sc(&self) -> &SqrtCoordinate {
        self.sqrt.as_ref().expect("square-root coordinate requires a class-S profile")
    }

    /// (u(y) - u(y0)) / (y - y0) through the averaged derivative, no cancellation.
    pub fn slope_between(&self, y0: f64, y: f64) -> f64 {
        self.deriv_slope(0, y0, y)
    }

    /// (u⁽ᵏ⁾(y) - u⁽ᵏ⁾(y0)) / (y - y0), averaged derivative for short spans.
    pub fn deriv_slope(&self, k: usize, y0: f64, y: f64) -> f64 {
        let d = y - y0;
        if d.abs() < 1e-4 {
            crate::quad::integrate(8, 0.0, 1.0, |t| self.deriv(k + 1, y0 + t * d))
        } else {
            (self.deriv(k, y) - self.deriv(k, y0)) / d
        }
    }

    /// max over [-1, 1] of |u| + |u'| + |u''|.
    pub fn norm_c2(&self) -> f64 {
        let g = validation_grid();
        g.iter()
            .flat_map(|&y| [y, -y])
            .map(|y| self.u(y).abs() + self.du(y).abs() + self.d2u(y).abs())
            .fold(0.0, f64::max)
    }

    fn validate(&self) -> Result<ValidationReport, ProfileError> {
        let tol = 1e-8 * self.norm_c2().max(f64::MIN_POSITIVE);
        let grid = validation_grid();
        let mut rep = ValidationReport { tol, ..Default::default() };
        match self.class_tag {
            ClassTag::S => {
                if self.du(0.0).abs() > tol {
                    return Err(ProfileError::ClassViolation { invariant: "u'(0) = 0", y: 0.0 });
                }
                if self.d2u(0.0) <= tol {
                    return Err(ProfileError::ClassViolation { invariant: "u''(0) > 0", y: 0.0 });
                }
                for &y in &grid {
                    let defect = (self.u(y) - self.u(-y)).abs();
                    if defect > tol {
                        return Err(ProfileError::NonSymmetric { y, defect });
                    }
                }
                let mut c0 = f64::INFINITY;
                for &y in grid.iter().skip(1) {
                    let d = self.du(y);
                    if d <= 0.0 {
                        return Err(ProfileError::ClassViolation { invariant: "u'(y) > 0 on (0, 1]", y });
                    }
                    c0 = c0.min(d / y);
                }
                if c0 <= 0.0 {
                    return Err(ProfileError::ClassViolation { invariant: "u'(y) >= c0 y", y: 0.0 });
                }
                rep.c0 = c0;
                rep.ratio_c = self.ratio_constant();
            }
            ClassTag::K => {
                for y in [-1.0, 1.0] {
                    if self.du(y).abs() <= tol {
                        return Err(ProfileError::ClassViolation { invariant: "u'(+-1) != 0", y });
                    }
                }
                for &y in grid.iter().flat_map(|y| [*y, -*y]).collect::<Vec<_>>().iter() {
                    if self.du(y).abs() < tol && self.d2u(y).abs() <= tol {
                        return Err(ProfileError::ClassViolation {
                            invariant: "u'' != 0 at critical points",
                            y,
                        });
                    }
                }
                rep.c0 = f64::NAN;
                rep.c1 = f64::NAN;
                rep.ratio_c = f64::NAN;
            }
        }
        Ok(rep)
    }

    fn ratio_constant(&self) -> f64 {
        let n = 129;
        let ys: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 1..n {
            for j in 0..i {
                let (y, yp) = (ys[i], ys[j]);
                let r = (self.du(y) + self.du(yp)) * (y - yp) / (self.u(y) - self.u(yp));
                lo = lo.min(r);
                hi = hi.max(r);
            }
        }
        hi.max(1.0 / lo)
    }
}

/// v(y) = y m(y)^{1/2} with m(y) = ∫₀¹ (1-t) u''(ty) dt, plus its inverse.
#[derive(Debug, Clone)]
pub struct SqrtCoordinate {
    m: [Vec<f64>; 4],
    pub v1: f64,
    pub c1: f64,
}

/// Build the square-root coordinate of a class-S profile.
pub fn sqrt_coordinate(profile: &ShearProfile) -> Result<SqrtCoordinate, ProfileError> {
    let a = profile.monomials();
    // For even u, (u(y) - u(0)) / y² is the polynomial with coefficients a_{k+2}.
    let m0: Vec<f64> = a.iter().skip(2).copied().collect();
    let m0 = if m0.is_empty() { vec![0.0] } else { m0 };
    let m1 = differentiate(&m0);
    let m2 = differentiate(&m1);
    let m3 = differentiate(&m2);
    let mut s = SqrtCoordinate { m: [m0, m1, m2, m3], v1: 0.0, c1: 0.0 };
    let tol = 1e-8 * profile.norm_c2();
    let mut c1 = f64::INFINITY;
    for y in validation_grid() {
        let m = horner(&s.m[0], y);
        if m < tol {
            return Err(ProfileError::DegenerateCurvature { y, m });
        }
        c1 = c1.min(s.dv(y));
    }
    s.v1 = s.v(1.0);
    s.c1 = c1;
    Ok(s)
}

impl SqrtCoordinate {
    fn r_derivs(&self, y: f64) -> [f64; 4] {
        let m = horner(&self.m[0], y);
        let m1 = horner(&self.m[1], y);
        let m2 = horner(&self.m[2], y);
        let m3 = horner(&self.m[3], y);
        let r = m.sqrt();
        let r1 = m1 / (2.0 * r);
        let r2 = m2 / (2.0 * r) - m1 * m1 / (4.0 * r * m);
        let r3 = m3 / (2.0 * r) - 0.75 * m1 * m2 / (r * m) + 0.375 * m1.powi(3) / (r * m * m);
        [r, r1, r2, r3]
    }
    /// m(y) = (u(y) - u(0)) / y².
    pub fn m(&self, y: f64) -> f64 {
        horner(&self.m[0], y)
    }
    pub fn v(&self, y: f64) -> f64 {
        y * self.r_derivs(y)[0]
    }
    pub fn dv(&self, y: f64) -> f64 {
        let r = self.r_derivs(y);
        r[0] + y * r[1]
    }
    pub fn d2v(&self, y: f64) -> f64 {
        let r = self.r_derivs(y);
        2.0 * r[1] + y * r[2]
    }
    pub fn d3v(&self, y: f64) -> f64 {
        let r = self.r_derivs(y);
        3.0 * r[2] + y * r[3]
    }

    /// v⁻¹(z) for z in [-v(1), v(1)] (clamped outside).
    pub fn inv(&self, z: f64) -> f64 {
        let s = z.signum();
        let z = z.abs();
        if z >= self.v1 {
            return s;
        }
        if z == 0.0 {
            return 0.0;
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        let mut y = (z / self.dv(0.0)).min(1.0);
        for _ in 0..100 {
            let f = self.v(y) - z;
            if f > 0.0 {
                hi = y;
            } else {
                lo = y;
            }
            let mut next = y - f / self.dv(y);
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            let step = (next - y).abs();
            y = next;
            if step <= 1e-16 * y.max(1e-300) || hi - lo < 1e-17 {
                break;
            }
        }
        s * y
    }
    /// (v⁻¹)'(z).
    pub fn dinv(&self, z: f64) -> f64 {
        1.0 / self.dv(self.inv(z))
    }
    /// (v⁻¹)''(z).
    pub fn d2inv(&self, z: f64) -> f64 {
        self.inv_derivs(z).2
    }
    /// (v⁻¹(z), (v⁻¹)'(z), (v⁻¹)''(z)) with a single inversion.
    pub fn inv_derivs(&self, z: f64) -> (f64, f64, f64) {
        let y = self.inv(z);
        let r = self.r_derivs(y);
        let d = r[0] + y * r[1];
        let d2 = 2.0 * r[1] + y * r[2];
        (y, 1.0 / d, -d2 / (d * d * d))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DomainTag {
    D0,
    DEps,
    BLeft,
    BRight,
}

/// A spectral parameter and the scalars derived from its critical point.
#[derive(Debug, Clone, Copy)]
pub struct CriticalValue {
    pub c: C64,
    pub domain: DomainTag,
    pub c_r: f64,
    pub y_c: f64,
    pub c_tilde: f64,
    pub rho: f64,
    pub rho0: f64,
    pub rho1: f64,
    /// u'(y_c)
    pub du_c: f64,
    /// u''(y_c)
    pub d2u_c: f64,
}

/// Monotone inversion of u on [0, 1]: the y with u(y) = c_r.
pub fn y_of(profile: &ShearProfile, c_r: f64) -> f64 {
    if c_r <= profile.u0 {
        return 0.0;
    }
    if c_r >= profile.u1 {
        return 1.0;
    }
    if let Some(s) = profile.sqrt_coord() {
        return s.inv((c_r - profile.u0).sqrt());
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if profile.u(mid) < c_r {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut y = 0.5 * (lo + hi);
    for _ in 0..50 {
        let d = profile.du(y);
        if d == 0.0 {
            break;
        }
        let step = (profile.u(y) - c_r) / d;
        y = (y - step).clamp(lo, hi);
        if step.abs() < 1e-15 {
            break;
        }
    }
    y
}

/// Critical value data for `c` in the domain `tag`.
pub fn critical_value(profile: &ShearProfile, c: C64, tag: DomainTag) -> Result<CriticalValue, ProfileError> {
    let (lo, hi) = (profile.u0, profile.u1);
    let slack = 1e-14 * (hi - lo).abs().max(1.0);
    let c_r = match tag {
        DomainTag::D0 | DomainTag::DEps => c.re,
        DomainTag::BLeft => lo,
        DomainTag::BRight => hi,
    };
    if !(c_r >= lo - slack && c_r <= hi + slack) {
        return Err(ProfileError::OutOfRange { c_r, lo, hi });
    }
    let c_r = c_r.clamp(lo, hi);
    let y_c = y_of(profile, c_r);
    Ok(finish(profile, c, tag, c_r, y_c))
}

fn finish(profile: &ShearProfile, c: C64, tag: DomainTag, c_r: f64, y_c: f64) -> CriticalValue {
    let rho = (c_r - profile.u0) * (profile.u1 - c_r);
    let du_c = profile.du(y_c);
    let rho0 = if rho == 0.0 { 0.0 } else { rho / du_c };
    CriticalValue {
        c,
        domain: tag,
        c_r,
        y_c,
        c_tilde: (c_r - profile.u0).max(0.0).sqrt(),
        rho,
        rho0,
        rho1: c_r - profile.u0,
        du_c,
        d2u_c: profile.d2u(y_c),
    }
}

impl CriticalValue {
    /// Real c in [u(0), u(1)].
    pub fn real(profile: &ShearProfile, c: f64) -> Result<Self, ProfileError> {
        critical_value(profile, C64::new(c, 0.0), DomainTag::D0)
    }

    /// Real c parametrised by c̃ = v(y_c), with y_c = v⁻¹(c̃) and c = u(0) + c̃².
    pub fn from_c_tilde(profile: &ShearProfile, c_tilde: f64) -> Self {
        let y_c = profile.sc().inv(c_tilde);
        let c_r = profile.u0 + c_tilde * c_tilde;
        let mut cv = finish(profile, C64::new(c_r, 0.0), DomainTag::D0, c_r, y_c);
        cv.c_tilde = c_tilde;
        cv
    }

    /// Same critical point, spectral parameter shifted off the axis by `i·eps`.
    pub fn with_imag(&self, eps: f64) -> Self {
        let mut cv = *self;
        cv.c = C64::new(self.c_r, eps);
        cv.domain = if eps == 0.0 { DomainTag::D0 } else { DomainTag::DEps };
        cv
    }

    pub fn is_real(&self) -> bool {
        self.c.im == 0.0
    }
}
