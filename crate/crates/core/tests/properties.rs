use std::sync::OnceLock;

use proptest::prelude::*;
use raydamp_core::evolution::{
    channel_data, decay_fit, filon_weights_c, limit_coefficients, ChannelContext, ChannelData,
};
use raydamp_core::funcs::{FunctionSpec, Parity, ParityPart, RealFn};
use raydamp_core::profiles::{CriticalValue, ShearProfile};
use raydamp_core::quad::integrate_panels;
use raydamp_core::rayleigh::{solve_phi1, SolverOptions};
use raydamp_core::singular::{hilbert_pv, op_average, SolQuad, GAP_FRACTION};
use raydamp_core::spectral::{compute_node, SpectralNode};
use raydamp_core::C64;

fn node_055() -> &'static (SpectralNode, ChannelData) {
    static NODE: OnceLock<(SpectralNode, ChannelData)> = OnceLock::new();
    NODE.get_or_init(|| {
        let p = ShearProfile::poiseuille();
        let node = compute_node(&p, 1.0, 0.55, &SolverOptions::default()).unwrap();
        let f = FunctionSpec::sin_pi(1.0);
        let d = channel_data(&p, &ChannelContext::new(&f), &node).unwrap();
        (node, d)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn hilbert_commutes_with_z_on_odd_data(a in -2.0..2.0f64, b in -2.0..2.0f64, ct in -0.9..0.9f64) {
        let g = |z: f64| a * z + b * z.powi(3) + (2.0 * z).sin();
        let lhs: f64 = hilbert_pv(g, 1.0, ct, GAP_FRACTION).unwrap();
        let rhs: f64 = hilbert_pv(|z| z * g(z), 1.0, ct, GAP_FRACTION).unwrap();
        prop_assert!((ct * lhs - rhs).abs() < 1e-11 * (1.0 + rhs.abs()));
    }

    #[test]
    fn average_is_bounded_by_the_sup(k in 0.5..6.0f64, z in 0.0..1.0f64, ct in 0.0..1.0f64) {
        let g = |s: f64| (k * s).cos() + 0.3 * s;
        let a = op_average(g, z, ct);
        let lo = z.min(ct);
        let hi = z.max(ct);
        let sup = (0..=400).map(|i| g(lo + (hi - lo) * i as f64 / 400.0).abs()).fold(0.0, f64::max);
        prop_assert!(a.abs() <= sup * (1.0 + 1e-9) + 1e-12);
    }

    #[test]
    fn filon_exact_on_random_quadratics(
        c0 in -1.0..1.0f64, c1 in -1.0..1.0f64, c2 in -1.0..1.0f64,
        omega in 0.0..300.0f64, n in 3usize..40,
    ) {
        let x: Vec<f64> = (0..=n).map(|i| (i as f64 / n as f64).powf(1.7)).collect();
        let f = |s: f64| c0 + c1 * s + c2 * s * s;
        let w = filon_weights_c(&x, omega);
        let got: C64 = x.iter().zip(&w).map(|(s, w)| w * f(*s)).sum();
        let want: C64 = integrate_panels(16, 0.0, 1.0, 200, |s| C64::from_polar(f(s), -omega * s));
        prop_assert!((got - want).norm() < 1e-11);
    }

    #[test]
    fn decay_fit_recovers_power_laws(k in 0.01..100.0f64, p in -3.0..0.5f64) {
        let t: Vec<f64> = (0..30).map(|i| 10f64.powf(1.0 + i as f64 / 29.0)).collect();
        let v: Vec<f64> = t.iter().map(|t| k * t.powf(p)).collect();
        let fit = decay_fit(&t, &v, (1.0, 1e3)).unwrap();
        prop_assert!((fit.exponent - p).abs() < 1e-10);
        prop_assert!((fit.intercept - k.ln()).abs() < 1e-9);
    }

    #[test]
    fn parity_parts_recombine(a in -2.0..2.0f64, k in 0.2..3.0f64, y in -1.0..1.0f64) {
        let f = FunctionSpec::Sum { terms: vec![FunctionSpec::SinPi { k, amp: a }, FunctionSpec::cos_pi(k), FunctionSpec::constant(0.7)] };
        let o = ParityPart::new(f.clone(), Parity::Odd);
        let e = ParityPart::new(f.clone(), Parity::Even);
        prop_assert!((o.val(y) + e.val(y) - f.val(y)).abs() < 1e-14);
        prop_assert!((o.val(-y) + o.val(y)).abs() < 1e-14);
        prop_assert!((e.der(-y) + e.der(y)).abs() < 1e-12);
    }

    #[test]
    fn limit_coefficients_are_anticonjugate(c_o in -1.0..1.0f64, d_o in -1.0..1.0f64, c_e in -1.0..1.0f64, d_e in -1.0..1.0f64, e_e in -1.0..1.0f64) {
        let (node, _) = node_055();
        let d = ChannelData { c_o, d_o, c_e, d_e, e_e };
        let lc = limit_coefficients(1.0, &node.row, &d).unwrap();
        for (p, m) in [(lc.mu_o_plus, lc.mu_o_minus), (lc.mu_e_plus, lc.mu_e_minus), (lc.nu_e_plus, lc.nu_e_minus)] {
            prop_assert!((p + m.conj()).norm() <= 1e-13 * (1.0 + p.norm()));
        }
        prop_assert!(lc.denominator_residual < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn phi1_bounded_below_and_ii3_nonpositive(alpha in 0.1..8.0f64, c in 0.02..0.98f64) {
        let p = ShearProfile::poiseuille();
        let cv = CriticalValue::real(&p, c).unwrap();
        let sol = solve_phi1(&p, alpha, &cv, &SolverOptions::default()).unwrap();
        prop_assert!(sol.phi1.iter().all(|v| v.re >= 1.0 - 1e-10 && v.im == 0.0));
        prop_assert!(SolQuad::new(&sol).ii3() <= 0.0);
    }
}

#[test]
fn channel_data_vanishes_for_zero_vorticity() {
    let (node, d) = node_055();
    assert!(d.c_o != 0.0);
    let p = ShearProfile::poiseuille();
    let zero = FunctionSpec::constant(0.0);
    let z = channel_data(&p, &ChannelContext::new(&zero), node).unwrap();
    assert_eq!(z, ChannelData::default());
}
