use raydamp_core::evolution::*;
use raydamp_core::funcs::{FunctionSpec, Parity, ParityPart, RealFn};
use raydamp_core::kernels::{kernel_tables, KernelContext, KernelData};
use raydamp_core::oracle;
use raydamp_core::profiles::ShearProfile;
use raydamp_core::rayleigh::SolverOptions;
use raydamp_core::C64;

fn mixed() -> FunctionSpec {
    FunctionSpec::Sum { terms: vec![FunctionSpec::cos_pi(0.5), FunctionSpec::SinPi { k: 1.0, amp: 0.5 }] }
}

fn padded(v: &[C64]) -> Vec<C64> {
    let mut f = vec![C64::default(); v.len() + 2];
    f[1..=v.len()].copy_from_slice(v);
    f
}

fn rel_l2(a: &[C64], b: &[C64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

#[test]
fn reconstruction_at_time_zero() {
    let p = ShearProfile::poiseuille();
    let w = mixed();
    let rep = build_representation(&p, 1.0, &w, 257, 512, &SolverOptions::default()).unwrap();
    let m = oracle::assemble(&p, 1.0, 257).unwrap();
    let om: Vec<C64> = m.interior().iter().map(|&y| C64::new(w.eval(y), 0.0)).collect();
    let psi0 = padded(&m.stream_from_vorticity(&om));
    let got = rep.psi(0.0).unwrap();
    assert!(rel_l2(&got, &psi0) < 1e-3, "{}", rel_l2(&got, &psi0));
    assert!(energy_identity_residual(rep.y[1] - rep.y[0], 1.0, &rep.psi(5.0).unwrap()) < 1e-6);
}

#[test]
fn parity_is_preserved_and_zero_data_gives_zero() {
    let p = ShearProfile::poiseuille();
    let odd = FunctionSpec::sin_pi(1.0);
    let rep = build_representation(&p, 1.0, &odd, 65, 64, &SolverOptions::default()).unwrap();
    let n = rep.y.len();
    for t in [0.0, 3.0] {
        let psi = rep.psi(t).unwrap();
        for j in 0..n {
            assert!((psi[j] + psi[n - 1 - j]).norm() < 1e-14 * (1.0 + psi[j].norm()));
        }
    }
    let even = FunctionSpec::cos_pi(0.5);
    let rep = build_representation(&p, 1.0, &even, 65, 64, &SolverOptions::default()).unwrap();
    let psi = rep.psi(3.0).unwrap();
    for j in 0..n {
        assert!((psi[j] - psi[n - 1 - j]).norm() < 1e-14 * (1.0 + psi[j].norm()));
    }
    let zero = FunctionSpec::constant(0.0);
    let rep = build_representation(&p, 1.0, &zero, 65, 32, &SolverOptions::default()).unwrap();
    assert!(rep.psi(2.0).unwrap().iter().all(|z| z.norm() == 0.0));
}

#[test]
fn projected_stream_function_matches_oracle_at_t10() {
    let p = ShearProfile::poiseuille();
    let w = mixed();
    let wo = ParityPart::new(w.clone(), Parity::Odd);
    let we = ParityPart::new(w.clone(), Parity::Even);
    let g = FunctionSpec::sin_pi(1.0);
    let ge = FunctionSpec::cos_pi(0.5);
    let ctx = KernelContext::new(&p, KernelData { omega_o: &wo, omega_e: &we, g_odd: &g, g_even: &ge }).unwrap();
    let kt = kernel_tables(&ctx, 1.0, 512, &SolverOptions::default()).unwrap();

    let m = oracle::assemble(&p, 1.0, 513).unwrap();
    let om: Vec<C64> = m.interior().iter().map(|&y| C64::new(w.eval(y), 0.0)).collect();
    let psi0 = m.stream_from_vorticity(&om);
    let t = 10.0;
    let psi = padded(&oracle::evolve_direct(&m, &psi0, &[t]).unwrap()[0]);
    let h = m.y[1] - m.y[0];
    let half = (m.n - 1) / 2;
    let (mut so, mut se) = (C64::default(), C64::default());
    let wts = raydamp_core::quad::simpson_weights(half + 1, h);
    for (k, j) in (half..m.n).enumerate() {
        let y = m.y[j];
        let po = (psi[j] - psi[m.n - 1 - j]) * 0.5;
        let pe = (psi[j] + psi[m.n - 1 - j]) * 0.5;
        so += po * ((g.der2(y) - g.val(y)) * wts[k]);
        se += pe * ((ge.der2(y) - ge.val(y)) * wts[k]);
    }
    let ko = psi_projected(&p, &kt, Parity::Odd, t).unwrap();
    let ke = psi_projected(&p, &kt, Parity::Even, t).unwrap();
    assert!((ko - so).norm() < 1e-3 * so.norm(), "{ko} vs {so}");
    assert!((ke - se).norm() < 1e-3 * se.norm(), "{ke} vs {se}");
    let k0 = psi_projected(&p, &kt, Parity::Odd, 0.0).unwrap();
    assert!((k0.re + 0.25).abs() < 1e-6 && k0.im.abs() < 1e-12);
}

#[test]
fn transport_only_vorticity_keeps_its_modulus() {
    let p = ShearProfile::poiseuille();
    let m = oracle::assemble_transport(&p, 1.0, 129).unwrap();
    let om: Vec<C64> = m.interior().iter().map(|&y| C64::new(1.0 + 0.5 * y, 0.0)).collect();
    let psi0 = m.stream_from_vorticity(&om);
    let ts: Vec<f64> = (0..=20).map(|k| 2.5 * k as f64).collect();
    let ev = oracle::evolve_direct(&m, &psi0, &ts).unwrap();
    for psi in &ev {
        let w = m.vorticity(psi);
        for (a, b) in w.iter().zip(&om) {
            assert!((a.norm() - b.norm()).abs() < 1e-9);
        }
    }
}

#[test]
fn velocity_h1_in_time_stays_bounded() {
    // ∫₀^T (‖V̂‖² + ‖∂_tV̂‖²) dt, with ∂_tψ̂ = -iαRψ̂
    let p = ShearProfile::poiseuille();
    let a = 1.0;
    let m = oracle::assemble(&p, a, 257).unwrap();
    let om: Vec<C64> = m.interior().iter().map(|&y| C64::new(mixed().eval(y), 0.0)).collect();
    let psi0 = m.stream_from_vorticity(&om);
    let ts: Vec<f64> = (0..=400).map(|k| 0.25 * k as f64).collect();
    let ev = oracle::evolve_direct(&m, &psi0, &ts).unwrap();
    let h = m.y[1] - m.y[0];
    let (mut nv, mut ndv) = (Vec::new(), Vec::new());
    for psi in &ev {
        let dt: Vec<C64> = m.apply_r(psi).iter().map(|z| z * C64::new(0.0, -a)).collect();
        for (v, out) in [(psi, &mut nv), (&dt, &mut ndv)] {
            let f = padded(v);
            let (d1, _) = fd_derivatives(h, &f);
            out.push(velocity_norms(h, a, &f, &d1).0);
        }
    }
    let upto = |tmax: f64| {
        let k = ts.iter().position(|&t| t == tmax).unwrap();
        h1_time_integral(&ts[..=k], &nv[..=k], &ndv[..=k])
    };
    let (i25, i50, i100) = (upto(25.0), upto(50.0), upto(100.0));
    assert!(i50 - i25 < 0.5 * i25, "{i25} {i50}");
    assert!(i100 - i50 < i50 - i25, "{i25} {i50} {i100}");
}
