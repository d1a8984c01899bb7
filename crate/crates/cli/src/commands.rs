use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use raydamp_core::evolution::{
    build_representation, decay_fit, depletion_series, transport_reference, DecayFit, EvolutionState, COLLAR, PHASE_LIMIT, Y_PROBE,
};
use raydamp_core::funcs::{Parity, ParityPart, RealFn};
use raydamp_core::kernels::{kernel_norms, kernel_tables, KernelContext, KernelData, DEGENERACY_THRESHOLD};
use raydamp_core::oracle::{self, OperatorMatrix};
use raydamp_core::profiles::{build_profile, ShearProfile};
use raydamp_core::rayleigh::REGULARIZATION_WIDTH;
use raydamp_core::singular::GAP_FRACTION;
use raydamp_core::spectral::{bound_ratios, fitted_constant, scan_embedding, spectral_tables};
use raydamp_core::C64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::output::{alpha_tag, OutDir};

pub const SERIES_HEADER: [&str; 5] = ["t", "norm_V", "norm_V2", "omega0_abs", "omega_probe_abs"];
pub const SPECTRAL_HEADER: [&str; 10] = ["c", "y_c", "A1", "A", "B", "J", "A2", "B2", "II2", "II3"];
pub const KERNEL_HEADER: [&str; 7] = ["c", "K_o", "K_e", "Lambda1", "Lambda2", "Lambda3", "Lambda4"];

#[derive(Serialize)]
struct Tolerances {
    solver_tol: f64,
    solver_max_iter: usize,
    solver_nodes: usize,
    pv_gap_fraction: f64,
    collar: f64,
    regularization_width: f64,
    degeneracy_threshold: f64,
    filon_phase_limit: f64,
    embedding_threshold: f64,
}

fn tolerances(cfg: &RunConfig) -> Tolerances {
    Tolerances {
        solver_tol: cfg.solver.tol,
        solver_max_iter: cfg.solver.max_iter,
        solver_nodes: cfg.solver.n,
        pv_gap_fraction: GAP_FRACTION,
        collar: COLLAR,
        regularization_width: REGULARIZATION_WIDTH,
        degeneracy_threshold: DEGENERACY_THRESHOLD,
        filon_phase_limit: PHASE_LIMIT,
        embedding_threshold: cfg.embedding_threshold,
    }
}

fn manifest(cmd: &str, cfg: &RunConfig, runs: Vec<Value>, files: Vec<String>, notes: Vec<String>, clock: Instant) -> Value {
    json!({
        "command": cmd,
        "versions": { "raydamp": env!("CARGO_PKG_VERSION"), "raydamp-core": raydamp_core::VERSION },
        "config": cfg,
        "tolerances": tolerances(cfg),
        "runs": runs,
        "files": files,
        "notes": notes,
        "wall_time_s": clock.elapsed().as_secs_f64(),
    })
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn profile(cfg: &RunConfig) -> Result<ShearProfile> {
    build_profile(cfg.profile()).context("profile")
}

fn fit_json(fit: Result<DecayFit, impl std::fmt::Display>) -> Value {
    match fit {
        Ok(f) => json!({ "exponent": f.exponent, "intercept": f.intercept, "r_squared": f.r_squared, "samples": f.samples }),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

fn fit_window(t_max: f64) -> (f64, f64) {
    if t_max > 20.0 {
        (10.0, t_max)
    } else {
        (0.1 * t_max, t_max)
    }
}

fn padded(v: &[C64]) -> Vec<C64> {
    let mut f = vec![C64::default(); v.len() + 2];
    f[1..=v.len()].copy_from_slice(v);
    f
}

fn initial_stream(m: &OperatorMatrix, w: &dyn RealFn) -> Vec<C64> {
    let om: Vec<C64> = m.interior().iter().map(|&y| C64::new(w.val(y), 0.0)).collect();
    m.stream_from_vorticity(&om)
}

/// Oracle evolution on the config grid with the discrete spectrum removed
/// from the data; returns the state and a note on the projection.
fn oracle_run(p: &ShearProfile, cfg: &RunConfig, alpha: f64) -> Result<(EvolutionState, usize)> {
    let m = oracle::assemble(p, alpha, cfg.grids.n_oracle)?;
    let mut psi0 = initial_stream(&m, &cfg.data.omega0);
    let spec = oracle::discrete_spectrum(&m);
    if !spec.discrete.is_empty() {
        psi0 = oracle::project_out(&m, &spec.discrete, &psi0);
    }
    let t = cfg.times();
    let ev = oracle::evolve_direct(&m, &psi0, &t)?;
    let psi = ev.iter().map(|v| padded(v)).collect();
    Ok((EvolutionState::from_psi(alpha, m.y.clone(), t, psi, Y_PROBE), spec.discrete.len()))
}

fn projection_note(removed: usize, alpha: f64) -> String {
    if removed == 0 {
        format!("alpha={alpha}: no discrete eigenvalues above threshold; the projection was a no-op")
    } else {
        format!("alpha={alpha}: removed {removed} discrete eigenmodes from the data")
    }
}

pub fn simulate(cfg: &RunConfig, out: &OutDir) -> Result<()> {
    let clock = Instant::now();
    let p = profile(cfg)?;
    let opts = cfg.solver.options();
    let (mut runs, mut files, mut notes) = (Vec::new(), Vec::new(), Vec::new());
    for &alpha in &cfg.alpha_list {
        let (s, removed) = oracle_run(&p, cfg, alpha)?;
        notes.push(projection_note(removed, alpha));
        let tag = alpha_tag(alpha);
        let rows = (0..s.t.len()).map(|k| vec![s.t[k], s.norm_v[k], s.norm_v2[k], s.omega0_abs[k], s.omega_probe_abs[k]]);
        files.push(file_name(&out.csv(&format!("series_{tag}.csv"), &SERIES_HEADER, rows)?));
        let last = s.t.len() - 1;
        let snap = (0..s.y.len()).map(|j| vec![s.y[j], s.psi[last][j].re, s.psi[last][j].im, s.omega[last][j].re, s.omega[last][j].im]);
        files.push(file_name(&out.csv(&format!("snapshot_{tag}.csv"), &["y", "psi_re", "psi_im", "omega_re", "omega_im"], snap)?));

        // representation pipeline against a same-grid oracle
        let rep = build_representation(&p, alpha, &cfg.data.omega0, cfg.grids.ny, cfg.grids.nc, &opts)?;
        let m = oracle::assemble(&p, alpha, cfg.grids.ny)?;
        let check_t: Vec<f64> = [1.0, 2.0, 5.0, 10.0, 20.0].into_iter().filter(|&t| t <= cfg.t_max).collect();
        let ev = oracle::evolve_direct(&m, &initial_stream(&m, &cfg.data.omega0), &check_t)?;
        let mut check = Vec::new();
        for (t, o) in check_t.iter().zip(&ev) {
            let o = padded(o);
            let got = rep.psi(*t)?;
            let num: f64 = got.iter().zip(&o).map(|(a, b)| (a - b).norm_sqr()).sum();
            let den: f64 = o.iter().map(|b| b.norm_sqr()).sum();
            check.push(json!({ "t": t, "relative_l2": (num / den).sqrt() }));
        }

        let window = fit_window(cfg.t_max);
        let d = depletion_series(&s, window.0);
        runs.push(json!({
            "alpha": alpha,
            "fit_window": [window.0, window.1],
            "norm_V": fit_json(decay_fit(&s.t, &s.norm_v, window)),
            "norm_V2": fit_json(decay_fit(&s.t, &s.norm_v2, window)),
            "depletion_ratio": d.ratio_zero,
            "decreasing_fraction": d.decreasing_fraction,
            "probe_range": [d.probe_range.0, d.probe_range.1],
            "y_probe": d.y_probe,
            "removed_eigenmodes": removed,
            "representation_check": check,
        }));
    }
    out.json("manifest_simulate.json", &manifest("simulate", cfg, runs, files, notes, clock))?;
    Ok(())
}

pub fn spectral(cfg: &RunConfig, out: &OutDir) -> Result<()> {
    let clock = Instant::now();
    let p = profile(cfg)?;
    let opts = cfg.solver.options();
    let (mut runs, mut files) = (Vec::new(), Vec::new());
    let mut scan = String::new();
    for &alpha in &cfg.alpha_list {
        let t = spectral_tables(&p, alpha, cfg.grids.nc, &opts)?;
        let tag = alpha_tag(alpha);
        let rows = t.rows.iter().map(|r| vec![r.c, r.y_c, r.a1, r.a, r.b, r.j, r.a2, r.b2, r.ii2, r.ii3]);
        files.push(file_name(&out.csv(&format!("spectral_{tag}.csv"), &SPECTRAL_HEADER, rows)?));
        let cands = scan_embedding(&p, &t, cfg.embedding_threshold);
        let list: Vec<String> = cands.iter().map(|c| crate::output::fmt17(*c)).collect();
        scan.push_str(&format!("alpha: {alpha}\nembedding_candidates: [{}]\n", list.join(", ")));
        let (r1, r2) = bound_ratios(&t);
        let m = oracle::assemble(&p, alpha, cfg.grids.n_oracle)?;
        let spec = oracle::discrete_spectrum(&m);
        let ev = spec.eigenvalues.iter().map(|z| vec![z.re, z.im]);
        files.push(file_name(&out.csv(&format!("eigenvalues_{tag}.csv"), &["re", "im"], ev)?));
        runs.push(json!({
            "alpha": alpha,
            "embedding_candidates": cands,
            "fitted_C_ab": fitted_constant(&r1),
            "fitted_C_ab2": fitted_constant(&r2),
            "oracle_max_abs_imag": spec.max_abs_imag,
            "oracle_discrete": spec.discrete.len(),
        }));
    }
    files.push(file_name(&out.text("scan_report.txt", &scan)?));
    out.json("manifest_spectral.json", &manifest("spectral", cfg, runs, files, vec![], clock))?;
    Ok(())
}

pub fn kernels(cfg: &RunConfig, out: &OutDir) -> Result<()> {
    let clock = Instant::now();
    let p = profile(cfg)?;
    let opts = cfg.solver.options();
    let wo = ParityPart::new(cfg.data.omega0.clone(), Parity::Odd);
    let we = ParityPart::new(cfg.data.omega0.clone(), Parity::Even);
    let ctx = KernelContext::new(&p, KernelData { omega_o: &wo, omega_e: &we, g_odd: &cfg.data.g_odd, g_even: &cfg.data.g_even })?;
    let (mut runs, mut files) = (Vec::new(), Vec::new());
    for &alpha in &cfg.alpha_list {
        let kt = kernel_tables(&ctx, alpha, cfg.grids.nc, &opts)?;
        let rows = kt.rows.iter().map(|r| vec![r.c, r.k_o, r.k_e, r.lambda1, r.lambda2, r.lambda3, r.lambda4]);
        files.push(file_name(&out.csv(&format!("kernels_{}.csv", alpha_tag(alpha)), &KERNEL_HEADER, rows)?));
        let ct = kt.c_tilde();
        let endpoint = |k: &[f64]| {
            let max = k.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            k[0].abs().max(k[k.len() - 1].abs()) / max
        };
        let (ko, ke) = (kt.k_o(), kt.k_e());
        runs.push(json!({
            "alpha": alpha,
            "norms_K_o": kernel_norms(&ct, &ko),
            "norms_K_e": kernel_norms(&ct, &ke),
            "endpoint_ratio_K_o": endpoint(&ko),
            "endpoint_ratio_K_e": endpoint(&ke),
        }));
    }
    out.json("manifest_kernels.json", &manifest("kernels", cfg, runs, files, vec![], clock))?;
    Ok(())
}

pub fn depletion(cfg: &RunConfig, out: &OutDir) -> Result<()> {
    let clock = Instant::now();
    let p = profile(cfg)?;
    let (mut runs, mut files, mut notes) = (Vec::new(), Vec::new(), Vec::new());
    for &alpha in &cfg.alpha_list {
        let (s, removed) = oracle_run(&p, cfg, alpha)?;
        notes.push(projection_note(removed, alpha));
        let window = fit_window(cfg.t_max);
        let d = depletion_series(&s, window.0);
        let tag = alpha_tag(alpha);
        let rows = (0..d.t.len()).map(|k| vec![d.t[k], d.at_zero[k], d.at_probe[k]]);
        files.push(file_name(&out.csv(&format!("depletion_{tag}.csv"), &["t", "omega0_abs", "omega_probe_abs"], rows)?));
        let last = s.t.len() - 1;
        let sc = s.scattering_profile(&p, last);
        let rows = (0..s.y.len()).map(|j| vec![s.y[j], sc[j].re, sc[j].im]);
        files.push(file_name(&out.csv(&format!("scattering_{tag}.csv"), &["y", "re", "im"], rows)?));
        runs.push(json!({
            "alpha": alpha,
            "depletion_ratio": d.ratio_zero,
            "decreasing_fraction": d.decreasing_fraction,
            "probe_range": [d.probe_range.0, d.probe_range.1],
            "y_probe": d.y_probe,
        }));
    }
    out.json("manifest_depletion.json", &manifest("depletion", cfg, runs, files, notes, clock))?;
    Ok(())
}

pub fn transport(cfg: &RunConfig, out: &OutDir) -> Result<()> {
    let clock = Instant::now();
    let p = profile(cfg)?;
    let t = cfg.transport_times();
    let w = |y: f64| cfg.data.omega0.val(y);
    let eta = |y: f64| cfg.data.eta.val(y);
    let (mut runs, mut files) = (Vec::new(), Vec::new());
    for &alpha in &cfg.alpha_list {
        let v = t
            .iter()
            .map(|&t| transport_reference(&p, &w, &eta, alpha, t, (-1.0, 1.0)).map(|z| z.norm()))
            .collect::<Result<Vec<f64>, _>>()?;
        let rows = t.iter().zip(&v).map(|(t, v)| vec![*t, *v]);
        files.push(file_name(&out.csv(&format!("transport_{}.csv", alpha_tag(alpha)), &["t", "abs_integral"], rows)?));
        let fit = decay_fit(&t, &v, (cfg.transport.t_min, cfg.transport.t_max));
        runs.push(json!({ "alpha": alpha, "fit": fit_json(fit) }));
    }
    out.json("manifest_transport.json", &manifest("transport", cfg, runs, files, vec![], clock))?;
    Ok(())
}

/// Summary across prior runs in `dir`.
pub fn report(dir: &Path, out: &OutDir) -> Result<()> {
    let read = |name: &str| -> Result<Option<Value>> {
        let path = dir.join(name);
        if !path.exists() {
            return Ok(None);
        }
        let text = std::fs::read_to_string(&path)?;
        Ok(Some(serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?))
    };
    let Some(sim) = read("manifest_simulate.json")? else {
        bail!("MissingRun: no simulate manifest in {}", dir.display());
    };
    let transport = read("manifest_transport.json")?;
    let runs = sim["runs"].as_array().cloned().unwrap_or_default();
    if runs.is_empty() {
        bail!("MissingRun: the simulate manifest in {} lists no runs", dir.display());
    }
    let transport_for = |alpha: f64| -> Value {
        transport
            .as_ref()
            .and_then(|m| m["runs"].as_array())
            .and_then(|rs| rs.iter().find(|r| r["alpha"].as_f64() == Some(alpha)))
            .map(|r| r["fit"]["exponent"].clone())
            .unwrap_or(Value::Null)
    };
    let mut rows = Vec::new();
    let mut long = Vec::new();
    for r in &runs {
        let alpha = r["alpha"].as_f64().context("simulate manifest: run without alpha")?;
        rows.push(json!({
            "alpha": alpha,
            "exponent_V": r["norm_V"]["exponent"],
            "exponent_V2": r["norm_V2"]["exponent"],
            "transport_exponent": transport_for(alpha),
            "depletion_ratio": r["depletion_ratio"],
        }));
        let series = dir.join(format!("series_{}.csv", alpha_tag(alpha)));
        let mut rd = csv::Reader::from_path(&series).with_context(|| format!("MissingRun: {}", series.display()))?;
        let header: Vec<String> = rd.headers()?.iter().map(String::from).collect();
        for rec in rd.records() {
            let rec = rec?;
            for (k, name) in header.iter().enumerate().skip(1) {
                long.push((alpha, name.clone(), rec[0].to_string(), rec[k].to_string()));
            }
        }
    }
    let path = out.path("report_long.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["alpha", "quantity", "t", "value"])?;
    for (a, q, t, v) in &long {
        w.write_record([crate::output::fmt17(*a).as_str(), q, t, v])?;
    }
    w.flush()?;
    out.json("summary.json", &json!({ "rows": rows }))?;
    Ok(())
}
