use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use raydamp_core::funcs::FunctionSpec;
use raydamp_core::profiles::ProfileDescriptor;
use raydamp_core::rayleigh::SolverOptions;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub profile: Option<ProfileDescriptor>,
    #[serde(default = "default_alphas")]
    pub alpha_list: Vec<f64>,
    #[serde(default)]
    pub grids: Grids,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default = "default_t_samples")]
    pub t_samples: usize,
    #[serde(default)]
    pub data: Data,
    #[serde(default)]
    pub transport: Transport,
    #[serde(default)]
    pub solver: Solver,
    /// Informational; the subcommand decides what runs.
    #[serde(default)]
    pub experiment: Option<String>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_threshold")]
    pub embedding_threshold: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grids {
    pub ny: usize,
    pub nc: usize,
    pub n_oracle: usize,
}

impl Default for Grids {
    fn default() -> Self {
        Self { ny: 257, nc: 512, n_oracle: 257 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Data {
    pub omega0: FunctionSpec,
    pub g_odd: FunctionSpec,
    pub g_even: FunctionSpec,
    /// Weight for the transport baseline.
    pub eta: FunctionSpec,
}

impl Default for Data {
    fn default() -> Self {
        Self {
            omega0: FunctionSpec::Sum { terms: vec![FunctionSpec::cos_pi(0.5), FunctionSpec::SinPi { k: 1.0, amp: 0.5 }] },
            g_odd: FunctionSpec::sin_pi(1.0),
            g_even: FunctionSpec::cos_pi(0.5),
            eta: FunctionSpec::constant(1.0),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Transport {
    pub t_min: f64,
    pub t_max: f64,
    pub samples: usize,
}

impl Default for Transport {
    fn default() -> Self {
        Self { t_min: 10.0, t_max: 1e4, samples: 61 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Solver {
    pub n: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for Solver {
    fn default() -> Self {
        let o = SolverOptions::default();
        Self { n: o.n, tol: o.tol, max_iter: o.max_iter }
    }
}

impl Solver {
    pub fn options(&self) -> SolverOptions {
        SolverOptions { n: self.n, tol: self.tol, max_iter: self.max_iter }
    }
}

fn default_alphas() -> Vec<f64> {
    vec![1.0]
}
fn default_t_max() -> f64 {
    100.0
}
fn default_t_samples() -> usize {
    201
}
fn default_threshold() -> f64 {
    1e-8
}

fn pow2(n: usize) -> bool {
    n >= 2 && n.is_power_of_two()
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let cfg: RunConfig = match path.extension().and_then(|e| e.to_str()) {
            Some("toml") => toml::from_str(&text).with_context(|| format!("parsing TOML config {}", path.display()))?,
            _ => serde_json::from_str(&text).with_context(|| format!("parsing JSON config {}", path.display()))?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn profile(&self) -> &ProfileDescriptor {
        self.profile.as_ref().expect("validated")
    }

    pub fn validate(&self) -> Result<()> {
        if self.profile.is_none() {
            bail!("profile: missing profile descriptor");
        }
        if self.alpha_list.is_empty() {
            bail!("alpha_list: at least one wavenumber is required");
        }
        for (i, &a) in self.alpha_list.iter().enumerate() {
            if !(a.is_finite() && a > 0.0) {
                bail!("alpha_list[{i}]: alpha = {a} rejected; the evolution formulas require alpha > 0");
            }
        }
        let g = &self.grids;
        if !(g.ny >= 5 && pow2(g.ny - 1)) {
            bail!("grids.ny: {} must be 2^k + 1", g.ny);
        }
        if !pow2(g.nc) {
            bail!("grids.nc: {} must be a power of two", g.nc);
        }
        if !(g.n_oracle >= 5 && pow2(g.n_oracle - 1)) {
            bail!("grids.n_oracle: {} must be 2^k + 1", g.n_oracle);
        }
        if self.t_samples < 16 {
            bail!("t_samples: {} is below the minimum of 16", self.t_samples);
        }
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            bail!("t_max: must be positive, got {}", self.t_max);
        }
        let t = &self.transport;
        if !(t.t_min > 0.0 && t.t_max > t.t_min && t.samples >= 2) {
            bail!("transport: need 0 < t_min < t_max and at least two samples");
        }
        if self.solver.n < 5 || !(self.solver.tol > 0.0) {
            bail!("solver: n must be at least 5 and tol positive");
        }
        Ok(())
    }

    /// Uniform samples on [0, t_max].
    pub fn times(&self) -> Vec<f64> {
        let n = self.t_samples - 1;
        (0..=n).map(|k| self.t_max * k as f64 / n as f64).collect()
    }

    /// Log-spaced samples for the transport baseline.
    pub fn transport_times(&self) -> Vec<f64> {
        let t = &self.transport;
        let n = t.samples - 1;
        let (a, b) = (t.t_min.ln(), t.t_max.ln());
        (0..=n).map(|k| (a + (b - a) * k as f64 / n as f64).exp()).collect()
    }
}
