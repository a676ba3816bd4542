use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::geometry::ProbeDistribution;
use crate::nets::Activation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetKind {
    #[default]
    SwissRoll,
    Torus,
    /// Feature CSV at `data_path`.
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurvatureMode {
    /// Differentiable Jacobian penalty in the loss.
    #[default]
    Jacobian,
    /// No curvature term in the loss; curvature is only logged.
    HessianDiagOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActivationName {
    #[default]
    Relu,
    Softplus,
}

impl From<ActivationName> for Activation {
    fn from(a: ActivationName) -> Self {
        match a {
            ActivationName::Relu => Activation::Relu,
            ActivationName::Softplus => Activation::Softplus,
        }
    }
}

fn default_epochs() -> usize {
    30
}
fn default_batch() -> usize {
    256
}
fn default_lr() -> f64 {
    1e-3
}
fn default_probes() -> usize {
    2
}
fn default_n() -> usize {
    6000
}
fn default_eval_every() -> usize {
    5
}
fn default_test_frac() -> f64 {
    0.2
}
fn default_fraction() -> f64 {
    1.0
}

/// One training run. Mirrors the TOML config file key for key.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub beta: f64,
    pub gamma: f64,
    #[serde(default)]
    pub lambda_align: f64,
    pub z_dim: usize,
    pub sigma: f64,
    pub seed: u64,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default = "default_batch")]
    pub batch: usize,
    #[serde(default = "default_lr")]
    pub lr: f64,
    #[serde(default = "default_probes", alias = "probes_K")]
    pub probes_k: usize,
    #[serde(default = "default_n")]
    pub n_samples: usize,
    #[serde(default)]
    pub dataset: DatasetKind,
    #[serde(default)]
    pub curvature_mode: CurvatureMode,
    /// Epoch interval of the full evaluation (Hessian, PR, alignment, MI, efficiency).
    #[serde(default = "default_eval_every")]
    pub eval_every: usize,
    #[serde(default = "default_test_frac")]
    pub test_frac: f64,
    /// Fraction of the training split actually used (sample-efficiency runs).
    #[serde(default = "default_fraction")]
    pub train_fraction: f64,
    #[serde(default)]
    pub probe_distribution: ProbeDistribution,
    #[serde(default)]
    pub activation: ActivationName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data_path: Option<PathBuf>,
}

impl TrainConfig {
    /// Swiss roll, best headline settings apart from the given knobs.
    pub fn new(beta: f64, gamma: f64, z_dim: usize, sigma: f64, seed: u64) -> Self {
        Self {
            beta,
            gamma,
            lambda_align: 0.0,
            z_dim,
            sigma,
            seed,
            epochs: default_epochs(),
            batch: default_batch(),
            lr: default_lr(),
            probes_k: default_probes(),
            n_samples: default_n(),
            dataset: DatasetKind::SwissRoll,
            curvature_mode: CurvatureMode::Jacobian,
            eval_every: default_eval_every(),
            test_frac: default_test_frac(),
            train_fraction: default_fraction(),
            probe_distribution: ProbeDistribution::Rademacher,
            activation: ActivationName::Relu,
            data_path: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let cfg: TrainConfig = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if !(self.beta >= 0.0 && self.gamma >= 0.0 && self.lambda_align >= 0.0) {
            return bad(format!(
                "beta, gamma, lambda_align must be ≥ 0 (got {}, {}, {})",
                self.beta, self.gamma, self.lambda_align
            ));
        }
        if !(self.sigma >= 0.0) {
            return bad(format!("sigma must be ≥ 0, got {}", self.sigma));
        }
        if self.epochs == 0 || self.batch == 0 || self.z_dim == 0 || self.probes_k == 0 || self.eval_every == 0 {
            return bad("epochs, batch, z_dim, probes_k and eval_every must be ≥ 1".into());
        }
        if !(self.lr > 0.0) {
            return bad(format!("lr must be > 0, got {}", self.lr));
        }
        if !(self.test_frac > 0.0 && self.test_frac < 1.0) {
            return bad(format!("test_frac must be in (0, 1), got {}", self.test_frac));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction <= 1.0) {
            return bad(format!("train_fraction must be in (0, 1], got {}", self.train_fraction));
        }
        if self.dataset == DatasetKind::Csv && self.data_path.is_none() {
            return bad("dataset = \"csv\" needs data_path".into());
        }
        Ok(())
    }

    /// Whether the Jacobian penalty enters the gradient.
    pub fn penalized(&self) -> bool {
        self.curvature_mode == CurvatureMode::Jacobian && self.gamma > 0.0
    }
}

/// Cartesian grid of runs sharing a base config. Empty axes fall back to the base value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    pub base: TrainConfig,
    #[serde(default)]
    pub betas: Vec<f64>,
    #[serde(default)]
    pub gammas: Vec<f64>,
    #[serde(default)]
    pub z_dims: Vec<usize>,
    #[serde(default)]
    pub sigmas: Vec<f64>,
    #[serde(default)]
    pub seeds: Vec<u64>,
}

impl SweepGrid {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let g: SweepGrid = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        g.base.validate()?;
        Ok(g)
    }

    /// Configs in β, γ, z_dim, σ, seed order (seed varies fastest).
    pub fn configs(&self) -> Vec<TrainConfig> {
        let or = |v: &Vec<f64>, d: f64| if v.is_empty() { vec![d] } else { v.clone() };
        let betas = or(&self.betas, self.base.beta);
        let gammas = or(&self.gammas, self.base.gamma);
        let sigmas = or(&self.sigmas, self.base.sigma);
        let z_dims = if self.z_dims.is_empty() { vec![self.base.z_dim] } else { self.z_dims.clone() };
        let seeds = if self.seeds.is_empty() { vec![self.base.seed] } else { self.seeds.clone() };
        let mut out = Vec::new();
        for &beta in &betas {
            for &gamma in &gammas {
                for &z_dim in &z_dims {
                    for &sigma in &sigmas {
                        for &seed in &seeds {
                            out.push(TrainConfig {
                                beta,
                                gamma,
                                z_dim,
                                sigma,
                                seed,
                                ..self.base.clone()
                            });
                        }
                    }
                }
            }
        }
        out
    }
}
