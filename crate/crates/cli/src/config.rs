//! Run configuration: one TOML file per run, with command-line overrides.

use std::path::Path;

use anyhow::Context;
use gremlab::OrderParameter;
use serde::{Deserialize, Serialize};

use crate::Invalid;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub model: Option<ModelConfig>,
    pub tstar: Option<TstarConfig>,
    pub free_energy: Option<FreeEnergyConfig>,
    pub simulate: Option<SimulateConfig>,
    pub fluctuations: Option<FluctuationsConfig>,
    pub cascade: Option<CascadeConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub x: Vec<f64>,
    pub q: Vec<f64>,
    #[serde(default)]
    pub h: f64,
}

impl ModelConfig {
    pub fn order_parameter(&self) -> Result<OrderParameter, Invalid> {
        OrderParameter::new(self.x.clone(), self.q.clone()).map_err(Invalid::from)
    }
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            x: vec![1.0],
            q: vec![1.0],
            h: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TstarConfig {
    pub h_grid: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreeEnergyConfig {
    /// Explicit grid; overrides the `beta_min`/`beta_max`/`beta_count` range.
    pub betas: Option<Vec<f64>>,
    #[serde(default = "defaults::beta_min")]
    pub beta_min: f64,
    #[serde(default = "defaults::beta_max")]
    pub beta_max: f64,
    #[serde(default = "defaults::beta_count")]
    pub beta_count: usize,
    #[serde(default = "defaults::variational_grid")]
    pub variational_grid: usize,
}

impl Default for FreeEnergyConfig {
    fn default() -> Self {
        Self {
            betas: None,
            beta_min: defaults::beta_min(),
            beta_max: defaults::beta_max(),
            beta_count: defaults::beta_count(),
            variational_grid: defaults::variational_grid(),
        }
    }
}

impl FreeEnergyConfig {
    pub fn grid(&self) -> Vec<f64> {
        match &self.betas {
            Some(b) => b.clone(),
            None if self.beta_count < 2 => vec![self.beta_min],
            None => (0..self.beta_count)
                .map(|i| self.beta_min + (self.beta_max - self.beta_min) * i as f64 / (self.beta_count - 1) as f64)
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub n: usize,
    #[serde(default)]
    pub betas: Vec<f64>,
    #[serde(default = "defaults::one")]
    pub replicas: usize,
    #[serde(default)]
    pub top_k: usize,
    #[serde(default)]
    pub zero_disorder: bool,
    #[serde(default = "defaults::size_cap")]
    pub size_cap: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluctuationsConfig {
    pub n: usize,
    #[serde(default = "defaults::replicas")]
    pub replicas: usize,
    #[serde(default = "defaults::top_k")]
    pub top_k: usize,
    /// Interval for the Poisson count check (single-level models).
    #[serde(default = "defaults::interval")]
    pub interval: [f64; 2],
    #[serde(default = "defaults::cascade_seeds")]
    pub cascade_seeds: usize,
    #[serde(default = "defaults::top_k")]
    pub cascade_k: usize,
    /// Field used to build the rescaling; defaults to the model field.
    pub scaling_h: Option<f64>,
    #[serde(default = "defaults::size_cap")]
    pub size_cap: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CascadeConfig {
    pub beta: f64,
    /// Level weights; taken from the coarse-grained model when absent.
    pub gamma_bar: Option<Vec<f64>>,
    #[serde(default = "defaults::top_k")]
    pub k: usize,
    #[serde(default = "defaults::cascade_seeds")]
    pub seeds: usize,
    #[serde(default = "defaults::top_fraction")]
    pub top_fraction: f64,
}

mod defaults {
    pub fn beta_min() -> f64 {
        0.05
    }
    pub fn beta_max() -> f64 {
        4.0
    }
    pub fn beta_count() -> usize {
        80
    }
    pub fn variational_grid() -> usize {
        4096
    }
    pub fn one() -> usize {
        1
    }
    pub fn replicas() -> usize {
        200
    }
    pub fn top_k() -> usize {
        64
    }
    pub fn interval() -> [f64; 2] {
        [0.0, 1.0]
    }
    pub fn cascade_seeds() -> usize {
        10_000
    }
    pub fn top_fraction() -> f64 {
        0.1
    }
    pub fn size_cap() -> usize {
        gremlab::simulator::DEFAULT_SIZE_CAP
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, Invalid> {
        toml::from_str(text).map_err(|e| Invalid(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> anyhow::Result<(Self, String)> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Ok((Self::parse(&text)?, text))
    }

    pub fn model(&self) -> ModelConfig {
        self.model.clone().unwrap_or_default()
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
