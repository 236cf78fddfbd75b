//! Run configuration: built-in defaults, optionally overridden by a TOML
//! file, then by command-line flags.

use std::path::Path;

use anyhow::Context;
use hcsdr::sim::{EtaKind, ExpParam, ExperimentGrid, Model, Predictors};
use hcsdr::{FitConfig, InitTag};
use serde::{Deserialize, Serialize};

pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub fit: FitConfig,
    pub simulate: SimulateConfig,
    pub real: RealConfig,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            fit: FitConfig::default(),
            simulate: SimulateConfig::default(),
            real: RealConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub models: Vec<Model>,
    pub predictors: Vec<Predictors>,
    pub eta: EtaKind,
    pub inits: Vec<InitTag>,
    pub sample_sizes: Vec<usize>,
    pub replications: usize,
    pub exp_param: ExpParam,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        let g = ExperimentGrid::default();
        Self {
            models: g.models,
            predictors: g.predictors,
            eta: g.eta,
            inits: g.inits,
            sample_sizes: g.sample_sizes,
            replications: g.replications,
            exp_param: g.exp_param,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RealConfig {
    /// Response column; required.
    pub target: String,
    pub drop: Vec<String>,
    pub train_size: usize,
    pub inits: Vec<InitTag>,
    pub span: f64,
}

impl Default for RealConfig {
    fn default() -> Self {
        let r = hcsdr::realdata::RealDataConfig::default();
        Self { target: r.target, drop: r.drop, train_size: r.train_size, inits: r.inits, span: r.span }
    }
}

impl Config {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn grid(&self) -> ExperimentGrid {
        let s = &self.simulate;
        ExperimentGrid {
            models: s.models.clone(),
            predictors: s.predictors.clone(),
            eta: s.eta,
            inits: s.inits.clone(),
            sample_sizes: s.sample_sizes.clone(),
            replications: s.replications,
            master_seed: self.seed,
            exp_param: s.exp_param,
            fit: self.fit,
        }
    }

    pub fn real_data(&self) -> hcsdr::realdata::RealDataConfig {
        let r = &self.real;
        hcsdr::realdata::RealDataConfig {
            target: r.target.clone(),
            drop: r.drop.clone(),
            train_size: r.train_size,
            inits: r.inits.clone(),
            span: r.span,
            seed: self.seed,
            fit: self.fit,
        }
    }
}
