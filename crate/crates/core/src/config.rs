//! Experiment configuration files.
//!
//! A config is a small TOML document. Every key is optional; anything left
//! out takes the default protocol value, and unknown keys are rejected.
//!
//! ```toml
//! model = 4
//! runs = 180
//! epochs = 200
//! seed = 42
//!
//! [world]
//! n_cells = 60
//! beacon = 30
//! omega = 0.1
//!
//! [layout]
//! shared = 30
//! private_a = 15
//! private_b = 45
//!
//! [agent_b]
//! alpha = 0.5
//!
//! [system]
//! sigma = 3.0
//! reference = "shared_target"
//!
//! [output]
//! dir = "results"
//! snapshots = "none"
//!
//! [metrics]
//! reach_radius = 0
//! pursuit_radius = 7
//! canonical_cell = 30
//! ```
//!
//! `agent_a`/`agent_b` tables override the model presets. `k`, `xi`, `eta`
//! and `grad_steps` apply to every model; `alpha` sets the alterity used by
//! the Theory-of-Mind models (2 and 4) and `gamma` the alignment used by the
//! goal-alignment models (3 and 4).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agent::AgentParams;
use crate::dyad::{AgentId, SnapshotPolicy};
use crate::ensemble::{Reference, SystemConfig};
use crate::environment::{TargetLayout, WorldConfig};
use crate::experiments::{MetricsConfig, ModelSpec, Protocol, DEFAULT_EPOCHS, DEFAULT_RUNS};
use crate::{Error, Result};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    model: Option<u8>,
    runs: Option<usize>,
    epochs: Option<usize>,
    seed: Option<u64>,
    #[serde(default)]
    world: RawWorld,
    #[serde(default)]
    layout: RawLayout,
    #[serde(default)]
    agent_a: AgentOverrides,
    #[serde(default)]
    agent_b: AgentOverrides,
    #[serde(default)]
    system: RawSystem,
    #[serde(default)]
    output: RawOutput,
    #[serde(default)]
    metrics: RawMetrics,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWorld {
    n_cells: Option<usize>,
    beacon: Option<usize>,
    omega: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLayout {
    shared: Option<usize>,
    private_a: Option<usize>,
    private_b: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    sigma: Option<f64>,
    reference: Option<Reference>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
    snapshots: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMetrics {
    reach_radius: Option<usize>,
    pursuit_radius: Option<usize>,
    canonical_cell: Option<usize>,
}

/// Per-agent parameter overrides on top of the model presets.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grad_steps: Option<usize>,
}

impl AgentOverrides {
    /// Applies the overrides to a preset of model `model`.
    pub fn apply(&self, mut params: AgentParams, model: u8) -> AgentParams {
        let tom = matches!(model, 2 | 4);
        let aligned = matches!(model, 3 | 4);
        if let Some(k) = self.k {
            params.k = k;
        }
        if let (Some(alpha), true) = (self.alpha, tom) {
            params.alpha = alpha;
        }
        if let (Some(gamma), true) = (self.gamma, aligned) {
            params.gamma = gamma;
        }
        if let Some(xi) = self.xi {
            params.xi = xi;
        }
        if let Some(eta) = self.eta {
            params.eta = eta;
        }
        if let Some(steps) = self.grad_steps {
            params.grad_steps = steps;
        }
        params
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputConfig {
    pub dir: PathBuf,
    #[serde(with = "policy_text")]
    pub snapshots: SnapshotPolicy,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("results"),
            snapshots: SnapshotPolicy::None,
        }
    }
}

mod policy_text {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::dyad::SnapshotPolicy;

    pub fn serialize<S: Serializer>(p: &SnapshotPolicy, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(p)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<SnapshotPolicy, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Fully resolved experiment configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Model used by single-model runs.
    pub model: Option<u8>,
    pub runs: usize,
    pub epochs: usize,
    pub seed: u64,
    pub world: WorldConfig,
    pub layout: TargetLayout,
    pub agent_a: AgentOverrides,
    pub agent_b: AgentOverrides,
    pub system: SystemConfig,
    pub output: OutputConfig,
    pub metrics: MetricsConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            model: None,
            runs: DEFAULT_RUNS,
            epochs: DEFAULT_EPOCHS,
            seed: 0,
            world: WorldConfig::default(),
            layout: TargetLayout::default(),
            agent_a: AgentOverrides::default(),
            agent_b: AgentOverrides::default(),
            system: SystemConfig::default(),
            output: OutputConfig::default(),
            metrics: MetricsConfig::default(),
        }
    }
}

impl ExperimentConfig {
    /// Parses and validates config text.
    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| {
            let line = e
                .span()
                .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1)
                .unwrap_or(0);
            Error::Parse {
                line,
                message: e.message().to_string(),
            }
        })?;
        let config = Self::resolve(raw)?;
        config.validate()?;
        Ok(config)
    }

    fn resolve(raw: RawConfig) -> Result<Self> {
        let defaults = ExperimentConfig::default();
        let n = raw.world.n_cells.unwrap_or(defaults.world.n_cells);
        let world = WorldConfig {
            n_cells: n,
            beacon: raw.world.beacon.unwrap_or(n / 2),
            omega: raw.world.omega.unwrap_or(defaults.world.omega),
        };
        let layout = TargetLayout {
            shared: raw.layout.shared.unwrap_or(n / 2),
            private_a: raw.layout.private_a.unwrap_or(n / 4),
            private_b: raw.layout.private_b.unwrap_or(3 * n / 4),
        };
        let system = SystemConfig {
            sigma: raw.system.sigma.unwrap_or(defaults.system.sigma),
            reference: raw.system.reference.unwrap_or(defaults.system.reference),
        };
        let snapshots = match raw.output.snapshots {
            Some(text) => text.parse()?,
            None => defaults.output.snapshots,
        };
        Ok(ExperimentConfig {
            model: raw.model,
            runs: raw.runs.unwrap_or(defaults.runs),
            epochs: raw.epochs.unwrap_or(defaults.epochs),
            seed: raw.seed.unwrap_or(defaults.seed),
            world,
            layout,
            agent_a: raw.agent_a,
            agent_b: raw.agent_b,
            system,
            output: OutputConfig {
                dir: raw.output.dir.unwrap_or(defaults.output.dir),
                snapshots,
            },
            metrics: MetricsConfig {
                reach_radius: raw.metrics.reach_radius.unwrap_or(0),
                pursuit_radius: raw.metrics.pursuit_radius,
                canonical_cell: raw.metrics.canonical_cell,
            },
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(m) = self.model {
            if !(1..=4).contains(&m) {
                return Err(Error::Config(format!(
                    "model = {m} is not one of 1, 2, 3, 4"
                )));
            }
        }
        if self.runs == 0 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        self.world.validate()?;
        self.layout.validate(&self.world)?;
        self.system.validate()?;
        if let Some(c) = self.metrics.canonical_cell {
            if c >= self.world.n_cells {
                return Err(Error::Config(format!(
                    "metrics.canonical_cell = {c} outside the world"
                )));
            }
        }
        for m in 1..=4 {
            let spec = self.model_spec(m)?;
            for agent in [AgentId::A, AgentId::B] {
                spec.params(agent).validate().map_err(|e| {
                    Error::Config(format!("{} {}: {e}", agent_table(agent), spec.name))
                })?;
            }
        }
        Ok(())
    }

    /// The preset for `model` with this config's overrides and sizes.
    pub fn model_spec(&self, model: u8) -> Result<ModelSpec> {
        let mut spec = ModelSpec::preset(model)?;
        spec.params_a = self.agent_a.apply(spec.params_a, model);
        spec.params_b = self.agent_b.apply(spec.params_b, model);
        spec.runs = self.runs;
        spec.epochs = self.epochs;
        Ok(spec)
    }

    pub fn protocol(&self) -> Protocol {
        Protocol {
            world: self.world,
            base_layout: self.layout,
            master_seed: self.seed,
            system: self.system,
            metrics: self.metrics,
            snapshots: self.output.snapshots,
        }
    }

    /// Canonical TOML rendering of the effective configuration.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

fn agent_table(agent: AgentId) -> &'static str {
    match agent {
        AgentId::A => "agent_a",
        AgentId::B => "agent_b",
    }
}
