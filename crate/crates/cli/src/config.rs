//! Run configuration: backends, reward constants, workspace settings and
//! per-domain generator parameters, read from TOML.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use tasknet::agent::Timing;
use tasknet::domains::{CellParams, Domain};
use tasknet::environment::{EnvConfig, RewardConfig};
use tasknet::gateway::BackendConfig;
use tasknet::harness::BatchSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct BlocksworldParams {
    pub b: usize,
    pub h: usize,
}

impl Default for BlocksworldParams {
    fn default() -> Self {
        Self { b: 3, h: 3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct UnitMovementParams {
    pub n: usize,
    pub k: usize,
}

impl Default for UnitMovementParams {
    fn default() -> Self {
        Self { n: 10, k: 6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RecipeParams {
    pub distractors: usize,
}

impl Default for RecipeParams {
    fn default() -> Self {
        Self {
            distractors: tasknet::domains::recipe::DEFAULT_DISTRACTORS,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct DomainParams {
    pub blocksworld: BlocksworldParams,
    pub unit_movement: UnitMovementParams,
    pub recipe: RecipeParams,
}

fn default_network_retries() -> u32 {
    3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    /// Backend choosing actions.
    #[serde(default)]
    pub actor: Option<BackendConfig>,
    /// Backend judging task effects; accepts everything when unset.
    #[serde(default)]
    pub verifier: Option<BackendConfig>,
    /// Backend writing method libraries; falls back to the actor.
    #[serde(default)]
    pub generator: Option<BackendConfig>,
    #[serde(default = "default_network_retries")]
    pub network_retries: u32,
    #[serde(default)]
    pub reward: RewardConfig,
    #[serde(default)]
    pub env: EnvConfig,
    #[serde(default)]
    pub timing: Timing,
    #[serde(default)]
    pub domains: DomainParams,
    /// Method libraries for the llm-tn condition, overriding bundled ones.
    #[serde(default)]
    pub llm_networks: BTreeMap<Domain, PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            actor: None,
            verifier: None,
            generator: None,
            network_retries: default_network_retries(),
            reward: RewardConfig::default(),
            env: EnvConfig::default(),
            timing: Timing::default(),
            domains: DomainParams::default(),
            llm_networks: BTreeMap::new(),
        }
    }
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn default_cell(&self, domain: Domain) -> CellParams {
        match domain {
            Domain::Blocksworld => CellParams::Blocksworld {
                b: self.domains.blocksworld.b,
                h: self.domains.blocksworld.h,
            },
            Domain::UnitMovement => CellParams::UnitMovement {
                n: self.domains.unit_movement.n,
                k: self.domains.unit_movement.k,
            },
            Domain::Recipe => CellParams::Recipe {
                distractors: self.domains.recipe.distractors,
            },
        }
    }
}

/// Endpoint and credential overrides from the environment. Nothing else
/// about a backend can be changed this way.
#[derive(Debug, Clone, Default)]
pub struct HttpOverrides {
    pub endpoint: Option<String>,
    pub api_key: Option<String>,
}

impl HttpOverrides {
    pub fn apply(&self, backend: &mut BackendConfig) {
        if let BackendConfig::HttpChat(http) = backend {
            if let Some(endpoint) = &self.endpoint {
                http.endpoint = endpoint.clone();
            }
            if let Some(key) = &self.api_key {
                http.api_key = Some(key.clone());
            }
        }
    }

    pub fn apply_spec(&self, spec: &mut BatchSpec) {
        self.apply(&mut spec.actor);
        self.apply(&mut spec.verifier);
    }
}

/// Reads a batch spec as TOML, or as JSON when the file ends in `.json`.
pub fn load_batch_spec(path: &Path) -> Result<BatchSpec> {
    let text = fs::read_to_string(path).with_context(|| format!("reading batch spec {}", path.display()))?;
    let spec = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).with_context(|| format!("parsing batch spec {}", path.display()))?
    } else {
        toml::from_str(&text).with_context(|| format!("parsing batch spec {}", path.display()))?
    };
    Ok(spec)
}
