//! Benchmark domains: instance generators, request renderers, answer
//! checkers and reference solvers.

pub mod blocksworld;
pub mod recipe;
pub mod unit_movement;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use blocksworld::{bfs_plan_blocksworld, check_blocksworld, gen_blocksworld, BwInstance, BwPlan, BwStep};
pub use recipe::{bundled_db, check_recipe, gen_recipe, tool_get_dishes, tool_get_ingredients, RecipeDb, RgInstance};
pub use unit_movement::{check_unit_movement, feasible_assignment, gen_unit_movement, UmInstance, UmRules};

use crate::environment::Manifest;
use crate::resources;
use crate::task_network::{load_method_library, LibraryError, MethodLibrary};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DomainError {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("name pool exhausted: need {needed}, have {available}")]
    NamePoolExhausted { needed: usize, available: usize },
    #[error("search bound exceeded: {blocks} blocks, bound is {bound}")]
    OracleBoundExceeded { blocks: usize, bound: usize },
    #[error("not enough distractor ingredients: need {needed}, have {available}")]
    InsufficientDistractors { needed: usize, available: usize },
    #[error("recipe database is empty")]
    EmptyDatabase,
    #[error("recipe database line {line}: {message}")]
    MalformedDatabase { line: usize, message: String },
}

/// Ground-truth judgement of a final answer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Verdict {
    Accept,
    Reject {
        reason: String,
        /// 1-based index of the offending step or move, when there is one.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        step: Option<usize>,
    },
}

impl Verdict {
    pub fn reject(reason: impl Into<String>, step: Option<usize>) -> Self {
        Self::Reject {
            reason: reason.into(),
            step,
        }
    }

    pub fn is_accept(&self) -> bool {
        matches!(self, Self::Accept)
    }

    pub fn reason(&self) -> Option<&str> {
        match self {
            Self::Accept => None,
            Self::Reject { reason, .. } => Some(reason),
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Accept => f.write_str("accept"),
            Self::Reject { reason, step: Some(s) } => write!(f, "reject at step {s}: {reason}"),
            Self::Reject { reason, step: None } => write!(f, "reject: {reason}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Domain {
    Blocksworld,
    UnitMovement,
    Recipe,
}

impl Domain {
    pub const ALL: [Domain; 3] = [Domain::Blocksworld, Domain::UnitMovement, Domain::Recipe];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Blocksworld => "blocksworld",
            Self::UnitMovement => "unit-movement",
            Self::Recipe => "recipe",
        }
    }

    pub fn problem_spec(self) -> &'static str {
        match self {
            Self::Blocksworld => resources::BLOCKSWORLD_SPEC,
            Self::UnitMovement => resources::UNIT_MOVEMENT_SPEC,
            Self::Recipe => resources::RECIPE_SPEC,
        }
    }

    pub fn human_network(self) -> &'static str {
        match self {
            Self::Blocksworld => resources::BLOCKSWORLD_NETWORK,
            Self::UnitMovement => resources::UNIT_MOVEMENT_NETWORK,
            Self::Recipe => resources::RECIPE_NETWORK,
        }
    }

    /// Bundled model-generated network, where one exists.
    pub fn llm_network(self) -> Option<&'static str> {
        match self {
            Self::Blocksworld => Some(resources::LLM_BLOCKSWORLD_NETWORK),
            Self::UnitMovement => Some(resources::LLM_UNIT_MOVEMENT_NETWORK),
            Self::Recipe => None,
        }
    }

    pub fn human_library(self) -> Result<MethodLibrary, LibraryError> {
        load_method_library(self.human_network())
    }
}

impl FromStr for Domain {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "blocksworld" | "bw" => Ok(Self::Blocksworld),
            "unit-movement" | "um" => Ok(Self::UnitMovement),
            "recipe" | "rg" => Ok(Self::Recipe),
            other => Err(format!(
                "unknown domain `{other}` (expected blocksworld, unit-movement or recipe)"
            )),
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Generator parameters for one grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "domain", rename_all = "kebab-case")]
pub enum CellParams {
    Blocksworld { b: usize, h: usize },
    UnitMovement { n: usize, k: usize },
    Recipe { distractors: usize },
}

impl CellParams {
    pub fn domain(&self) -> Domain {
        match self {
            Self::Blocksworld { .. } => Domain::Blocksworld,
            Self::UnitMovement { .. } => Domain::UnitMovement,
            Self::Recipe { .. } => Domain::Recipe,
        }
    }

    /// Short stable label such as `b=3,h=3`.
    pub fn label(&self) -> String {
        match self {
            Self::Blocksworld { b, h } => format!("b={b},h={h}"),
            Self::UnitMovement { n, k } => format!("n={n},k={k}"),
            Self::Recipe { distractors } => format!("distractors={distractors}"),
        }
    }

    pub fn generate(&self, seed: u64) -> Result<Instance, DomainError> {
        Ok(match *self {
            Self::Blocksworld { b, h } => Instance::Blocksworld(gen_blocksworld(b, h, seed)?),
            Self::UnitMovement { n, k } => Instance::UnitMovement(gen_unit_movement(n, k, seed)?),
            Self::Recipe { distractors } => {
                let db = bundled_db();
                Instance::Recipe(gen_recipe(db, distractors, seed)?)
            }
        })
    }
}

impl fmt::Display for CellParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.domain(), self.label())
    }
}

/// A generated problem of any domain. Recipe instances are judged against
/// the bundled database.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "domain", rename_all = "kebab-case")]
pub enum Instance {
    Blocksworld(BwInstance),
    UnitMovement(UmInstance),
    Recipe(RgInstance),
}

impl Instance {
    pub fn domain(&self) -> Domain {
        match self {
            Self::Blocksworld(_) => Domain::Blocksworld,
            Self::UnitMovement(_) => Domain::UnitMovement,
            Self::Recipe(_) => Domain::Recipe,
        }
    }

    pub fn request(&self) -> String {
        match self {
            Self::Blocksworld(i) => i.request(),
            Self::UnitMovement(i) => i.request(),
            Self::Recipe(i) => i.request(),
        }
    }

    pub fn manifest(&self) -> Manifest {
        let spec = self.domain().problem_spec();
        match self {
            Self::Blocksworld(_) | Self::UnitMovement(_) => Manifest::standard(spec, &self.request(), None, false),
            Self::Recipe(_) => recipe::manifest(spec, &self.request(), bundled_db()),
        }
    }

    pub fn check(&self, answer: &str) -> Verdict {
        match self {
            Self::Blocksworld(i) => check_blocksworld(i, answer),
            Self::UnitMovement(i) => check_unit_movement(i, answer),
            Self::Recipe(i) => check_recipe(bundled_db(), i, answer),
        }
    }

    /// A known-correct answer text, used by oracle actors.
    pub fn oracle_answer(&self) -> Result<String, DomainError> {
        match self {
            Self::Blocksworld(i) => {
                let plan = if i.blocks.len() <= blocksworld::DEFAULT_SEARCH_BOUND {
                    bfs_plan_blocksworld(i)?
                } else {
                    blocksworld::naive_plan_blocksworld(i)
                };
                Ok(plan.render(i))
            }
            Self::UnitMovement(i) => Ok(unit_movement::render_moves(
                &feasible_assignment(i, &UmRules::default()).unwrap_or_default(),
            )),
            Self::Recipe(i) => Ok(i.witness.clone()),
        }
    }
}
