//! Batch experiments: grid expansion, seeded parallel episodes, resumable
//! per-episode records, aggregation and reports.

mod report;
mod stats;

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use report::{emit_report, ReportFormat, CONDITION_COLORS, PHASES};
pub use stats::{aggregate, pooled_wall_times, wilson_interval, CellResult, DEFAULT_Z};

use crate::agent::{run_episode, Condition, EpisodeConfig, EpisodeResult, Termination, Timing, WallTimes};
use crate::domains::{CellParams, Domain, Instance, Verdict};
use crate::environment::{EnvConfig, RewardConfig};
use crate::gateway::BackendConfig;
use crate::task_network::{load_method_library, MethodLibrary};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid counts: {successes} successes out of {trials} trials")]
    InvalidCounts { successes: u64, trials: u64 },
    #[error("z must be positive and finite, got {0}")]
    InvalidZ(f64),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("invalid batch spec: {0}")]
    Spec(String),
    #[error("worker pool: {0}")]
    Pool(String),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn default_name() -> String {
    "batch".into()
}
fn default_workers() -> usize {
    1
}
fn default_z() -> f64 {
    DEFAULT_Z
}
fn default_verifier() -> BackendConfig {
    BackendConfig::always_pass()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSpec {
    #[serde(default = "default_name")]
    pub name: String,
    pub cells: Vec<CellParams>,
    pub conditions: Vec<Condition>,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub reward: RewardConfig,
    pub actor: BackendConfig,
    #[serde(default = "default_verifier")]
    pub verifier: BackendConfig,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default)]
    pub timing: Timing,
    #[serde(default)]
    pub env: EnvConfig,
    /// Method libraries for the llm-tn condition, overriding bundled ones.
    #[serde(default)]
    pub llm_networks: BTreeMap<Domain, PathBuf>,
    #[serde(default = "default_z")]
    pub z: f64,
}

impl BatchSpec {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.conditions.is_empty() && self.trials > 0 {
            return Err(HarnessError::Spec("no conditions given".into()));
        }
        if !self.reward.is_valid() {
            return Err(HarnessError::Spec(
                "reward needs r_success > 0, r_step <= 0 and horizon > 0".into(),
            ));
        }
        if self.workers == 0 {
            return Err(HarnessError::Spec("workers must be at least 1".into()));
        }
        if !(self.z > 0.0 && self.z.is_finite()) {
            return Err(HarnessError::InvalidZ(self.z));
        }
        Ok(())
    }

    /// Every episode of the batch, in cell, condition, trial order.
    pub fn jobs(&self) -> Vec<EpisodeKey> {
        let mut jobs = Vec::new();
        for (cell_index, cell) in self.cells.iter().enumerate() {
            for &condition in &self.conditions {
                for trial in 0..self.trials {
                    jobs.push(EpisodeKey {
                        cell_index,
                        cell: *cell,
                        condition,
                        trial,
                        seed: episode_seed(self.seed, cell, condition, trial),
                    });
                }
            }
        }
        jobs
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpisodeKey {
    pub cell_index: usize,
    pub cell: CellParams,
    pub condition: Condition,
    pub trial: usize,
    pub seed: u64,
}

impl EpisodeKey {
    pub fn file_stem(&self) -> String {
        let label: String = self
            .cell
            .label()
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
            .collect();
        format!(
            "{:03}-{}-{}-{}-{:04}",
            self.cell_index,
            self.cell.domain(),
            label,
            self.condition.as_str(),
            self.trial
        )
    }
}

/// Seed of one episode, independent of every other cell and trial so that
/// batches can be extended and resumed.
pub fn episode_seed(batch_seed: u64, cell: &CellParams, condition: Condition, trial: usize) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(batch_seed.to_le_bytes());
    hasher.update(cell.domain().as_str().as_bytes());
    hasher.update([0]);
    hasher.update(cell.label().as_bytes());
    hasher.update([0]);
    hasher.update(condition.as_str().as_bytes());
    hasher.update((trial as u64).to_le_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

/// Persisted summary of one episode; aggregates are computed from these.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub cell: CellParams,
    pub condition: Condition,
    pub trial: usize,
    pub seed: u64,
    pub success: bool,
    pub termination: Termination,
    pub iterations: usize,
    pub reward: f64,
    pub wall_times: WallTimes,
    pub verdict: Option<Verdict>,
    pub final_answer: String,
    pub command_log: Vec<String>,
    pub completed_tasks: Vec<String>,
    pub error: Option<String>,
}

impl EpisodeRecord {
    fn from_result(key: &EpisodeKey, result: &EpisodeResult) -> Self {
        Self {
            cell: key.cell,
            condition: key.condition,
            trial: key.trial,
            seed: key.seed,
            success: result.success,
            termination: result.termination,
            iterations: result.iterations,
            reward: result.reward,
            wall_times: result.wall_times,
            verdict: result.verdict.clone(),
            final_answer: result.final_answer.clone(),
            command_log: result.command_log.clone(),
            completed_tasks: result.completed_tasks.clone(),
            error: result.error.clone(),
        }
    }

    fn infrastructure(key: &EpisodeKey, error: String) -> Self {
        Self {
            cell: key.cell,
            condition: key.condition,
            trial: key.trial,
            seed: key.seed,
            success: false,
            termination: Termination::InfrastructureError,
            iterations: 0,
            reward: 0.0,
            wall_times: WallTimes::default(),
            verdict: None,
            final_answer: String::new(),
            command_log: Vec::new(),
            completed_tasks: Vec::new(),
            error: Some(error),
        }
    }

    fn matches(&self, key: &EpisodeKey) -> bool {
        self.cell == key.cell && self.condition == key.condition && self.trial == key.trial && self.seed == key.seed
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchResult {
    pub name: String,
    pub z: f64,
    pub cells: Vec<CellResult>,
    pub records: Vec<EpisodeRecord>,
}

impl BatchResult {
    /// Rebuilds the aggregates from `records`; used after loading records
    /// from disk.
    pub fn from_records(spec: &BatchSpec, records: Vec<EpisodeRecord>) -> Self {
        Self {
            name: spec.name.clone(),
            z: spec.z,
            cells: aggregate(&records, &spec.cells, &spec.conditions, spec.z),
            records,
        }
    }
}

/// Method library used under `condition`. Under llm-tn an entry in
/// `llm_networks` wins over the bundled generated network; no-tn gets the
/// human library as its reference.
pub fn library_for(
    domain: Domain,
    condition: Condition,
    llm_networks: &BTreeMap<Domain, PathBuf>,
) -> Result<MethodLibrary, String> {
    let human = || domain.human_library().map_err(|e| format!("{domain} network: {e}"));
    match condition {
        Condition::HumanTn | Condition::NoTn => human(),
        Condition::LlmTn => {
            if let Some(path) = llm_networks.get(&domain) {
                let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
                load_method_library(&text).map_err(|e| format!("{}: {e}", path.display()))
            } else if let Some(text) = domain.llm_network() {
                load_method_library(text).map_err(|e| format!("{domain} generated network: {e}"))
            } else {
                Err(format!("no generated network for {domain}; set llm_networks.{domain}"))
            }
        }
    }
}

/// Everything needed to run one episode on a given instance.
#[derive(Debug, Clone)]
pub struct EpisodeSetup<'a> {
    pub actor: &'a BackendConfig,
    pub verifier: &'a BackendConfig,
    pub reward: RewardConfig,
    pub env: &'a EnvConfig,
    pub timing: Timing,
}

/// Builds the backends and runs one episode, judging the final answer with
/// the domain checker. Errors are setup failures (no episode was run).
pub fn run_instance(
    setup: &EpisodeSetup<'_>,
    instance: &Instance,
    condition: Condition,
    library: MethodLibrary,
    seed: u64,
) -> Result<EpisodeResult, String> {
    let needs_oracle = matches!(setup.actor, BackendConfig::Oracle) || matches!(setup.verifier, BackendConfig::Oracle);
    let oracle = if needs_oracle {
        Some(instance.oracle_answer().map_err(|e| e.to_string())?)
    } else {
        None
    };
    let mut actor = setup.actor.build(oracle.as_deref()).map_err(|e| e.to_string())?;
    let mut verifier = setup.verifier.build(oracle.as_deref()).map_err(|e| e.to_string())?;
    let cfg = EpisodeConfig {
        reward: setup.reward,
        condition,
        library,
        env: setup.env.clone(),
        timing: setup.timing,
        seed,
        max_depth: crate::task_network::DEFAULT_MAX_DEPTH,
    };
    let judge = |answer: &str| instance.check(answer);
    Ok(run_episode(
        &cfg,
        &instance.manifest(),
        &mut actor,
        &mut verifier,
        Some(&judge),
    ))
}

/// Runs one episode of the batch.
pub fn run_job(spec: &BatchSpec, key: &EpisodeKey) -> (EpisodeRecord, Option<EpisodeResult>) {
    let attempt = || -> Result<EpisodeResult, String> {
        let instance = key.cell.generate(key.seed).map_err(|e| e.to_string())?;
        let library = library_for(key.cell.domain(), key.condition, &spec.llm_networks)?;
        let setup = EpisodeSetup {
            actor: &spec.actor,
            verifier: &spec.verifier,
            reward: spec.reward,
            env: &spec.env,
            timing: spec.timing,
        };
        run_instance(&setup, &instance, key.condition, library, key.seed)
    };
    match attempt() {
        Ok(result) => (EpisodeRecord::from_result(key, &result), Some(result)),
        Err(e) => (EpisodeRecord::infrastructure(key, e), None),
    }
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), HarnessError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text).map_err(io_err(path))
}

fn read_record(path: &Path, key: &EpisodeKey) -> Option<EpisodeRecord> {
    let text = fs::read_to_string(path).ok()?;
    let record: EpisodeRecord = serde_json::from_str(&text).ok()?;
    (record.matches(key) && record.termination != Termination::InfrastructureError).then_some(record)
}

/// Runs every episode of `spec`. With `out_dir`, each finished episode is
/// written to `episodes/` (summary) and `transcripts/` (full result), and
/// episodes whose summary already exists are not run again. Episodes that
/// ended in an infrastructure error are retried on resume.
pub fn run_batch(spec: &BatchSpec, out_dir: Option<&Path>) -> Result<BatchResult, HarnessError> {
    spec.validate()?;
    if let Some(dir) = out_dir {
        write_json(&dir.join("spec.json"), spec)?;
    }
    let jobs = spec.jobs();
    let run = |key: &EpisodeKey| -> Result<EpisodeRecord, HarnessError> {
        let record_path = out_dir.map(|d| d.join("episodes").join(format!("{}.json", key.file_stem())));
        if let Some(existing) = record_path.as_deref().and_then(|p| read_record(p, key)) {
            return Ok(existing);
        }
        let (record, full) = run_job(spec, key);
        if let (Some(dir), Some(path)) = (out_dir, record_path) {
            if let Some(full) = &full {
                write_json(&dir.join("transcripts").join(format!("{}.json", key.file_stem())), full)?;
            }
            write_json(&path, &record)?;
        }
        Ok(record)
    };
    let records = if spec.workers <= 1 {
        jobs.iter().map(run).collect::<Result<Vec<_>, _>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(spec.workers)
            .build()
            .map_err(|e| HarnessError::Pool(e.to_string()))?;
        pool.install(|| jobs.par_iter().map(run).collect::<Result<Vec<_>, _>>())?
    };
    let result = BatchResult::from_records(spec, records);
    if let Some(dir) = out_dir {
        write_json(&dir.join("result.json"), &result)?;
    }
    Ok(result)
}

/// Reloads a batch directory written by [`run_batch`] and re-aggregates it.
pub fn load_batch(dir: &Path) -> Result<(BatchSpec, BatchResult), HarnessError> {
    let spec_path = dir.join("spec.json");
    let spec: BatchSpec = serde_json::from_str(&fs::read_to_string(&spec_path).map_err(io_err(&spec_path))?)?;
    let episodes = dir.join("episodes");
    let mut records = Vec::new();
    for key in spec.jobs() {
        let path = episodes.join(format!("{}.json", key.file_stem()));
        if let Ok(text) = fs::read_to_string(&path) {
            records.push(serde_json::from_str::<EpisodeRecord>(&text)?);
        }
    }
    let result = BatchResult::from_records(&spec, records);
    Ok((spec, result))
}
