//! The episode loop: decompose, ask the actor for an action, apply or verify
//! it, repeat until the task stack empties or the horizon runs out.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::domains::Verdict;
use crate::environment::{cumulative_reward, Action, ActionKind, EnvConfig, Environment, Manifest, RewardConfig};
use crate::gateway::{parse_agent_response, render_agent_prompt, Backend, PromptContext};
use crate::resources::{ANSWER, NOTES, PROBLEM_SPEC, REQUEST};
use crate::task_network::{update_task_with_limit, Method, MethodLibrary, TaskName, TaskStack, DEFAULT_MAX_DEPTH};
use crate::verifier::verify_task;

/// Top-level task every episode starts from.
pub const ROOT_TASK: &str = "process user request";

/// Effect used for the single no-network task when nothing better is known.
pub const DEFAULT_ROOT_EFFECT: &str = "the answer to the user request can be found in answer.txt in the correct format";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Condition {
    HumanTn,
    LlmTn,
    NoTn,
}

impl Condition {
    pub const ALL: [Condition; 3] = [Condition::HumanTn, Condition::LlmTn, Condition::NoTn];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::HumanTn => "human-tn",
            Self::LlmTn => "llm-tn",
            Self::NoTn => "no-tn",
        }
    }
}

impl std::str::FromStr for Condition {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|c| c.as_str() == s.trim())
            .ok_or_else(|| format!("unknown condition `{s}` (expected human-tn, llm-tn or no-tn)"))
    }
}

/// Whether per-phase wall times are measured. With timing disabled every
/// duration is zero, which makes results bit-reproducible.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Timing {
    #[default]
    Wall,
    Disabled,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct WallTimes {
    pub action_llm: f64,
    pub verify_llm: f64,
    pub environment: f64,
    pub solver: f64,
}

impl WallTimes {
    pub fn total(&self) -> f64 {
        self.action_llm + self.verify_llm + self.environment + self.solver
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    VerifiedComplete,
    HorizonExceeded,
    InfrastructureError,
}

#[derive(Debug, Clone)]
pub struct EpisodeConfig {
    pub reward: RewardConfig,
    pub condition: Condition,
    /// Decomposition rules. Under no-tn this is replaced by a single
    /// primitive method, see [`no_tn_library`].
    pub library: MethodLibrary,
    pub env: EnvConfig,
    pub timing: Timing,
    pub seed: u64,
    pub max_depth: usize,
}

impl EpisodeConfig {
    pub fn new(condition: Condition, library: MethodLibrary) -> Self {
        Self {
            reward: RewardConfig::default(),
            condition,
            library,
            env: EnvConfig::default(),
            timing: Timing::default(),
            seed: 0,
            max_depth: DEFAULT_MAX_DEPTH,
        }
    }

    fn effective_library(&self) -> MethodLibrary {
        match self.condition {
            Condition::NoTn => no_tn_library(&self.library),
            _ => self.library.clone(),
        }
    }
}

/// One primitive root method. Its effect and effect files are taken from the
/// reference library's root method when there is one.
pub fn no_tn_library(reference: &MethodLibrary) -> MethodLibrary {
    let root = crate::task_network::find_first_relevant_method(ROOT_TASK, reference);
    let (effect, effect_files) = match root {
        Some(m) => (m.effect.clone(), m.effect_files.clone()),
        None => (
            DEFAULT_ROOT_EFFECT.to_string(),
            vec![ANSWER.to_string(), REQUEST.to_string(), PROBLEM_SPEC.to_string()],
        ),
    };
    MethodLibrary::from_methods(vec![Method {
        id: "method1".into(),
        task: TaskName::new(ROOT_TASK).expect("non-empty"),
        subtasks: Vec::new(),
        effect,
        effect_files,
    }])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub iteration: usize,
    pub task: String,
    pub prompt: String,
    pub response: String,
    pub action: Option<Action>,
    pub trace: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify_prompt: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verified: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub condition: Condition,
    pub seed: u64,
    /// Verified completion and, when a checker was supplied, its acceptance.
    pub success: bool,
    pub termination: Termination,
    pub iterations: usize,
    pub reward: f64,
    pub wall_times: WallTimes,
    /// Every decoded action in order, verify included.
    pub command_log: Vec<String>,
    pub completed_tasks: Vec<String>,
    pub final_answer: String,
    pub verdict: Option<Verdict>,
    pub final_files: BTreeMap<String, String>,
    pub transcript: Vec<TranscriptEntry>,
    pub error: Option<String>,
}

fn seconds(timing: Timing, d: Duration) -> f64 {
    match timing {
        Timing::Wall => d.as_secs_f64(),
        Timing::Disabled => 0.0,
    }
}

struct Loop<'a> {
    cfg: &'a EpisodeConfig,
    library: MethodLibrary,
    env: Environment,
    stack: TaskStack,
    commands: Vec<String>,
    last_response: String,
    completed_tasks: Vec<String>,
    transcript: Vec<TranscriptEntry>,
    times: WallTimes,
    iterations: usize,
}

impl Loop<'_> {
    fn step(&mut self, iteration: usize, actor: &mut dyn Backend, verifier: &mut dyn Backend) -> Result<(), String> {
        let head = self.stack.head().expect("caller checks for an empty stack").clone();
        let method = head.method.as_ref();
        let ctx = PromptContext {
            notes: self.env.content(NOTES).unwrap_or_default().to_string(),
            last_response: self.last_response.clone(),
            last_commands: self.commands.clone(),
            last_output: self.env.trace().to_string(),
            current_task: head.task.to_string(),
            current_effect: method.map(|m| m.effect.clone()).unwrap_or_default(),
        };
        let prompt = render_agent_prompt(&ctx);
        let started = Instant::now();
        let reply = actor.complete(&prompt).map_err(|e| format!("actor backend: {e}"))?;
        self.times.action_llm += seconds(self.cfg.timing, started.elapsed());
        self.iterations = iteration;
        self.last_response = reply.clone();

        let mut entry = TranscriptEntry {
            iteration,
            task: head.task.to_string(),
            prompt,
            response: reply.clone(),
            action: None,
            trace: String::new(),
            verify_prompt: None,
            verified: None,
        };

        match parse_agent_response(&reply) {
            Err(failure) => self.env.set_trace(failure.to_string()),
            Ok(decoded) => {
                let action = decoded.action;
                self.commands.push(action.summary());
                entry.action = Some(action.clone());
                if action.kind == ActionKind::Verify {
                    let governing = method.filter(|m| !m.effect.trim().is_empty());
                    let verified = match governing {
                        None => {
                            self.env.set_trace(format!(
                                "Verification unavailable: task `{}` has no method describing its effect.",
                                head.task
                            ));
                            false
                        }
                        Some(m) => {
                            let started = Instant::now();
                            let outcome = verify_task(verifier, &m.effect, &m.effect_files, &self.env)
                                .map_err(|e| format!("verifier backend: {e}"))?;
                            self.times.verify_llm += seconds(self.cfg.timing, started.elapsed());
                            self.env.set_trace(outcome.reply);
                            entry.verify_prompt = Some(outcome.prompt);
                            outcome.passed
                        }
                    };
                    entry.verified = Some(verified);
                    if verified {
                        if let Some(done) = self.stack.pop() {
                            self.completed_tasks.push(done.task.to_string());
                        }
                        self.stack = update_task_with_limit(&self.stack, &self.library, self.cfg.max_depth)
                            .map_err(|e| e.to_string())?;
                    }
                } else {
                    let started = Instant::now();
                    self.env.apply_action(&action).map_err(|e| e.to_string())?;
                    let elapsed = started.elapsed();
                    let solver = self.env.last_solver().map(|s| s.duration).unwrap_or_default();
                    self.times.solver += seconds(self.cfg.timing, solver);
                    self.times.environment += seconds(self.cfg.timing, elapsed.saturating_sub(solver));
                }
            }
        }
        entry.trace = self.env.trace().to_string();
        self.transcript.push(entry);
        Ok(())
    }
}

/// Runs one episode on a fresh workspace built from `manifest`.
///
/// `judge` is the domain checker applied to the final answer; without one,
/// success means verified completion alone.
pub fn run_episode(
    cfg: &EpisodeConfig,
    manifest: &Manifest,
    actor: &mut dyn Backend,
    verifier: &mut dyn Backend,
    judge: Option<&dyn Fn(&str) -> Verdict>,
) -> EpisodeResult {
    let library = cfg.effective_library();
    let failed = |error: String| EpisodeResult {
        condition: cfg.condition,
        seed: cfg.seed,
        success: false,
        termination: Termination::InfrastructureError,
        iterations: 0,
        reward: 0.0,
        wall_times: WallTimes::default(),
        command_log: Vec::new(),
        completed_tasks: Vec::new(),
        final_answer: String::new(),
        verdict: None,
        final_files: BTreeMap::new(),
        transcript: Vec::new(),
        error: Some(error),
    };
    let env = match Environment::init(manifest, cfg.env.clone()) {
        Ok(env) => env,
        Err(e) => return failed(e.to_string()),
    };
    let root = TaskStack::with_root(TaskName::new(ROOT_TASK).expect("non-empty"), &library);
    let stack = match update_task_with_limit(&root, &library, cfg.max_depth) {
        Ok(stack) => stack,
        Err(e) => return failed(e.to_string()),
    };

    let mut state = Loop {
        cfg,
        library,
        env,
        stack,
        commands: Vec::new(),
        last_response: String::new(),
        completed_tasks: Vec::new(),
        transcript: Vec::new(),
        times: WallTimes::default(),
        iterations: 0,
    };
    let mut error = None;
    for iteration in 1..=cfg.reward.horizon {
        if state.stack.is_empty() {
            break;
        }
        if let Err(e) = state.step(iteration, actor, verifier) {
            error = Some(e);
            break;
        }
    }

    let termination = match (&error, state.stack.is_empty()) {
        (Some(_), _) => Termination::InfrastructureError,
        (None, true) => Termination::VerifiedComplete,
        (None, false) => Termination::HorizonExceeded,
    };
    let final_answer = state.env.content(ANSWER).unwrap_or_default().to_string();
    let verdict = judge.map(|j| j(&final_answer));
    let success = termination == Termination::VerifiedComplete && verdict.as_ref().is_none_or(Verdict::is_accept);
    EpisodeResult {
        condition: cfg.condition,
        seed: cfg.seed,
        success,
        termination,
        iterations: state.iterations,
        reward: cumulative_reward(success, state.iterations, &cfg.reward),
        wall_times: state.times,
        command_log: state.commands,
        completed_tasks: state.completed_tasks,
        final_answer,
        verdict,
        final_files: state.env.snapshot(),
        transcript: state.transcript,
        error,
    }
}
