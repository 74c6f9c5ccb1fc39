//! The file workspace an agent acts on.
//!
//! Every episode owns a private directory holding the declared files. Actions
//! mutate the in-memory map and the on-disk copy together; anything the
//! manifest does not allow comes back as trace text rather than an error, so
//! the agent can read the complaint and recover.

mod solver;

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io;
use std::path::{Component, Path, PathBuf};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::resources::{NOTES, OUTPUT, SOLVER};

pub use solver::{execute_solver, SolverConfig, SolverOutcome};

/// Trace text for any action the manifest does not permit.
pub const ACCESS_DENIED: &str = "file access denied";

/// Output files are cut to this many bytes before reaching the trace.
pub const OUTPUT_LIMIT_BYTES: usize = 64 * 1024;

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("duplicate path `{0}` in workspace manifest")]
    DuplicatePath(String),
    #[error("path `{0}` escapes the workspace root")]
    PathEscape(String),
    #[error("workspace i/o failure: {0}")]
    Workspace(#[from] io::Error),
    #[error("solver interpreter `{0}` could not be started")]
    InterpreterNotFound(String),
    #[error("verify is not an environment action")]
    VerifyNotExternal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FileMode {
    ReadOnly,
    ReadWriteAppend,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub content: String,
    pub mode: FileMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActionKind {
    Read,
    Write,
    Append,
    Verify,
}

impl ActionKind {
    pub fn parse(name: &str) -> Option<Self> {
        match name.trim().to_ascii_lowercase().as_str() {
            "read" => Some(Self::Read),
            "write" => Some(Self::Write),
            "append" => Some(Self::Append),
            "verify" => Some(Self::Verify),
            _ => None,
        }
    }

    /// Capitalized form used in command summaries.
    pub fn label(self) -> &'static str {
        match self {
            Self::Read => "Read",
            Self::Write => "Write",
            Self::Append => "Append",
            Self::Verify => "Verify",
        }
    }
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Action {
    pub kind: ActionKind,
    pub arg1: String,
    pub arg2: String,
}

impl Action {
    /// Builds an action, dropping arguments the kind does not take.
    pub fn new(kind: ActionKind, arg1: impl Into<String>, arg2: impl Into<String>) -> Self {
        let (arg1, arg2) = match kind {
            ActionKind::Verify => (String::new(), String::new()),
            ActionKind::Read => (arg1.into(), String::new()),
            ActionKind::Write | ActionKind::Append => (arg1.into(), arg2.into()),
        };
        Self { kind, arg1, arg2 }
    }

    pub fn read(path: impl Into<String>) -> Self {
        Self::new(ActionKind::Read, path, "")
    }

    pub fn write(path: impl Into<String>, content: impl Into<String>) -> Self {
        Self::new(ActionKind::Write, path, content)
    }

    pub fn append(path: impl Into<String>, content: impl Into<String>) -> Self {
        Self::new(ActionKind::Append, path, content)
    }

    pub fn verify() -> Self {
        Self::new(ActionKind::Verify, "", "")
    }

    /// One-line log form, e.g. `Read files/request.txt` or `Verify `.
    pub fn summary(&self) -> String {
        format!("{} {}", self.kind.label(), self.arg1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileSpec {
    pub path: String,
    pub mode: FileMode,
    #[serde(default)]
    pub content: String,
}

impl FileSpec {
    pub fn read_only(path: impl Into<String>, content: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            mode: FileMode::ReadOnly,
            content: content.into(),
        }
    }

    pub fn writable(path: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            mode: FileMode::ReadWriteAppend,
            content: String::new(),
        }
    }
}

/// Declares the agent-visible files of a workspace plus support files (tool
/// code, databases) that exist on disk for the solver but are not
/// addressable by actions.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub files: Vec<FileSpec>,
    #[serde(default)]
    pub support_files: Vec<(String, String)>,
}

impl Manifest {
    /// The standard layout: problem spec, request, notes and answer, plus the
    /// tools specification and solver/output pair when requested.
    pub fn standard(spec_text: &str, request_text: &str, tools_spec_text: Option<&str>, with_solver: bool) -> Self {
        use crate::resources::{ANSWER, PROBLEM_SPEC, REQUEST, TOOLS_SPEC};
        let mut files = vec![
            FileSpec::read_only(PROBLEM_SPEC, spec_text),
            FileSpec::read_only(REQUEST, request_text),
        ];
        if let Some(tools) = tools_spec_text {
            files.push(FileSpec::read_only(TOOLS_SPEC, tools));
        }
        files.push(FileSpec::writable(NOTES));
        files.push(FileSpec::writable(ANSWER));
        if with_solver {
            files.push(FileSpec::writable(SOLVER));
            files.push(FileSpec::read_only(OUTPUT, ""));
        }
        Self {
            files,
            support_files: Vec::new(),
        }
    }

    pub fn with_support_file(mut self, path: impl Into<String>, content: impl Into<String>) -> Self {
        self.support_files.push((path.into(), content.into()));
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EnvConfig {
    /// Literal reading of `read`: also copy the file into the notes.
    #[serde(default)]
    pub read_copies_into_notes: bool,
    #[serde(default)]
    pub solver: SolverConfig,
    /// Directory under which episode roots are created; system temp if unset.
    #[serde(default)]
    pub root_parent: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RewardConfig {
    pub r_success: f64,
    pub r_step: f64,
    pub horizon: usize,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self {
            r_success: 1.0,
            r_step: -0.1,
            horizon: 100,
        }
    }
}

impl RewardConfig {
    pub fn is_valid(&self) -> bool {
        self.r_success > 0.0 && self.r_step <= 0.0 && self.horizon > 0
    }
}

/// Return of an episode: every non-terminal step costs `r_step`; the
/// terminal step of a successful episode earns `r_success` instead.
pub fn cumulative_reward(success: bool, steps: usize, cfg: &RewardConfig) -> f64 {
    if success && steps > 0 {
        cfg.r_success + cfg.r_step * (steps - 1) as f64
    } else {
        cfg.r_step * steps as f64
    }
}

/// Live workspace state. Dropping it removes the episode root.
#[derive(Debug)]
pub struct Environment {
    root: tempfile::TempDir,
    files: IndexMap<String, FileEntry>,
    trace: String,
    command_log: Vec<String>,
    step_count: usize,
    config: EnvConfig,
    last_solver: Option<SolverOutcome>,
}

fn check_relative(path: &str) -> Result<(), EnvError> {
    let p = Path::new(path);
    if path.is_empty() || p.is_absolute() || !p.components().all(|c| matches!(c, Component::Normal(_))) {
        return Err(EnvError::PathEscape(path.to_string()));
    }
    Ok(())
}

impl Environment {
    pub fn init(manifest: &Manifest, config: EnvConfig) -> Result<Self, EnvError> {
        let mut files = IndexMap::new();
        for spec in &manifest.files {
            check_relative(&spec.path)?;
            let entry = FileEntry {
                path: spec.path.clone(),
                content: spec.content.clone(),
                mode: spec.mode,
            };
            if files.insert(spec.path.clone(), entry).is_some() {
                return Err(EnvError::DuplicatePath(spec.path.clone()));
            }
        }
        for (path, _) in &manifest.support_files {
            check_relative(path)?;
            if files.contains_key(path) {
                return Err(EnvError::DuplicatePath(path.clone()));
            }
        }

        let builder = {
            let mut b = tempfile::Builder::new();
            b.prefix("tasknet-episode-");
            b
        };
        let root = match &config.root_parent {
            Some(parent) => builder.tempdir_in(parent)?,
            None => builder.tempdir()?,
        };
        let env = Self {
            root,
            files,
            trace: String::new(),
            command_log: Vec::new(),
            step_count: 0,
            config,
            last_solver: None,
        };
        for entry in env.files.values() {
            env.write_disk(&entry.path, &entry.content)?;
        }
        for (path, content) in &manifest.support_files {
            env.write_disk(path, content)?;
        }
        Ok(env)
    }

    fn write_disk(&self, path: &str, content: &str) -> io::Result<()> {
        let full = self.root.path().join(path);
        if let Some(parent) = full.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(full, content)
    }

    pub fn root(&self) -> &Path {
        self.root.path()
    }

    pub fn file(&self, path: &str) -> Option<&FileEntry> {
        self.files.get(path)
    }

    pub fn content(&self, path: &str) -> Option<&str> {
        self.files.get(path).map(|f| f.content.as_str())
    }

    pub fn files(&self) -> impl Iterator<Item = &FileEntry> {
        self.files.values()
    }

    pub fn snapshot(&self) -> BTreeMap<String, String> {
        self.files
            .values()
            .map(|f| (f.path.clone(), f.content.clone()))
            .collect()
    }

    pub fn trace(&self) -> &str {
        &self.trace
    }

    pub fn command_log(&self) -> &[String] {
        &self.command_log
    }

    pub fn step_count(&self) -> usize {
        self.step_count
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn last_solver(&self) -> Option<&SolverOutcome> {
        self.last_solver.as_ref()
    }

    /// Applies one read/write/append action and returns the new trace.
    ///
    /// Permission problems become the access-denied trace; only workspace
    /// and interpreter failures are errors.
    pub fn apply_action(&mut self, action: &Action) -> Result<String, EnvError> {
        if action.kind == ActionKind::Verify {
            return Err(EnvError::VerifyNotExternal);
        }
        self.step_count += 1;
        self.command_log.push(action.summary());
        self.last_solver = None;
        let trace = self.transition(action)?;
        self.trace = trace.clone();
        Ok(trace)
    }

    fn transition(&mut self, action: &Action) -> Result<String, EnvError> {
        let path = action.arg1.trim();
        let Some(entry) = self.files.get(path) else {
            return Ok(ACCESS_DENIED.to_string());
        };
        match action.kind {
            ActionKind::Read => {
                let content = entry.content.clone();
                if self.config.read_copies_into_notes && path != NOTES {
                    if let Some(notes) = self.files.get(NOTES) {
                        let mut updated = notes.content.clone();
                        if !updated.is_empty() && !updated.ends_with('\n') {
                            updated.push('\n');
                        }
                        updated.push_str(&content);
                        self.set_content(NOTES, updated)?;
                    }
                }
                Ok(number_lines(&content))
            }
            ActionKind::Write | ActionKind::Append => {
                if entry.mode != FileMode::ReadWriteAppend {
                    return Ok(ACCESS_DENIED.to_string());
                }
                let updated = if action.kind == ActionKind::Write {
                    action.arg2.clone()
                } else {
                    format!("{}{}", entry.content, action.arg2)
                };
                self.set_content(path, updated.clone())?;
                let mut trace = format!("Updated {path}:\n{updated}");
                if path == SOLVER {
                    let outcome = execute_solver(self.root(), &self.config.solver)?;
                    let mut output = outcome.stdout.clone();
                    output.push_str(&outcome.stderr);
                    let output = truncate_output(&output, OUTPUT_LIMIT_BYTES);
                    if self.files.contains_key(OUTPUT) {
                        self.set_content(OUTPUT, output)?;
                    }
                    trace.push_str(&solver_report(&trace, &outcome));
                    self.last_solver = Some(outcome);
                }
                Ok(trace)
            }
            ActionKind::Verify => unreachable!("rejected by apply_action"),
        }
    }

    fn set_content(&mut self, path: &str, content: String) -> Result<(), EnvError> {
        self.write_disk(path, &content)?;
        if let Some(entry) = self.files.get_mut(path) {
            entry.content = content;
        }
        Ok(())
    }

    /// Overrides the trace, used by the agent loop for verifier feedback and
    /// parse failures.
    pub fn set_trace(&mut self, trace: impl Into<String>) {
        self.trace = trace.into();
    }
}

/// `1: first line` style listing.
pub fn number_lines(content: &str) -> String {
    content
        .lines()
        .enumerate()
        .map(|(i, line)| format!("{}: {}", i + 1, line))
        .collect::<Vec<_>>()
        .join("\n")
}

fn truncate_output(text: &str, limit: usize) -> String {
    if text.len() <= limit {
        return text.to_string();
    }
    let mut cut = limit;
    while !text.is_char_boundary(cut) {
        cut -= 1;
    }
    format!("{}\n[output truncated]\n", &text[..cut])
}

fn solver_report(so_far: &str, outcome: &SolverOutcome) -> String {
    let mut out = String::new();
    if !so_far.ends_with('\n') {
        out.push('\n');
    }
    out.push('\n');
    out.push_str("Code executed with stdout:\n");
    out.push_str(&truncate_output(&outcome.stdout, OUTPUT_LIMIT_BYTES));
    if !outcome.stderr.is_empty() {
        if !out.ends_with('\n') {
            out.push('\n');
        }
        out.push_str("Code executed with stderr:\n");
        out.push_str(&truncate_output(&outcome.stderr, OUTPUT_LIMIT_BYTES));
    }
    if outcome.timed_out {
        if !out.ends_with('\n') {
            out.push('\n');
        }
        out.push_str(&format!(
            "Code execution timed out after {} seconds\n",
            outcome.timeout.as_secs_f64()
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resources::{ANSWER, PROBLEM_SPEC, REQUEST};

    fn bw_env() -> Environment {
        Environment::init(
            &Manifest::standard("spec", "line one\nline two", None, false),
            EnvConfig::default(),
        )
        .unwrap()
    }

    #[test]
    fn blocksworld_manifest_has_four_files() {
        let env = bw_env();
        let paths: Vec<_> = env.files().map(|f| f.path.as_str()).collect();
        assert_eq!(paths, [PROBLEM_SPEC, REQUEST, NOTES, ANSWER]);
        assert_eq!(env.trace(), "");
        assert_eq!(env.step_count(), 0);
        assert!(env.root().join(PROBLEM_SPEC).exists());
    }

    #[test]
    fn empty_request_is_fine() {
        let env = Environment::init(&Manifest::standard("spec", "", None, false), EnvConfig::default()).unwrap();
        assert_eq!(env.content(REQUEST), Some(""));
    }

    #[test]
    fn path_escape_rejected() {
        let mut manifest = Manifest::standard("s", "r", None, false);
        manifest.files.push(FileSpec::writable("../../etc"));
        assert!(matches!(
            Environment::init(&manifest, EnvConfig::default()),
            Err(EnvError::PathEscape(_))
        ));
        let mut manifest = Manifest::standard("s", "r", None, false);
        manifest.files.push(FileSpec::writable("/etc/passwd"));
        assert!(matches!(
            Environment::init(&manifest, EnvConfig::default()),
            Err(EnvError::PathEscape(_))
        ));
    }

    #[test]
    fn duplicate_path_rejected() {
        let mut manifest = Manifest::standard("s", "r", None, false);
        manifest.files.push(FileSpec::writable(NOTES));
        assert!(matches!(
            Environment::init(&manifest, EnvConfig::default()),
            Err(EnvError::DuplicatePath(_))
        ));
    }

    #[test]
    fn append_to_empty_notes() {
        let mut env = bw_env();
        let trace = env.apply_action(&Action::append(NOTES, "Origin: Detroit")).unwrap();
        assert_eq!(env.content(NOTES), Some("Origin: Detroit"));
        assert_eq!(trace, "Updated files/notes.txt:\nOrigin: Detroit");
        assert_eq!(
            std::fs::read_to_string(env.root().join(NOTES)).unwrap(),
            "Origin: Detroit"
        );
    }

    #[test]
    fn write_replaces_and_append_concatenates() {
        let mut env = bw_env();
        env.apply_action(&Action::write(ANSWER, "a")).unwrap();
        env.apply_action(&Action::append(ANSWER, "b")).unwrap();
        env.apply_action(&Action::write(ANSWER, "c")).unwrap();
        assert_eq!(env.content(ANSWER), Some("c"));
        assert_eq!(
            env.command_log(),
            ["Write answer.txt", "Append answer.txt", "Write answer.txt"]
        );
        assert_eq!(env.step_count(), 3);
    }

    #[test]
    fn read_only_files_are_protected() {
        let mut env = bw_env();
        let trace = env.apply_action(&Action::write(PROBLEM_SPEC, "x")).unwrap();
        assert_eq!(trace, ACCESS_DENIED);
        assert_eq!(env.content(PROBLEM_SPEC), Some("spec"));
        assert_eq!(env.apply_action(&Action::read("nope.txt")).unwrap(), ACCESS_DENIED);
        assert_eq!(
            env.apply_action(&Action::read(crate::resources::SOLVER)).unwrap(),
            ACCESS_DENIED
        );
        assert_eq!(env.step_count(), 3);
    }

    #[test]
    fn read_numbers_lines_and_leaves_notes() {
        let mut env = bw_env();
        let trace = env.apply_action(&Action::read(REQUEST)).unwrap();
        assert_eq!(trace, "1: line one\n2: line two");
        assert_eq!(env.content(NOTES), Some(""));
    }

    #[test]
    fn read_can_copy_into_notes() {
        let cfg = EnvConfig {
            read_copies_into_notes: true,
            ..EnvConfig::default()
        };
        let mut env = Environment::init(&Manifest::standard("spec", "req", None, false), cfg).unwrap();
        env.apply_action(&Action::read(REQUEST)).unwrap();
        env.apply_action(&Action::read(PROBLEM_SPEC)).unwrap();
        assert_eq!(env.content(NOTES), Some("req\nspec"));
    }

    #[test]
    fn verify_is_not_external() {
        let mut env = bw_env();
        assert!(matches!(
            env.apply_action(&Action::verify()),
            Err(EnvError::VerifyNotExternal)
        ));
        assert_eq!(env.step_count(), 0);
    }

    #[test]
    fn action_summaries() {
        assert_eq!(Action::verify().summary(), "Verify ");
        assert_eq!(Action::read("files/request.txt").summary(), "Read files/request.txt");
        assert_eq!(Action::new(ActionKind::Read, "x", "junk").arg2, "");
    }

    #[test]
    fn rewards() {
        let cfg = RewardConfig::default();
        assert_eq!(cumulative_reward(true, 1, &cfg), 1.0);
        assert_eq!(cumulative_reward(false, 100, &cfg), -10.0);
        // ledger: nineteen -0.1 steps followed by the +1 terminal step
        let ledger: f64 = std::iter::repeat_n(-0.1, 19).chain([1.0]).sum();
        assert!((cumulative_reward(true, 20, &cfg) - ledger).abs() < 1e-12);
        assert!((cumulative_reward(true, 20, &cfg) - -0.9).abs() < 1e-12);
    }

    #[test]
    fn dropping_removes_root() {
        let env = bw_env();
        let root = env.root().to_path_buf();
        assert!(root.exists());
        drop(env);
        assert!(!root.exists());
    }
}
