//! Totally ordered hierarchical task networks.
//!
//! A [`MethodLibrary`] maps task names to ordered subtask lists, each method
//! carrying the natural-language effect and the files a verifier inspects to
//! decide whether the task is done. A [`TaskStack`] is the live task sequence:
//! the head is the task currently handed to the acting model, and decomposing
//! the head prepends the subtasks of its first relevant method while the
//! parent stays below them awaiting its own verification.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

/// Nested decompositions allowed in one `update_task` call before the library
/// is assumed to be cyclic.
pub const DEFAULT_MAX_DEPTH: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LibraryError {
    #[error("malformed method library: {0}")]
    Malformed(String),
    #[error("method `{method}` is missing required field `{field}`")]
    MissingField { method: String, field: &'static str },
    #[error("method `{method}`: field `{field}` must not be empty")]
    EmptyField { method: String, field: &'static str },
    #[error("method `{method}`: non-contiguous subtask numbering")]
    NonContiguousSubtasks { method: String },
    #[error("method `{method}`: non-contiguous effect file numbering")]
    NonContiguousEffectFiles { method: String },
    #[error("task name must not be empty")]
    EmptyTaskName,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecompositionError {
    #[error("decomposition-depth exceeded: more than {limit} nested decompositions starting at `{task}`")]
    DepthExceeded { task: String, limit: usize },
}

/// Natural-language task label. Matching uses [`TaskName::key`], which trims
/// and case-folds, so generator casing drift does not break lookups.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct TaskName(String);

impl TaskName {
    pub fn new(text: impl Into<String>) -> Result<Self, LibraryError> {
        let text = text.into();
        if text.trim().is_empty() {
            return Err(LibraryError::EmptyTaskName);
        }
        Ok(Self(text))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn key(&self) -> String {
        normalize(&self.0)
    }

    pub fn matches(&self, other: &str) -> bool {
        self.key() == normalize(other)
    }
}

impl TryFrom<String> for TaskName {
    type Error = LibraryError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<TaskName> for String {
    fn from(value: TaskName) -> Self {
        value.0
    }
}

impl fmt::Display for TaskName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn normalize(s: &str) -> String {
    s.trim().to_lowercase()
}

/// One decomposition rule. A method with no subtasks defines a primitive task.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Method {
    pub id: String,
    pub task: TaskName,
    pub subtasks: Vec<TaskName>,
    pub effect: String,
    pub effect_files: Vec<String>,
}

impl Method {
    pub fn is_primitive(&self) -> bool {
        self.subtasks.is_empty()
    }
}

/// Execution order of numbered subtask keys.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubtaskOrder {
    /// `subtask1` runs first.
    #[default]
    Ascending,
    /// The highest-numbered subtask runs first.
    Descending,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodLibrary {
    methods: Vec<Method>,
    order: SubtaskOrder,
    warnings: Vec<String>,
}

impl MethodLibrary {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a library from already-validated methods, in the given order.
    pub fn from_methods(methods: Vec<Method>) -> Self {
        let mut lib = Self {
            methods,
            order: SubtaskOrder::Ascending,
            warnings: Vec::new(),
        };
        lib.warnings = lib.compute_warnings();
        lib
    }

    pub fn methods(&self) -> &[Method] {
        &self.methods
    }

    pub fn len(&self) -> usize {
        self.methods.len()
    }

    pub fn is_empty(&self) -> bool {
        self.methods.is_empty()
    }

    pub fn order(&self) -> SubtaskOrder {
        self.order
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn get(&self, id: &str) -> Option<&Method> {
        self.methods.iter().find(|m| m.id == id)
    }

    fn compute_warnings(&self) -> Vec<String> {
        let mut warnings = Vec::new();
        let mut seen = HashSet::new();
        for m in &self.methods {
            if !seen.insert(m.task.key()) {
                warnings.push(format!(
                    "duplicate task name `{}` in method `{}`; only the first relevant method is used",
                    m.task, m.id
                ));
            }
        }
        for name in dangling_subtasks(self) {
            warnings.push(format!(
                "subtask `{name}` has no method; treated as a primitive leaf verified with its parent's effect"
            ));
        }
        warnings
    }

    /// Serializes back into the numbered-key document layout.
    pub fn to_json(&self) -> Value {
        let mut root = Map::new();
        for m in &self.methods {
            let mut obj = Map::new();
            obj.insert("task".into(), Value::String(m.task.to_string()));
            if !m.subtasks.is_empty() {
                let n = m.subtasks.len();
                let subtasks = m
                    .subtasks
                    .iter()
                    .enumerate()
                    .map(|(i, t)| {
                        let num = match self.order {
                            SubtaskOrder::Ascending => i + 1,
                            SubtaskOrder::Descending => n - i,
                        };
                        (format!("subtask{num}"), Value::String(t.to_string()))
                    })
                    .collect::<Map<_, _>>();
                obj.insert("subtasks".into(), Value::Object(subtasks));
            }
            obj.insert("effect".into(), Value::String(m.effect.clone()));
            let files = m
                .effect_files
                .iter()
                .enumerate()
                .map(|(i, f)| (format!("file{}", i + 1), Value::String(f.clone())))
                .collect::<Map<_, _>>();
            obj.insert("effect_files".into(), Value::Object(files));
            root.insert(m.id.clone(), Value::Object(obj));
        }
        Value::Object(root)
    }
}

/// Parses a method document with ascending subtask order.
pub fn load_method_library(text: &str) -> Result<MethodLibrary, LibraryError> {
    load_method_library_with_order(text, SubtaskOrder::Ascending)
}

pub fn load_method_library_with_order(text: &str, order: SubtaskOrder) -> Result<MethodLibrary, LibraryError> {
    let doc: Value = serde_json::from_str(text).map_err(|e| LibraryError::Malformed(e.to_string()))?;
    library_from_value(&doc, order)
}

pub fn library_from_value(doc: &Value, order: SubtaskOrder) -> Result<MethodLibrary, LibraryError> {
    let obj = doc
        .as_object()
        .ok_or_else(|| LibraryError::Malformed("top level must be an object keyed by method id".into()))?;
    let mut methods = Vec::with_capacity(obj.len());
    for (id, body) in obj {
        methods.push(parse_method(id, body, order)?);
    }
    let mut lib = MethodLibrary::from_methods(methods);
    lib.order = order;
    Ok(lib)
}

fn parse_method(id: &str, body: &Value, order: SubtaskOrder) -> Result<Method, LibraryError> {
    let obj = body
        .as_object()
        .ok_or_else(|| LibraryError::Malformed(format!("method `{id}` must be an object")))?;
    let missing = |field| LibraryError::MissingField {
        method: id.to_string(),
        field,
    };
    let task = obj.get("task").and_then(Value::as_str).ok_or_else(|| missing("task"))?;
    let task = TaskName::new(task).map_err(|_| LibraryError::EmptyField {
        method: id.to_string(),
        field: "task",
    })?;
    let effect = obj
        .get("effect")
        .and_then(Value::as_str)
        .ok_or_else(|| missing("effect"))?;
    if effect.trim().is_empty() {
        return Err(LibraryError::EmptyField {
            method: id.to_string(),
            field: "effect",
        });
    }

    let mut subtasks = match obj.get("subtasks") {
        None | Some(Value::Null) => Vec::new(),
        Some(v) => numbered_strings(id, "subtasks", v).map_err(|e| match e {
            Numbering::Gap => LibraryError::NonContiguousSubtasks { method: id.to_string() },
            Numbering::Bad(msg) => LibraryError::Malformed(msg),
        })?,
    }
    .into_iter()
    .map(|s| {
        TaskName::new(s).map_err(|_| LibraryError::EmptyField {
            method: id.to_string(),
            field: "subtasks",
        })
    })
    .collect::<Result<Vec<_>, _>>()?;
    if order == SubtaskOrder::Descending {
        subtasks.reverse();
    }

    let effect_files = match obj.get("effect_files") {
        None | Some(Value::Null) => return Err(missing("effect_files")),
        Some(v) => numbered_strings(id, "effect_files", v).map_err(|e| match e {
            Numbering::Gap => LibraryError::NonContiguousEffectFiles { method: id.to_string() },
            Numbering::Bad(msg) => LibraryError::Malformed(msg),
        })?,
    };
    if effect_files.is_empty() {
        return Err(LibraryError::EmptyField {
            method: id.to_string(),
            field: "effect_files",
        });
    }

    Ok(Method {
        id: id.to_string(),
        task,
        subtasks,
        effect: effect.to_string(),
        effect_files,
    })
}

enum Numbering {
    Gap,
    Bad(String),
}

/// Reads `{"prefixN": "value", ...}` ordered by N (which must run 1..=len),
/// or a plain JSON array.
fn numbered_strings(method: &str, field: &str, v: &Value) -> Result<Vec<String>, Numbering> {
    let as_string = |v: &Value| {
        v.as_str()
            .map(str::to_string)
            .ok_or_else(|| Numbering::Bad(format!("method `{method}`: `{field}` entries must be strings")))
    };
    match v {
        Value::Array(items) => items.iter().map(as_string).collect(),
        Value::Object(map) => {
            let mut numbered = Vec::with_capacity(map.len());
            for (key, value) in map {
                let digits = key.trim_start_matches(|c: char| !c.is_ascii_digit());
                let n: usize = digits.parse().map_err(|_| {
                    Numbering::Bad(format!("method `{method}`: key `{key}` in `{field}` has no number"))
                })?;
                numbered.push((n, as_string(value)?));
            }
            numbered.sort_by_key(|(n, _)| *n);
            if numbered.iter().enumerate().any(|(i, (n, _))| *n != i + 1) {
                return Err(Numbering::Gap);
            }
            Ok(numbered.into_iter().map(|(_, s)| s).collect())
        }
        _ => Err(Numbering::Bad(format!(
            "method `{method}`: `{field}` must be an object or array"
        ))),
    }
}

/// First method, in library order, whose task matches `task` after trimming
/// and case-folding.
pub fn find_first_relevant_method<'a>(task: &str, lib: &'a MethodLibrary) -> Option<&'a Method> {
    let key = normalize(task);
    lib.methods.iter().find(|m| m.task.key() == key)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StackEntry {
    pub task: TaskName,
    /// Method whose effect is verified for this entry. Tasks without a method
    /// of their own inherit their parent's.
    pub method: Option<Method>,
    /// Set once this entry has been decomposed, so a parent waiting below its
    /// subtasks is never expanded a second time.
    pub expanded: bool,
}

/// Live task sequence; index 0 is the head.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskStack {
    entries: Vec<StackEntry>,
}

impl TaskStack {
    pub fn new() -> Self {
        Self::default()
    }

    /// Single-entry stack for `task`, governed by its relevant method if any.
    pub fn with_root(task: TaskName, lib: &MethodLibrary) -> Self {
        let method = find_first_relevant_method(task.as_str(), lib).cloned();
        Self::with_entry(task, method)
    }

    pub fn with_entry(task: TaskName, method: Option<Method>) -> Self {
        Self {
            entries: vec![StackEntry {
                task,
                method,
                expanded: false,
            }],
        }
    }

    pub fn from_entries(entries: Vec<StackEntry>) -> Self {
        Self { entries }
    }

    pub fn head(&self) -> Option<&StackEntry> {
        self.entries.first()
    }

    pub fn pop(&mut self) -> Option<StackEntry> {
        if self.entries.is_empty() {
            None
        } else {
            Some(self.entries.remove(0))
        }
    }

    pub fn entries(&self) -> &[StackEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn task_names(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.task.as_str()).collect()
    }
}

pub fn update_task(stack: &TaskStack, lib: &MethodLibrary) -> Result<TaskStack, DecompositionError> {
    update_task_with_limit(stack, lib, DEFAULT_MAX_DEPTH)
}

/// Repeatedly decomposes the head: while it has a relevant method with
/// subtasks and has not been expanded already, its subtasks are prepended.
pub fn update_task_with_limit(
    stack: &TaskStack,
    lib: &MethodLibrary,
    max_depth: usize,
) -> Result<TaskStack, DecompositionError> {
    let mut entries = stack.entries.clone();
    let mut depth = 0;
    while let Some(head) = entries.first_mut() {
        if head.expanded {
            break;
        }
        let Some(method) = find_first_relevant_method(head.task.as_str(), lib) else {
            break;
        };
        if method.is_primitive() {
            break;
        }
        depth += 1;
        if depth > max_depth {
            return Err(DecompositionError::DepthExceeded {
                task: stack.head().map(|e| e.task.to_string()).unwrap_or_default(),
                limit: max_depth,
            });
        }
        head.expanded = true;
        let children: Vec<StackEntry> = method
            .subtasks
            .iter()
            .map(|sub| StackEntry {
                task: sub.clone(),
                method: find_first_relevant_method(sub.as_str(), lib).or(Some(method)).cloned(),
                expanded: false,
            })
            .collect();
        entries.splice(0..0, children);
    }
    Ok(TaskStack { entries })
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    /// Each cycle lists task names in traversal order, starting from its
    /// lexicographically smallest key.
    pub cycles: Vec<Vec<String>>,
    /// Subtask names with no method; they run as primitive leaves.
    pub dangling_subtasks: Vec<String>,
    /// `(method id, path)` pairs naming files outside the known file set.
    pub unknown_effect_files: Vec<(String, String)>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.cycles.is_empty() && self.dangling_subtasks.is_empty() && self.unknown_effect_files.is_empty()
    }
}

fn dangling_subtasks(lib: &MethodLibrary) -> Vec<String> {
    let known: HashSet<String> = lib.methods.iter().map(|m| m.task.key()).collect();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for m in &lib.methods {
        for sub in &m.subtasks {
            let key = sub.key();
            if !known.contains(&key) && seen.insert(key) {
                out.push(sub.to_string());
            }
        }
    }
    out
}

/// Lints a library: decomposition cycles, dangling subtask names, and effect
/// files outside `known_files`.
pub fn validate_library(lib: &MethodLibrary, known_files: &[&str]) -> ValidationReport {
    // Only the first relevant method of a task is ever applied, so the
    // decomposition graph has one out-list per task key.
    let mut graph: HashMap<String, Vec<String>> = HashMap::new();
    for m in &lib.methods {
        graph
            .entry(m.task.key())
            .or_insert_with(|| m.subtasks.iter().map(TaskName::key).collect());
    }
    let mut cycles: BTreeSet<Vec<String>> = BTreeSet::new();
    let mut keys: Vec<&String> = graph.keys().collect();
    keys.sort();
    for start in keys {
        let mut path = vec![start.clone()];
        find_cycles(&graph, &mut path, &mut cycles);
    }

    let unknown_effect_files = lib
        .methods
        .iter()
        .flat_map(|m| {
            m.effect_files
                .iter()
                .filter(|f| !known_files.contains(&f.as_str()))
                .map(|f| (m.id.clone(), f.clone()))
        })
        .collect();

    ValidationReport {
        cycles: cycles.into_iter().collect(),
        dangling_subtasks: dangling_subtasks(lib),
        unknown_effect_files,
    }
}

fn find_cycles(graph: &HashMap<String, Vec<String>>, path: &mut Vec<String>, out: &mut BTreeSet<Vec<String>>) {
    let current = path.last().cloned().unwrap_or_default();
    let Some(children) = graph.get(&current) else {
        return;
    };
    for child in children {
        if let Some(pos) = path.iter().position(|p| p == child) {
            let mut cycle = path[pos..].to_vec();
            let min = cycle
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.cmp(b.1))
                .map(|(i, _)| i)
                .unwrap_or(0);
            cycle.rotate_left(min);
            out.insert(cycle);
        } else {
            path.push(child.clone());
            find_cycles(graph, path, out);
            path.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resources;

    fn names(stack: &TaskStack) -> Vec<&str> {
        stack.task_names()
    }

    fn lib(text: &str) -> MethodLibrary {
        load_method_library(text).unwrap()
    }

    #[test]
    fn loads_blocksworld_network() {
        let lib = lib(resources::BLOCKSWORLD_NETWORK);
        assert_eq!(lib.len(), 5);
        let m1 = lib.get("method1").unwrap();
        let subs: Vec<_> = m1.subtasks.iter().map(TaskName::as_str).collect();
        assert_eq!(
            subs,
            [
                "take notes on problem specification",
                "take notes on user request",
                "unstack all blocks"
            ]
        );
        assert_eq!(lib.methods()[4].id, "method5");
    }

    #[test]
    fn primitive_only_library() {
        let lib = lib(r#"{"m": {"task": "t", "effect": "e", "effect_files": {"file1": "answer.txt"}}}"#);
        assert_eq!(lib.len(), 1);
        assert!(lib.methods()[0].is_primitive());
    }

    #[test]
    fn subtask_gap_is_an_error() {
        let err = load_method_library(
            r#"{"method1": {"task": "t", "subtasks": {"subtask1": "a", "subtask3": "c"},
                "effect": "e", "effect_files": {"file1": "x"}}}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("non-contiguous subtask numbering"));
    }

    #[test]
    fn subtask_keys_sorted_numerically() {
        let lib = lib(
            r#"{"m": {"task": "t", "subtasks": {"subtask10": "j", "subtask2": "b", "subtask1": "a",
                "subtask3": "c", "subtask4": "d", "subtask5": "e", "subtask6": "f", "subtask7": "g",
                "subtask8": "h", "subtask9": "i"}, "effect": "e", "effect_files": {"file1": "x"}}}"#,
        );
        let subs: Vec<_> = lib.methods()[0].subtasks.iter().map(TaskName::as_str).collect();
        assert_eq!(subs, ["a", "b", "c", "d", "e", "f", "g", "h", "i", "j"]);
    }

    #[test]
    fn descending_order_flag() {
        let text = r#"{"m": {"task": "t", "subtasks": {"subtask1": "a", "subtask2": "b"},
            "effect": "e", "effect_files": {"file1": "x"}}}"#;
        let lib = load_method_library_with_order(text, SubtaskOrder::Descending).unwrap();
        let subs: Vec<_> = lib.methods()[0].subtasks.iter().map(TaskName::as_str).collect();
        assert_eq!(subs, ["b", "a"]);
        assert_eq!(lib.order(), SubtaskOrder::Descending);
    }

    #[test]
    fn missing_fields_rejected() {
        for (text, field) in [
            (r#"{"m": {"effect": "e", "effect_files": {"file1": "x"}}}"#, "task"),
            (r#"{"m": {"task": "t", "effect_files": {"file1": "x"}}}"#, "effect"),
            (r#"{"m": {"task": "t", "effect": "e"}}"#, "effect_files"),
        ] {
            match load_method_library(text).unwrap_err() {
                LibraryError::MissingField { field: f, .. } => assert_eq!(f, field),
                other => panic!("unexpected {other:?}"),
            }
        }
        assert!(matches!(
            load_method_library(r#"{"m": {"task": "t", "effect": "  ", "effect_files": {"file1": "x"}}}"#),
            Err(LibraryError::EmptyField { field: "effect", .. })
        ));
        assert!(matches!(
            load_method_library(r#"{"m": {"task": "t", "effect": "e", "effect_files": {}}}"#),
            Err(LibraryError::EmptyField {
                field: "effect_files",
                ..
            })
        ));
        assert!(matches!(load_method_library("[1, 2]"), Err(LibraryError::Malformed(_))));
        assert!(matches!(
            load_method_library("{not json"),
            Err(LibraryError::Malformed(_))
        ));
    }

    #[test]
    fn first_relevant_method_normalizes() {
        let lib = lib(resources::BLOCKSWORLD_NETWORK);
        assert_eq!(
            find_first_relevant_method("process user request", &lib).unwrap().id,
            "method1"
        );
        assert_eq!(
            find_first_relevant_method("Process User Request ", &lib).unwrap().id,
            "method1"
        );
        assert!(find_first_relevant_method("nonexistent task", &lib).is_none());
    }

    #[test]
    fn decomposes_blocksworld_root() {
        let lib = lib(resources::BLOCKSWORLD_NETWORK);
        let root = TaskStack::with_root(TaskName::new("process user request").unwrap(), &lib);
        let stack = update_task(&root, &lib).unwrap();
        assert_eq!(
            names(&stack),
            [
                "take notes on problem specification",
                "take notes on user request",
                "unstack all blocks",
                "process user request"
            ]
        );
        assert_eq!(stack.head().unwrap().method.as_ref().unwrap().id, "method2");
    }

    #[test]
    fn empty_stack_is_noop() {
        let lib = lib(resources::BLOCKSWORLD_NETWORK);
        assert!(update_task(&TaskStack::new(), &lib).unwrap().is_empty());
    }

    #[test]
    fn self_cycle_hits_depth_guard() {
        let lib = lib(r#"{"a": {"task": "A", "subtasks": {"subtask1": "A", "subtask2": "B"},
                "effect": "e", "effect_files": {"file1": "x"}}}"#);
        let root = TaskStack::with_root(TaskName::new("A").unwrap(), &lib);
        let err = update_task(&root, &lib).unwrap_err();
        assert!(err.to_string().contains("decomposition-depth exceeded"));
    }

    #[test]
    fn dangling_subtask_inherits_parent_method() {
        let lib = lib(r#"{"m": {"task": "top", "subtasks": {"subtask1": "ghost task"},
                "effect": "e", "effect_files": {"file1": "answer.txt"}}}"#);
        let stack = update_task(&TaskStack::with_root(TaskName::new("top").unwrap(), &lib), &lib).unwrap();
        assert_eq!(names(&stack), ["ghost task", "top"]);
        assert_eq!(stack.head().unwrap().method.as_ref().unwrap().id, "m");
        let report = validate_library(&lib, &["answer.txt"]);
        assert_eq!(report.dangling_subtasks, ["ghost task"]);
        assert!(lib.warnings().iter().any(|w| w.contains("ghost task")));
    }

    #[test]
    fn unit_movement_network_is_clean() {
        let lib = lib(resources::UNIT_MOVEMENT_NETWORK);
        assert_eq!(lib.len(), 9);
        let report = validate_library(&lib, &resources::STANDARD_FILES);
        assert!(report.cycles.is_empty());
        assert!(report.dangling_subtasks.is_empty());
        assert!(report.unknown_effect_files.is_empty());
    }

    #[test]
    fn mutual_recursion_reports_one_cycle() {
        let lib = lib(
            r#"{"a": {"task": "A", "subtasks": {"subtask1": "B"}, "effect": "e", "effect_files": {"file1": "x"}},
                "b": {"task": "B", "subtasks": {"subtask1": "A"}, "effect": "e", "effect_files": {"file1": "x"}}}"#,
        );
        let report = validate_library(&lib, &["x"]);
        assert_eq!(report.cycles, vec![vec!["a".to_string(), "b".to_string()]]);
    }

    #[test]
    fn unknown_effect_files_reported() {
        let lib = lib(r#"{"m": {"task": "t", "effect": "e", "effect_files": {"file1": "secret.txt"}}}"#);
        let report = validate_library(&lib, &resources::STANDARD_FILES);
        assert_eq!(
            report.unknown_effect_files,
            [("m".to_string(), "secret.txt".to_string())]
        );
    }

    #[test]
    fn serialization_round_trips() {
        for text in [
            resources::BLOCKSWORLD_NETWORK,
            resources::UNIT_MOVEMENT_NETWORK,
            resources::TRAVEL_PLANNER_NETWORK,
        ] {
            let a = lib(text);
            let b = lib(&a.to_json().to_string());
            assert_eq!(a.methods(), b.methods());
        }
    }
}
