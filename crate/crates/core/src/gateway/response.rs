use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::environment::{Action, ActionKind};

/// A decoded agent turn.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentResponse {
    pub observation: String,
    pub thought: String,
    pub action: Action,
}

impl AgentResponse {
    pub fn new(observation: impl Into<String>, thought: impl Into<String>, action: Action) -> Self {
        Self {
            observation: observation.into(),
            thought: thought.into(),
            action,
        }
    }

    /// The wire layout the agent is asked to produce.
    pub fn to_json_string(&self) -> String {
        let value = json!({
            "observation": self.observation,
            "thought": self.thought,
            "action": {
                "name": self.action.kind.label().to_ascii_lowercase(),
                "action_arg1": self.action.arg1,
                "action_arg2": self.action.arg2,
            }
        });
        serde_json::to_string_pretty(&value).expect("json values serialize")
    }
}

/// Why a reply could not be turned into an action. The display text is what
/// the agent sees in its trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseFailure {
    pub reason: String,
}

impl fmt::Display for ParseFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "JSONDecode error: {}", self.reason)
    }
}

impl std::error::Error for ParseFailure {}

fn fail(reason: impl Into<String>) -> ParseFailure {
    ParseFailure { reason: reason.into() }
}

/// Every top-level JSON object embedded in `text`, in order of appearance.
/// Prose, code fences and broken fragments around them are skipped.
pub fn extract_json_values(text: &str) -> Vec<Value> {
    let mut found = Vec::new();
    let mut i = 0;
    while let Some(offset) = text[i..].find('{') {
        let start = i + offset;
        let mut stream = serde_json::Deserializer::from_str(&text[start..]).into_iter::<Value>();
        match stream.next() {
            Some(Ok(value @ Value::Object(_))) => {
                i = start + stream.byte_offset();
                found.push(value);
            }
            _ => i = start + 1,
        }
    }
    found
}

/// Models often emit raw newlines and tabs inside string literals. Escaping
/// them turns such replies into valid JSON without touching anything else.
fn escape_raw_controls(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut in_string = false;
    let mut escaped = false;
    for c in text.chars() {
        if in_string {
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '"' {
                in_string = false;
            } else if c == '\n' {
                out.push_str("\\n");
                continue;
            } else if c == '\r' {
                out.push_str("\\r");
                continue;
            } else if c == '\t' {
                out.push_str("\\t");
                continue;
            }
        } else if c == '"' {
            in_string = true;
        }
        out.push(c);
    }
    out
}

fn as_text(value: Option<&Value>) -> String {
    match value {
        None | Some(Value::Null) => String::new(),
        Some(Value::String(s)) => s.clone(),
        Some(other) => other.to_string(),
    }
}

fn lookup<'a>(map: &'a serde_json::Map<String, Value>, key: &str) -> Option<&'a Value> {
    map.get(key).or_else(|| {
        map.iter()
            .find(|(k, _)| k.trim().eq_ignore_ascii_case(key))
            .map(|(_, v)| v)
    })
}

fn decode(value: &Value) -> Result<AgentResponse, ParseFailure> {
    let map = value.as_object().ok_or_else(|| fail("expected a json object"))?;
    let action = lookup(map, "action").ok_or_else(|| fail("missing `action`"))?;
    let (name, arg1, arg2) = match action {
        Value::Object(a) => {
            let name = lookup(a, "name").ok_or_else(|| fail("missing action `name`"))?;
            (
                as_text(Some(name)),
                as_text(lookup(a, "action_arg1")),
                as_text(lookup(a, "action_arg2")),
            )
        }
        Value::String(name) => (
            name.clone(),
            as_text(lookup(map, "action_arg1")),
            as_text(lookup(map, "action_arg2")),
        ),
        _ => return Err(fail("`action` must be an object")),
    };
    let kind = ActionKind::parse(&name).ok_or_else(|| fail(format!("unknown action `{name}`")))?;
    Ok(AgentResponse {
        observation: as_text(lookup(map, "observation")),
        thought: as_text(lookup(map, "thought")),
        action: Action::new(kind, arg1, arg2),
    })
}

/// Decodes the first JSON object in `text` that carries an `action`.
pub fn parse_agent_response(text: &str) -> Result<AgentResponse, ParseFailure> {
    let mut first_error = None;
    for candidate in [text.to_string(), escape_raw_controls(text)] {
        for value in extract_json_values(&candidate) {
            match decode(&value) {
                Ok(response) => return Ok(response),
                Err(e) => {
                    first_error.get_or_insert(e);
                }
            }
        }
    }
    Err(
        first_error.unwrap_or_else(|| match serde_json::from_str::<Value>(text.trim()) {
            Err(e) => fail(e.to_string()),
            Ok(_) => fail("no json object found"),
        }),
    )
}
