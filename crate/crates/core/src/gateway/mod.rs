//! Chat-completion backends, prompt assembly and response parsing.

mod network;
mod prompt;
mod response;

use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

pub use network::{generate_task_network, render_network_prompt, GeneratedNetwork, NetworkGenError};
pub use prompt::{fill_slots, render_agent_prompt, PromptContext, MAX_LOGGED_COMMANDS};
pub use response::{extract_json_values, parse_agent_response, AgentResponse, ParseFailure};

use crate::environment::Action;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BackendError {
    #[error("transport error after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("scripted backend exhausted after {calls} call(s)")]
    ScriptedExhausted { calls: usize },
    #[error("unexpected response body: {0}")]
    BadResponse(String),
}

/// Anything that turns a rendered prompt into model text.
pub trait Backend: Send {
    fn complete(&mut self, prompt: &str) -> Result<String, BackendError>;
}

impl<B: Backend + ?Sized> Backend for Box<B> {
    fn complete(&mut self, prompt: &str) -> Result<String, BackendError> {
        (**self).complete(prompt)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Exhaustion {
    #[default]
    Error,
    RepeatLast,
    Cycle,
}

/// Replays a fixed transcript. Each episode needs its own instance since the
/// cursor is stateful.
#[derive(Debug, Clone)]
pub struct ScriptedBackend {
    responses: Vec<String>,
    cursor: usize,
    on_exhausted: Exhaustion,
}

impl ScriptedBackend {
    pub fn new<S: Into<String>>(responses: impl IntoIterator<Item = S>) -> Self {
        Self::with_exhaustion(responses, Exhaustion::Error)
    }

    pub fn with_exhaustion<S: Into<String>>(responses: impl IntoIterator<Item = S>, on_exhausted: Exhaustion) -> Self {
        Self {
            responses: responses.into_iter().map(Into::into).collect(),
            cursor: 0,
            on_exhausted,
        }
    }

    /// Always answers with `reply`.
    pub fn constant(reply: impl Into<String>) -> Self {
        Self::with_exhaustion([reply.into()], Exhaustion::RepeatLast)
    }

    pub fn calls(&self) -> usize {
        self.cursor
    }
}

impl Backend for ScriptedBackend {
    fn complete(&mut self, _prompt: &str) -> Result<String, BackendError> {
        let n = self.responses.len();
        let index = if self.cursor < n {
            self.cursor
        } else {
            match self.on_exhausted {
                _ if n == 0 => return Err(BackendError::ScriptedExhausted { calls: self.cursor }),
                Exhaustion::Error => return Err(BackendError::ScriptedExhausted { calls: self.cursor }),
                Exhaustion::RepeatLast => n - 1,
                Exhaustion::Cycle => self.cursor % n,
            }
        };
        self.cursor += 1;
        Ok(self.responses[index].clone())
    }
}

fn default_auth_header() -> String {
    "Authorization".into()
}
fn default_auth_prefix() -> String {
    "Bearer ".into()
}
fn default_model_field() -> String {
    "model".into()
}
fn default_messages_field() -> String {
    "messages".into()
}
fn default_response_pointer() -> String {
    "/choices/0/message/content".into()
}
fn default_timeout_secs() -> f64 {
    600.0
}
fn default_retries() -> u32 {
    2
}
fn default_backoff_ms() -> u64 {
    1000
}

/// OpenAI-style chat endpoint. Field names are configuration so that other
/// wire layouts can be targeted without code changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HttpConfig {
    /// Full URL of the completion endpoint.
    pub endpoint: String,
    pub model: String,
    #[serde(default)]
    pub api_key: Option<String>,
    #[serde(default = "default_auth_header")]
    pub auth_header: String,
    #[serde(default = "default_auth_prefix")]
    pub auth_prefix: String,
    #[serde(default = "default_model_field")]
    pub model_field: String,
    #[serde(default = "default_messages_field")]
    pub messages_field: String,
    /// JSON pointer to the reply text in the response body.
    #[serde(default = "default_response_pointer")]
    pub response_pointer: String,
    /// Extra body fields (temperature, max_tokens, ...), passed through.
    #[serde(default)]
    pub params: Map<String, Value>,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: f64,
    #[serde(default = "default_retries")]
    pub retries: u32,
    #[serde(default = "default_backoff_ms")]
    pub retry_backoff_ms: u64,
}

impl HttpConfig {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            model: model.into(),
            api_key: None,
            auth_header: default_auth_header(),
            auth_prefix: default_auth_prefix(),
            model_field: default_model_field(),
            messages_field: default_messages_field(),
            response_pointer: default_response_pointer(),
            params: Map::new(),
            timeout_secs: default_timeout_secs(),
            retries: default_retries(),
            retry_backoff_ms: default_backoff_ms(),
        }
    }

    pub fn request_body(&self, prompt: &str) -> Value {
        let mut body = self.params.clone();
        body.insert(self.model_field.clone(), Value::String(self.model.clone()));
        body.insert(
            self.messages_field.clone(),
            serde_json::json!([{ "role": "user", "content": prompt }]),
        );
        Value::Object(body)
    }

    pub fn extract_reply(&self, body: &str) -> Result<String, BackendError> {
        let value: Value = serde_json::from_str(body).map_err(|e| BackendError::BadResponse(e.to_string()))?;
        value
            .pointer(&self.response_pointer)
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| BackendError::BadResponse(format!("no string at `{}`", self.response_pointer)))
    }
}

#[derive(Debug, Clone)]
pub struct HttpBackend {
    config: HttpConfig,
    agent: ureq::Agent,
}

impl HttpBackend {
    pub fn new(config: HttpConfig) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs_f64(config.timeout_secs.max(0.001))))
            .build()
            .into();
        Self { config, agent }
    }

    fn attempt(&self, body: &str) -> Result<String, String> {
        let mut request = self
            .agent
            .post(&self.config.endpoint)
            .header("Content-Type", "application/json");
        if let Some(key) = &self.config.api_key {
            request = request.header(&self.config.auth_header, format!("{}{}", self.config.auth_prefix, key));
        }
        let mut response = request
            .send(body)
            .map_err(|e| format!("{}: {e}", self.config.endpoint))?;
        response.body_mut().read_to_string().map_err(|e| e.to_string())
    }
}

impl Backend for HttpBackend {
    fn complete(&mut self, prompt: &str) -> Result<String, BackendError> {
        let body = self.config.request_body(prompt).to_string();
        let attempts = self.config.retries + 1;
        let mut last = String::new();
        for attempt in 1..=attempts {
            match self.attempt(&body) {
                Ok(text) => return self.config.extract_reply(&text),
                Err(e) => last = e,
            }
            if attempt < attempts && self.config.retry_backoff_ms > 0 {
                thread::sleep(Duration::from_millis(self.config.retry_backoff_ms * u64::from(attempt)));
            }
        }
        Err(BackendError::Transport {
            attempts,
            message: last,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
#[allow(clippy::large_enum_variant)] // built once per run
pub enum BackendConfig {
    HttpChat(HttpConfig),
    Scripted {
        responses: Vec<String>,
        #[serde(default)]
        on_exhausted: Exhaustion,
    },
    /// Writes a known-correct answer, then verifies until the stack empties.
    /// Needs the instance's solution, supplied when the backend is built.
    Oracle,
}

impl BackendConfig {
    /// Verifier that accepts everything.
    pub fn always_pass() -> Self {
        Self::Scripted {
            responses: vec!["ANALYSIS: all conditions hold.\nPASS: TRUE".into()],
            on_exhausted: Exhaustion::RepeatLast,
        }
    }

    pub fn build(&self, oracle_answer: Option<&str>) -> Result<Box<dyn Backend>, BackendError> {
        Ok(match self {
            Self::HttpChat(cfg) => Box::new(HttpBackend::new(cfg.clone())),
            Self::Scripted {
                responses,
                on_exhausted,
            } => Box::new(ScriptedBackend::with_exhaustion(responses.clone(), *on_exhausted)),
            Self::Oracle => {
                let answer =
                    oracle_answer.ok_or_else(|| BackendError::BadResponse("oracle backend needs an answer".into()))?;
                Box::new(ScriptedBackend::with_exhaustion(
                    oracle_transcript(answer),
                    Exhaustion::RepeatLast,
                ))
            }
        })
    }
}

/// Two-step transcript: write `answer` to the answer file, then verify.
pub fn oracle_transcript(answer: &str) -> Vec<String> {
    vec![
        AgentResponse::new("", "", Action::write(crate::resources::ANSWER, answer)).to_json_string(),
        AgentResponse::new("", "", Action::verify()).to_json_string(),
    ]
}
