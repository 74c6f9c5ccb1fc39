use thiserror::Error;

use super::{extract_json_values, fill_slots, Backend, BackendError};
use crate::resources::{NETWORK_GENERATION_PROMPT, STANDARD_FILES};
use crate::task_network::{library_from_value, validate_library, MethodLibrary, SubtaskOrder, ValidationReport};

#[derive(Debug, Error)]
pub enum NetworkGenError {
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("no valid task network after {attempts} attempt(s); last problem: {last}")]
    Exhausted { attempts: u32, last: String },
}

#[derive(Debug, Clone)]
pub struct GeneratedNetwork {
    pub library: MethodLibrary,
    pub report: ValidationReport,
    pub raw: String,
    pub attempts: u32,
}

pub fn render_network_prompt(problem_spec: &str) -> String {
    fill_slots(NETWORK_GENERATION_PROMPT, &[problem_spec])
}

fn check_reply(reply: &str, order: SubtaskOrder) -> Result<(MethodLibrary, ValidationReport), String> {
    let mut last = "reply contains no json object".to_string();
    for value in extract_json_values(reply) {
        match library_from_value(&value, order) {
            Ok(lib) if lib.is_empty() => last = "empty task network".into(),
            Ok(lib) => {
                let report = validate_library(&lib, &STANDARD_FILES);
                if !report.cycles.is_empty() {
                    last = format!("cyclic decomposition: {:?}", report.cycles);
                    continue;
                }
                return Ok((lib, report));
            }
            Err(e) => last = e.to_string(),
        }
    }
    Err(last)
}

/// Asks `backend` for a method library, retrying on unusable replies.
/// Transport failures are returned immediately.
pub fn generate_task_network(
    backend: &mut dyn Backend,
    problem_spec: &str,
    retries: u32,
    order: SubtaskOrder,
) -> Result<GeneratedNetwork, NetworkGenError> {
    let prompt = render_network_prompt(problem_spec);
    let attempts = retries + 1;
    let mut last = String::new();
    for attempt in 1..=attempts {
        let reply = backend.complete(&prompt)?;
        match check_reply(&reply, order) {
            Ok((library, report)) => {
                return Ok(GeneratedNetwork {
                    library,
                    report,
                    raw: reply,
                    attempts: attempt,
                })
            }
            Err(problem) => last = problem,
        }
    }
    Err(NetworkGenError::Exhausted { attempts, last })
}
