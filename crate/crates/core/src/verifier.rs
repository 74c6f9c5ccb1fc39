//! Judges whether the workspace satisfies a task's effect, using a second
//! model prompted with the effect text and the relevant files.

use serde::{Deserialize, Serialize};

use crate::environment::Environment;
use crate::gateway::{fill_slots, Backend, BackendError};
use crate::resources::VERIFY_PROMPT;

/// Substring of the verifier reply that marks success.
pub const PASS_MARKER: &str = "PASS: TRUE";

/// Shown in place of content for effect files absent from the workspace.
pub const MISSING_FILE: &str = "[file not present in workspace]";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyOutcome {
    pub passed: bool,
    pub prompt: String,
    pub reply: String,
}

fn strip_extension(path: &str) -> &str {
    let name_start = path.rfind('/').map_or(0, |i| i + 1);
    match path[name_start..].rfind('.') {
        Some(dot) if dot > 0 => &path[..name_start + dot],
        _ => path,
    }
}

/// One `## Here are the contents of <name>: ` block per file, in the given
/// order. Names lose their extension.
pub fn render_file_section(files: &[String], env: &Environment) -> String {
    let mut out = String::new();
    for path in files {
        out.push_str("## Here are the contents of ");
        out.push_str(strip_extension(path));
        out.push_str(": \n");
        out.push_str(env.content(path).unwrap_or(MISSING_FILE));
        out.push('\n');
    }
    out
}

pub fn render_verify_prompt(effect: &str, files: &[String], env: &Environment) -> String {
    fill_slots(VERIFY_PROMPT, &[effect, &render_file_section(files, env)])
}

pub fn is_pass(reply: &str) -> bool {
    reply.contains(PASS_MARKER)
}

/// A single verifier call; no retries beyond the backend's own.
pub fn verify_task(
    backend: &mut dyn Backend,
    effect: &str,
    files: &[String],
    env: &Environment,
) -> Result<VerifyOutcome, BackendError> {
    let prompt = render_verify_prompt(effect, files, env);
    let reply = backend.complete(&prompt)?;
    Ok(VerifyOutcome {
        passed: is_pass(&reply),
        prompt,
        reply,
    })
}
