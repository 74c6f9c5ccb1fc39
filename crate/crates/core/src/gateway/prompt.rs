use serde::{Deserialize, Serialize};

use crate::resources::AGENT_PROMPT;

/// Only this many trailing commands are shown to the agent.
pub const MAX_LOGGED_COMMANDS: usize = 10;

/// Everything the acting model sees besides the fixed instructions.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptContext {
    pub notes: String,
    pub last_response: String,
    pub last_commands: Vec<String>,
    pub last_output: String,
    pub current_task: String,
    pub current_effect: String,
}

/// Substitutes `{}` slots positionally, turning `{{`/`}}` into literal
/// braces. Any other brace is copied as is. Missing arguments render empty.
pub fn fill_slots(template: &str, args: &[&str]) -> String {
    let mut out = String::with_capacity(template.len() + args.iter().map(|a| a.len()).sum::<usize>());
    let mut next = 0;
    let mut chars = template.chars().peekable();
    while let Some(c) = chars.next() {
        match (c, chars.peek()) {
            ('{', Some('{')) | ('}', Some('}')) => {
                chars.next();
                out.push(c);
            }
            ('{', Some('}')) => {
                chars.next();
                if let Some(arg) = args.get(next) {
                    out.push_str(arg);
                }
                next += 1;
            }
            _ => out.push(c),
        }
    }
    out
}

pub fn render_agent_prompt(ctx: &PromptContext) -> String {
    let skip = ctx.last_commands.len().saturating_sub(MAX_LOGGED_COMMANDS);
    let commands = ctx.last_commands[skip..].join("\n");
    fill_slots(
        AGENT_PROMPT,
        &[
            &ctx.notes,
            &ctx.last_response,
            &commands,
            &ctx.last_output,
            &ctx.current_task,
            &ctx.current_effect,
        ],
    )
}
