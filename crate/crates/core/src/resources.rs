//! Bundled templates, problem specifications, method networks, and data.

pub const AGENT_PROMPT: &str = include_str!("../resources/prompts/agent.txt");
pub const VERIFY_PROMPT: &str = include_str!("../resources/prompts/verify.txt");
pub const NETWORK_GENERATION_PROMPT: &str = include_str!("../resources/prompts/network_generation.txt");

pub const BLOCKSWORLD_SPEC: &str = include_str!("../resources/specs/blocksworld.txt");
pub const UNIT_MOVEMENT_SPEC: &str = include_str!("../resources/specs/unit_movement.txt");
pub const RECIPE_SPEC: &str = include_str!("../resources/specs/recipe.txt");
/// Shipped for users who supply the external travel dataset; no generator
/// or checker exists for it here.
pub const TRAVEL_PLANNER_SPEC: &str = include_str!("../resources/specs/travel_planner.txt");

pub const BLOCKSWORLD_NETWORK: &str = include_str!("../resources/networks/blocksworld.json");
pub const UNIT_MOVEMENT_NETWORK: &str = include_str!("../resources/networks/unit_movement.json");
pub const RECIPE_NETWORK: &str = include_str!("../resources/networks/recipe.json");
pub const TRAVEL_PLANNER_NETWORK: &str = include_str!("../resources/networks/travel_planner.json");
pub const LLM_BLOCKSWORLD_NETWORK: &str = include_str!("../resources/networks/llm_blocksworld.json");
pub const LLM_UNIT_MOVEMENT_NETWORK: &str = include_str!("../resources/networks/llm_unit_movement.json");

pub const RECIPE_DB: &str = include_str!("../resources/data/recipes.tsv");

pub const SOLVER: &str = "solver.py";
pub const NOTES: &str = "files/notes.txt";
pub const ANSWER: &str = "answer.txt";
pub const REQUEST: &str = "files/request.txt";
pub const PROBLEM_SPEC: &str = "files/problem_specification.txt";
pub const TOOLS_SPEC: &str = "files/tools_specification.txt";
pub const OUTPUT: &str = "output.txt";

/// Every path the agent prompt advertises.
pub const STANDARD_FILES: [&str; 7] = [SOLVER, NOTES, ANSWER, REQUEST, PROBLEM_SPEC, TOOLS_SPEC, OUTPUT];

/// Tool module importable from solver code in the recipe domain.
pub const RECIPE_TOOLS_PY: &str = include_str!("../resources/tools/recipes.py");
pub const RECIPE_TOOLS_SPEC: &str = include_str!("../resources/specs/recipe_tools.txt");
pub const RECIPE_TOOLS_MODULE: &str = "tools/recipes.py";
pub const RECIPE_TOOLS_INIT: &str = "tools/__init__.py";
pub const RECIPE_TOOLS_DB: &str = "tools/recipe_db.tsv";
