//! Task-network guided LLM agents.
//!
//! A method library decomposes a top-level request into an ordered stack of
//! tasks. For each task an acting model picks file actions in a small
//! workspace, and a verifying model decides when the task's effect holds.
//! Domain generators and checkers turn this into measurable experiments.

pub mod agent;
pub mod domains;
pub mod environment;
pub mod gateway;
pub mod harness;
pub mod resources;
pub mod task_network;
pub mod verifier;
