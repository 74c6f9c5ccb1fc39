//! Runs agent-authored solver code in the episode root.

use std::io::Read;
use std::path::Path;
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use wait_timeout::ChildExt;

use super::EnvError;
use crate::resources::SOLVER;

const DEFAULT_PATH: &str = "/usr/local/bin:/usr/bin:/bin";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Program and leading arguments; the solver path is appended.
    pub interpreter: Vec<String>,
    pub timeout_secs: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            interpreter: vec!["python3".to_string()],
            timeout_secs: 30.0,
        }
    }
}

impl SolverConfig {
    pub fn timeout(&self) -> Duration {
        Duration::from_secs_f64(self.timeout_secs.max(0.0))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOutcome {
    pub stdout: String,
    pub stderr: String,
    /// Process exit code; -1 when the process was killed by a signal.
    pub exit_status: i32,
    pub duration: Duration,
    pub timed_out: bool,
    pub timeout: Duration,
}

/// Executes `solver.py` under `root` with a cleared environment, capturing
/// both streams. The process is killed once the timeout elapses; the outcome
/// is returned whatever the exit status.
pub fn execute_solver(root: &Path, config: &SolverConfig) -> Result<SolverOutcome, EnvError> {
    let Some((program, args)) = config.interpreter.split_first() else {
        return Err(EnvError::InterpreterNotFound(String::new()));
    };
    let timeout = config.timeout();
    let start = Instant::now();
    let mut child = Command::new(program)
        .args(args)
        .arg(SOLVER)
        .current_dir(root)
        .env_clear()
        .env("PATH", DEFAULT_PATH)
        .env("PYTHONDONTWRITEBYTECODE", "1")
        .env("PYTHONIOENCODING", "utf-8")
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|_| EnvError::InterpreterNotFound(program.clone()))?;

    let mut stdout = child.stdout.take().expect("stdout piped");
    let mut stderr = child.stderr.take().expect("stderr piped");
    let out_reader = thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = stdout.read_to_end(&mut buf);
        buf
    });
    let err_reader = thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = stderr.read_to_end(&mut buf);
        buf
    });

    let (status, timed_out) = match child.wait_timeout(timeout)? {
        Some(status) => (status, false),
        None => {
            let _ = child.kill();
            (child.wait()?, true)
        }
    };
    let duration = start.elapsed();
    let stdout = out_reader.join().unwrap_or_default();
    let stderr = err_reader.join().unwrap_or_default();

    Ok(SolverOutcome {
        stdout: String::from_utf8_lossy(&stdout).into_owned(),
        stderr: String::from_utf8_lossy(&stderr).into_owned(),
        exit_status: status.code().unwrap_or(-1),
        duration,
        timed_out,
        timeout,
    })
}
