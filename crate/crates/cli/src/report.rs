use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

use vqmc::conic::SolverConfig;

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass = 0,
    Error = 1,
    Fail = 2,
    Undetermined = 3,
}

/// Envelope printed by every analysis command. Everything but `timestamp`
/// is a function of the flags.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: Value,
    pub results: Value,
    pub config: Option<SolverConfig>,
    pub exit_code: i32,
    pub version: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

impl RunReport {
    pub fn new(command: &str, inputs: Value, results: Value, config: Option<SolverConfig>, verdict: Verdict) -> Self {
        RunReport {
            command: command.to_string(),
            inputs,
            results,
            config,
            exit_code: verdict as i32,
            version: format!("vqmc {}", env!("CARGO_PKG_VERSION")),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }
}
