use std::path::{Path, PathBuf};

use serde_json::json;

/// Failures of a CLI invocation, each with its process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// The config does not parse or does not validate (exit 2).
    #[error("invalid config: {0}")]
    Config(String),

    /// The simulation failed or produced non-finite values (exit 3).
    #[error("runtime failure: {0}")]
    Runtime(String),

    /// Reading the config or writing an artifact failed (exit 4).
    #[error("i/o failure on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
            CliError::Io { .. } => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "invalid-config",
            CliError::Runtime(_) => "runtime",
            CliError::Io { .. } => "io",
        }
    }

    /// One-line machine-readable form written to stderr.
    pub fn to_json(&self) -> String {
        let message = match self {
            CliError::Config(m) | CliError::Runtime(m) => m.clone(),
            CliError::Io { source, .. } => source.to_string(),
        };
        let mut body = json!({ "error": { "kind": self.kind(), "exit_code": self.exit_code(), "message": message } });
        if let CliError::Io { path, .. } = self {
            body["error"]["path"] = json!(path.display().to_string());
        }
        body.to_string()
    }
}

impl From<qreservoir_core::Error> for CliError {
    fn from(e: qreservoir_core::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}
