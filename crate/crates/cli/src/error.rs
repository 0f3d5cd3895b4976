use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: spade_core::Error,
    },
    #[error("{0}")]
    Config(String),
    #[error("cannot read config file {path}: {message}")]
    ConfigFile { path: String, message: String },
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("cannot read {path}: {message}")]
    Input { path: String, message: String },
    #[error("{failed} of {total} oracle checks failed")]
    ChecksFailed { failed: usize, total: usize },
}

impl CliError {
    /// Wraps a library error with what the command was doing.
    pub fn at(context: impl Into<String>) -> impl FnOnce(spade_core::Error) -> CliError {
        let context = context.into();
        move |source| CliError::Core { context, source }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core { source, .. } => source.kind(),
            CliError::Config(_) | CliError::ConfigFile { .. } => "config",
            CliError::Write { .. } | CliError::Input { .. } => "io",
            CliError::ChecksFailed { .. } => "check",
        }
    }

    /// One-line JSON object for scripts.
    pub fn to_json_line(&self) -> String {
        let mut obj = serde_json::Map::new();
        obj.insert("kind".into(), self.kind().into());
        if let CliError::Core { context, source } = self {
            obj.insert("context".into(), context.clone().into());
            obj.insert("message".into(), source.to_string().into());
        } else {
            obj.insert("message".into(), self.to_string().into());
        }
        serde_json::json!({ "error": obj }).to_string()
    }
}
