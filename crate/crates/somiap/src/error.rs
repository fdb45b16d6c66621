//! Tool-level errors with a stable mapping to process exit codes.

use std::fmt;
use std::io;

/// Errors surfaced by file handling, parsing and the CLI.
#[derive(Debug)]
pub enum ToolError {
    /// Bad command usage (exit 1).
    Usage(String),
    /// IO failure, always carrying the offending path or target (exit 2).
    Io { context: String, source: io::Error },
    /// Undecodable or malformed input data (exit 2).
    Decode(String),
    /// Model or operation contract violation (exit 3).
    Contract(String),
    /// A cascade file in a recognized but unsupported flavor (exit 3).
    UnsupportedModel(String),
    /// Malformed cascade document, with the node path that failed (exit 3).
    Parse(String),
}

impl ToolError {
    pub fn io(context: impl Into<String>, source: io::Error) -> Self {
        ToolError::Io {
            context: context.into(),
            source,
        }
    }

    /// Process exit code: 0 success, 1 usage, 2 IO/decode, 3 model/contract.
    pub fn exit_code(&self) -> i32 {
        match self {
            ToolError::Usage(_) => 1,
            ToolError::Io { .. } | ToolError::Decode(_) => 2,
            ToolError::Contract(_) | ToolError::UnsupportedModel(_) | ToolError::Parse(_) => 3,
        }
    }
}

impl fmt::Display for ToolError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ToolError::Usage(msg) => write!(f, "usage: {msg}"),
            ToolError::Io { context, source } => write!(f, "{context}: {source}"),
            ToolError::Decode(msg) => write!(f, "decode: {msg}"),
            ToolError::Contract(msg) => write!(f, "{msg}"),
            ToolError::UnsupportedModel(msg) => write!(f, "unsupported model: {msg}"),
            ToolError::Parse(msg) => write!(f, "parse: {msg}"),
        }
    }
}

impl std::error::Error for ToolError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            ToolError::Io { source, .. } => Some(source),
            _ => None,
        }
    }
}

impl From<somiap_core::Error> for ToolError {
    fn from(e: somiap_core::Error) -> Self {
        ToolError::Contract(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, ToolError>;
