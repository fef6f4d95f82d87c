use std::fmt;
use std::path::PathBuf;

use serde_json::Value;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Two values that cannot be aggregated.
///
/// `path` is the JSON Pointer of the deepest location where the inputs
/// disagree. Origins name the extractors or files that produced each side
/// when the caller knows them.
#[derive(Debug, Clone, PartialEq)]
pub struct ConflictError {
    pub path: String,
    // Boxed so results carrying this error stay small.
    pub left_value: Box<Value>,
    pub right_value: Box<Value>,
    pub left_origin: Option<String>,
    pub right_origin: Option<String>,
}

impl ConflictError {
    pub fn new(path: impl Into<String>, left_value: Value, right_value: Value) -> Self {
        Self {
            path: path.into(),
            left_value: Box::new(left_value),
            right_value: Box::new(right_value),
            left_origin: None,
            right_origin: None,
        }
    }

    pub fn with_origins(mut self, left: impl Into<String>, right: impl Into<String>) -> Self {
        self.left_origin = Some(left.into());
        self.right_origin = Some(right.into());
        self
    }
}

impl fmt::Display for ConflictError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let path = if self.path.is_empty() { "(root)" } else { &self.path };
        write!(f, "conflict at {path}: {} vs {}", self.left_value, self.right_value)?;
        if let (Some(l), Some(r)) = (&self.left_origin, &self.right_origin) {
            write!(f, " (from {l} and {r})")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConflictError {}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid entity: {0}")]
    InvalidEntity(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("invalid JSON pointer {pointer:?}: {reason}")]
    PointerSyntax { pointer: String, reason: String },

    #[error("failed to parse {origin}: {message}")]
    Parse { origin: String, message: String },

    #[error("unsupported model format version {found:?} (expected {expected:?})")]
    Version { found: String, expected: String },

    #[error(transparent)]
    Conflict(#[from] ConflictError),

    #[error("extractor registration failed: {0}")]
    Registration(String),

    #[error("extractor {id} failed{}: {message}", exit_code.map(|c| format!(" with exit code {c}")).unwrap_or_default())]
    Extractor {
        id: String,
        message: String,
        exit_code: Option<i32>,
        stderr: String,
    },

    #[error("external extractor {id} timed out after {seconds}s")]
    Timeout { id: String, seconds: f64 },

    #[error("external extractor {id} violated the protocol: {message}")]
    Protocol { id: String, message: String },

    #[error("extractor {extractor} made an illegal mutation at {path}: {message}")]
    IllegalMutation {
        extractor: String,
        path: String,
        message: String,
    },

    #[error("entity nesting exceeded {limit} levels")]
    DepthLimit { limit: usize },

    #[error("invalid pattern {pattern:?}: {reason}")]
    Pattern { pattern: String, reason: String },

    #[error("{} link(s) failed resolution policy: {}", offending.len(), offending.join(", "))]
    LinkResolution { offending: Vec<String> },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn pattern(pattern: &str, reason: impl Into<String>) -> Self {
        Error::Pattern {
            pattern: pattern.to_string(),
            reason: reason.into(),
        }
    }

    /// Errors that describe the outcome of the reconstruction itself and must
    /// reach the caller unchanged, even when raised inside a nested extractor.
    pub(crate) fn is_engine_error(&self) -> bool {
        matches!(
            self,
            Error::Conflict(_)
                | Error::Extractor { .. }
                | Error::Timeout { .. }
                | Error::Protocol { .. }
                | Error::IllegalMutation { .. }
                | Error::DepthLimit { .. }
        )
    }
}
