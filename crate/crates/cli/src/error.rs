use complexdim::Error;
use serde_json::json;
use thiserror::Error as ThisError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Parse,
    Indeterminate,
    Capacity,
    Other,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Other => 1,
            ErrorKind::Parse => 2,
            ErrorKind::Indeterminate => 3,
            ErrorKind::Capacity => 4,
        }
    }

    fn label(self) -> &'static str {
        match self {
            ErrorKind::Parse => "parse",
            ErrorKind::Indeterminate => "indeterminate",
            ErrorKind::Capacity => "capacity",
            ErrorKind::Other => "error",
        }
    }
}

#[derive(Debug, ThisError)]
#[error("{message}")]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
    pub line: Option<usize>,
}

impl CliError {
    pub fn parse(message: String, line: Option<usize>) -> Self {
        Self {
            kind: ErrorKind::Parse,
            message,
            line,
        }
    }

    pub fn other(message: String) -> Self {
        Self {
            kind: ErrorKind::Other,
            message,
            line: None,
        }
    }

    /// The single-line JSON object written to stderr.
    pub fn to_json(&self) -> String {
        let mut v = json!({"error": self.kind.label(), "message": self.message});
        if let Some(l) = self.line {
            v["line"] = json!(l);
        }
        v.to_string()
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let kind = match &e {
            Error::Indeterminate(_) | Error::NotSimple(_) | Error::PoleProximity { .. } => ErrorKind::Indeterminate,
            Error::Capacity { .. } | Error::Truncated { .. } => ErrorKind::Capacity,
            _ => ErrorKind::Other,
        };
        Self {
            kind,
            message: e.to_string(),
            line: None,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::other(e.to_string())
    }
}
