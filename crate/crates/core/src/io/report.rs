//! The self-contained JSON report every command prints.

use serde::Serialize;
use serde_json::Value;

use super::document::ParseError;

pub const TOOL: &str = "afk";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Invalid,
    Inconclusive,
    InternalError,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Invalid => 1,
            Status::Inconclusive => 2,
            Status::InternalError => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReportError {
    pub kind: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
}

impl ReportError {
    pub fn new(kind: &str, message: impl Into<String>) -> Self {
        ReportError {
            kind: kind.to_string(),
            message: message.into(),
            path: None,
            line: None,
            column: None,
        }
    }
}

impl From<&ParseError> for ReportError {
    fn from(e: &ParseError) -> Self {
        match e {
            ParseError::Syntax { line, column, .. } => ReportError {
                line: Some(*line),
                column: Some(*column),
                ..ReportError::new("syntax", e.to_string())
            },
            ParseError::Shape { path, .. } => ReportError {
                path: Some(path.clone()),
                ..ReportError::new("shape", e.to_string())
            },
            ParseError::Invalid { path, .. } => ReportError {
                path: Some(path.clone()),
                ..ReportError::new("validation", e.to_string())
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    /// Command-specific flags, so the report records how it was produced.
    pub arguments: Value,
    pub budget: usize,
    /// `sha256:` digest of the canonical form of the validated input.
    pub input_digest: Option<String>,
    pub status: Status,
    pub exit_code: i32,
    pub result: Option<Value>,
    pub errors: Vec<ReportError>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
}

impl Report {
    pub fn new(command: &str, arguments: Value, budget: usize) -> Self {
        Report {
            tool: TOOL,
            version: VERSION,
            command: command.to_string(),
            arguments,
            budget,
            input_digest: None,
            status: Status::Ok,
            exit_code: 0,
            result: None,
            errors: Vec::new(),
            timing_ms: None,
        }
    }

    pub fn set_status(&mut self, status: Status) {
        self.status = status;
        self.exit_code = status.exit_code();
    }

    pub fn fail(&mut self, status: Status, error: ReportError) {
        self.set_status(status);
        self.errors.push(error);
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }
}
