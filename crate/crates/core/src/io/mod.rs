//! Input documents, reports, DOT rendering and the command line.

pub mod cli;
pub mod document;
pub mod dot;
pub mod report;
pub mod serde_int;

pub use document::{parse, parse_diagram, DiagramDocument, ParseError, TailDocument};
pub use dot::export_dot;
pub use report::{Report, ReportError, Status};
