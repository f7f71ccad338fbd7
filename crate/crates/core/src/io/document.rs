//! The JSON input format.
//!
//! ```json
//! {"levels": [[1,1],[2,2],[3,4]],
//!  "matrices": [[[1,0],[1,1]], [[1,0],[1,1]]],
//!  "tail": {"matrix": [[1,0],[1,1]], "slack": [1,0]},
//!  "metadata": {"name": "two columns"}}
//! ```
//!
//! Matrices are target-major: row `i` lists the multiplicities into summand
//! `i` of the next level.

use num_bigint::BigInt;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::serde_int::{from_number, rows_value, vector_value};
use crate::diagram::{AffineTail, BratteliDiagram, DiagramError, LevelProfile, MultiplicityMatrix};
use crate::linalg::IntMatrix;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{path}: {message}")]
    Shape { path: String, message: String },
    #[error("{path}: {source}")]
    Invalid {
        path: String,
        #[source]
        source: DiagramError,
    },
}

impl ParseError {
    pub fn path(&self) -> Option<&str> {
        match self {
            ParseError::Syntax { .. } => None,
            ParseError::Shape { path, .. } | ParseError::Invalid { path, .. } => Some(path),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TailDocument {
    pub matrix: Vec<Vec<BigInt>>,
    pub slack: Vec<BigInt>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagramDocument {
    pub levels: Vec<Vec<BigInt>>,
    pub matrices: Vec<Vec<Vec<BigInt>>>,
    pub tail: Option<TailDocument>,
    /// Free-form, carried through untouched (e.g. `name`, `notes`).
    pub metadata: Option<Map<String, Value>>,
}

fn shape(path: impl Into<String>, message: impl Into<String>) -> ParseError {
    ParseError::Shape {
        path: path.into(),
        message: message.into(),
    }
}

fn integer(v: &Value, path: &str) -> Result<BigInt, ParseError> {
    match v {
        Value::Number(n) => from_number(n).ok_or_else(|| shape(path, format!("expected an integer, found {n}"))),
        other => Err(shape(path, format!("expected an integer, found {}", kind(other)))),
    }
}

fn kind(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "a boolean",
        Value::Number(_) => "a number",
        Value::String(_) => "a string",
        Value::Array(_) => "an array",
        Value::Object(_) => "an object",
    }
}

fn array<'a>(v: &'a Value, path: &str) -> Result<&'a [Value], ParseError> {
    v.as_array()
        .map(Vec::as_slice)
        .ok_or_else(|| shape(path, format!("expected an array, found {}", kind(v))))
}

fn vector(v: &Value, path: &str) -> Result<Vec<BigInt>, ParseError> {
    array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, x)| integer(x, &format!("{path}[{i}]")))
        .collect()
}

fn rows(v: &Value, path: &str) -> Result<Vec<Vec<BigInt>>, ParseError> {
    let rows: Vec<Vec<BigInt>> = array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, r)| vector(r, &format!("{path}[{i}]")))
        .collect::<Result<_, _>>()?;
    if let Some(first) = rows.first() {
        if let Some(i) = rows.iter().position(|r| r.len() != first.len()) {
            return Err(shape(
                format!("{path}[{i}]"),
                format!("row has {} entries, row 0 has {}", rows[i].len(), first.len()),
            ));
        }
    }
    Ok(rows)
}

fn int_matrix(rows: &[Vec<BigInt>], cols_if_empty: usize) -> IntMatrix {
    let cols = rows.first().map_or(cols_if_empty, Vec::len);
    IntMatrix::from_rows(cols, rows).expect("rows were checked to be rectangular")
}

pub fn parse(text: &str) -> Result<DiagramDocument, ParseError> {
    let value: Value = serde_json::from_str(text).map_err(|e| ParseError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    from_value(&value)
}

pub fn from_value(value: &Value) -> Result<DiagramDocument, ParseError> {
    let obj = value
        .as_object()
        .ok_or_else(|| shape("$", format!("expected an object, found {}", kind(value))))?;
    if let Some(key) = obj
        .keys()
        .find(|k| !["levels", "matrices", "tail", "metadata"].contains(&k.as_str()))
    {
        return Err(shape(key.clone(), "unknown field"));
    }
    let levels_value = obj.get("levels").ok_or_else(|| shape("levels", "missing field"))?;
    let levels = array(levels_value, "levels")?
        .iter()
        .enumerate()
        .map(|(i, l)| vector(l, &format!("levels[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;
    let matrices = match obj.get("matrices") {
        None => Vec::new(),
        Some(v) => array(v, "matrices")?
            .iter()
            .enumerate()
            .map(|(i, m)| rows(m, &format!("matrices[{i}]")))
            .collect::<Result<Vec<_>, _>>()?,
    };
    let tail = match obj.get("tail") {
        None | Some(Value::Null) => None,
        Some(t) => {
            let t_obj = t
                .as_object()
                .ok_or_else(|| shape("tail", format!("expected an object, found {}", kind(t))))?;
            if let Some(key) = t_obj.keys().find(|k| !["matrix", "slack"].contains(&k.as_str())) {
                return Err(shape(format!("tail.{key}"), "unknown field"));
            }
            let matrix = rows(
                t_obj.get("matrix").ok_or_else(|| shape("tail.matrix", "missing field"))?,
                "tail.matrix",
            )?;
            let slack = match t_obj.get("slack") {
                Some(s) => vector(s, "tail.slack")?,
                None => vec![BigInt::from(0); matrix.len()],
            };
            Some(TailDocument { matrix, slack })
        }
    };
    let metadata = match obj.get("metadata") {
        None | Some(Value::Null) => None,
        Some(Value::Object(m)) => Some(m.clone()),
        Some(other) => return Err(shape("metadata", format!("expected an object, found {}", kind(other)))),
    };
    Ok(DiagramDocument {
        levels,
        matrices,
        tail,
        metadata,
    })
}

/// Parses and validates in one step.
pub fn parse_diagram(text: &str) -> Result<(DiagramDocument, BratteliDiagram), ParseError> {
    let doc = parse(text)?;
    let d = doc.to_diagram()?;
    Ok((doc, d))
}

fn locate(e: DiagramError) -> ParseError {
    let path = match &e {
        DiagramError::NoLevels => "levels".to_string(),
        DiagramError::EmptyLevel { level } => format!("levels[{}]", level - 1),
        DiagramError::NonPositiveSize { level, summand, .. } => format!("levels[{}][{}]", level - 1, summand - 1),
        DiagramError::SizeOverflowAtEdge { level, summand, .. } => {
            format!("matrices[{}][{}]", level - 2, summand - 1)
        }
        DiagramError::SlackLength { .. } => "tail.slack".into(),
        DiagramError::NegativeSlack { index, .. } => format!("tail.slack[{}]", index - 1),
        DiagramError::ZeroTailRow { row } => format!("tail.matrix[{}]", row - 1),
        DiagramError::ShapeMismatch { what, .. } if what.starts_with("tail") => "tail.matrix".into(),
        _ => "matrices".into(),
    };
    ParseError::Invalid { path, source: e }
}

impl DiagramDocument {
    pub fn to_diagram(&self) -> Result<BratteliDiagram, ParseError> {
        let levels = self
            .levels
            .iter()
            .enumerate()
            .map(|(i, sizes)| LevelProfile::new(sizes.clone(), i + 1).map_err(locate))
            .collect::<Result<Vec<_>, _>>()?;
        let matrices = self
            .matrices
            .iter()
            .enumerate()
            .map(|(i, rows)| {
                let cols = levels.get(i).map_or(0, LevelProfile::len);
                MultiplicityMatrix::new(int_matrix(rows, cols)).map_err(|e| match e {
                    DiagramError::NegativeMultiplicity { row, col, .. } => ParseError::Invalid {
                        path: format!("matrices[{i}][{}][{}]", row - 1, col - 1),
                        source: e,
                    },
                    other => locate(other),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let tail = match &self.tail {
            None => None,
            Some(t) => {
                let cols = levels.last().map_or(0, LevelProfile::len);
                let matrix = MultiplicityMatrix::new(int_matrix(&t.matrix, cols)).map_err(|e| match e {
                    DiagramError::NegativeMultiplicity { row, col, .. } => ParseError::Invalid {
                        path: format!("tail.matrix[{}][{}]", row - 1, col - 1),
                        source: e,
                    },
                    other => locate(other),
                })?;
                Some(AffineTail::new(matrix, t.slack.clone()).map_err(locate)?)
            }
        };
        BratteliDiagram::new(levels, matrices, tail).map_err(locate)
    }

    pub fn from_diagram(d: &BratteliDiagram) -> Self {
        DiagramDocument {
            levels: d.prefix_levels().iter().map(|l| l.sizes().to_vec()).collect(),
            matrices: d.prefix_matrices().iter().map(|m| m.matrix().to_rows()).collect(),
            tail: d.tail().map(|t| TailDocument {
                matrix: t.matrix().matrix().to_rows(),
                slack: t.slack().to_vec(),
            }),
            metadata: None,
        }
    }

    pub fn to_value(&self) -> Value {
        let mut obj = Map::new();
        obj.insert("levels".into(), rows_value(&self.levels));
        obj.insert(
            "matrices".into(),
            Value::Array(self.matrices.iter().map(|m| rows_value(m)).collect()),
        );
        if let Some(t) = &self.tail {
            let mut tail = Map::new();
            tail.insert("matrix".into(), rows_value(&t.matrix));
            tail.insert("slack".into(), vector_value(&t.slack));
            obj.insert("tail".into(), Value::Object(tail));
        }
        if let Some(m) = &self.metadata {
            obj.insert("metadata".into(), Value::Object(m.clone()));
        }
        Value::Object(obj)
    }

    /// Compact canonical text: keys sorted, no whitespace.
    pub fn canonical(&self) -> String {
        serde_json::to_string(&self.to_value()).expect("values always serialize")
    }

    pub fn serialize(&self) -> String {
        serde_json::to_string_pretty(&self.to_value()).expect("values always serialize")
    }

    /// `sha256:` followed by the hex digest of [`Self::canonical`].
    pub fn digest(&self) -> String {
        format!("sha256:{}", hex::encode(Sha256::digest(self.canonical().as_bytes())))
    }
}
