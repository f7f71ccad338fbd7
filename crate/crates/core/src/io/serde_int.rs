//! Big integers as plain JSON numbers (never strings), relying on
//! `serde_json`'s arbitrary-precision numbers.

use num_bigint::BigInt;
use serde::ser::{Error as _, SerializeSeq};
use serde::{Serialize, Serializer};
use serde_json::{Number, Value};

use crate::linalg::IntMatrix;

pub fn number(x: &BigInt) -> Number {
    x.to_string().parse().expect("decimal integers are valid JSON numbers")
}

/// Reads an integer literal; rejects fractions and exponents.
pub fn from_number(n: &Number) -> Option<BigInt> {
    let text = n.to_string();
    if text.contains(['.', 'e', 'E']) {
        return None;
    }
    text.parse().ok()
}

pub fn vector_value(v: &[BigInt]) -> Value {
    Value::Array(v.iter().map(|x| Value::Number(number(x))).collect())
}

pub fn rows_value(rows: &[Vec<BigInt>]) -> Value {
    Value::Array(rows.iter().map(|r| vector_value(r)).collect())
}

pub fn matrix_value(m: &IntMatrix) -> Value {
    rows_value(&m.to_rows())
}

pub fn serialize<S: Serializer>(x: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    x.to_string()
        .parse::<Number>()
        .map_err(S::Error::custom)?
        .serialize(s)
}

pub fn serialize_vec<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
    vector_value(v).serialize(s)
}

pub fn serialize_matrix<S: Serializer>(m: &IntMatrix, s: S) -> Result<S::Ok, S::Error> {
    matrix_value(m).serialize(s)
}

pub fn serialize_matrices<S: Serializer>(ms: &[IntMatrix], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(ms.len()))?;
    for m in ms {
        seq.serialize_element(&matrix_value(m))?;
    }
    seq.end()
}
