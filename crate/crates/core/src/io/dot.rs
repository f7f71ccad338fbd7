//! Graphviz rendering of a diagram or of its degree-`m` truncation.

use std::fmt::Write;

use crate::diagram::BratteliDiagram;
use crate::truncation::{degree_indicator, TruncationError};

/// One node per `(level, summand)`, named `n{level}_{summand}` and labelled
/// with its size, or with its degree-`m` indicator when `degree` is given;
/// one edge per nonzero multiplicity, labelled with the multiplicity. A tail
/// is unrolled until `budget` levels are drawn.
pub fn export_dot(d: &BratteliDiagram, degree: Option<u64>, budget: usize) -> Result<String, TruncationError> {
    if degree == Some(0) {
        return Err(TruncationError::ZeroDegree);
    }
    let levels = match d.tail() {
        Some(_) => budget.max(d.prefix_len()),
        None => d.prefix_len(),
    };
    let mat = d.materialize(levels);
    let mut out = String::new();
    let title = match degree {
        Some(m) => format!("bratteli_degree_{m}"),
        None => "bratteli".to_string(),
    };
    writeln!(out, "digraph {title} {{").unwrap();
    writeln!(out, "  rankdir=TB;").unwrap();
    writeln!(out, "  node [shape=circle];").unwrap();
    for (k, profile) in mat.levels.iter().enumerate() {
        let level = k + 1;
        write!(out, "  {{ rank=same;").unwrap();
        for (i, size) in profile.sizes().iter().enumerate() {
            let label = match degree {
                Some(m) => degree_indicator(m, size).to_string(),
                None => size.to_string(),
            };
            write!(out, " n{level}_{} [label=\"{label}\"];", i + 1).unwrap();
        }
        writeln!(out, " }}").unwrap();
    }
    for (k, phi) in mat.matrices.iter().enumerate() {
        let m = phi.matrix();
        for j in 0..m.cols() {
            for i in 0..m.rows() {
                let mult = m.get(i, j);
                if mult.sign() != num_bigint::Sign::NoSign {
                    writeln!(out, "  n{}_{} -> n{}_{} [label=\"{mult}\"];", k + 1, j + 1, k + 2, i + 1).unwrap();
                }
            }
        }
    }
    if d.tail().is_some() {
        writeln!(out, "  // the tail continues past level {}", mat.len()).unwrap();
    }
    out.push_str("}\n");
    Ok(out)
}
