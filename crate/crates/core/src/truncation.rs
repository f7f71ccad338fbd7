//! Degree-`m` truncation of a Bratteli diagram.
//!
//! In odd degree `m`, the summand `M_p` contributes one rational coordinate
//! exactly when `m ≤ 2p − 1`, and the induced linear map between levels is
//! the multiplicity matrix restricted to contributing rows and columns.
//! Non-contributing summands are deleted, not zeroed.

use num_bigint::BigInt;
use serde::Serialize;
use thiserror::Error;

use crate::diagram::{BratteliDiagram, DiagramError, LevelProfile, MultiplicityMatrix, TailCycle};
use crate::linalg::IntMatrix;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TruncationError {
    #[error("degree {0} is even; the rational group vanishes in even degrees")]
    EvenDegree(u64),
    #[error("degree must be at least 1")]
    ZeroDegree,
    #[error(transparent)]
    Diagram(#[from] DiagramError),
}

/// Smallest summand size that survives in odd degree `m`: `(m + 1) / 2`.
pub fn size_threshold(m: u64) -> BigInt {
    BigInt::from(m.div_ceil(2))
}

/// Whether `M_p` contributes a coordinate to the degree-`m` group:
/// `m` odd and `m ≤ 2p − 1`.
pub fn contributes(m: u64, p: &BigInt) -> bool {
    m % 2 == 1 && p * 2u32 > BigInt::from(m)
}

/// `contributes` as a 0/1 indicator.
pub fn degree_indicator(m: u64, p: &BigInt) -> u8 {
    u8::from(contributes(m, p))
}

fn check_degree(m: u64) -> Result<(), TruncationError> {
    match m {
        0 => Err(TruncationError::ZeroDegree),
        m if m % 2 == 0 => Err(TruncationError::EvenDegree(m)),
        _ => Ok(()),
    }
}

pub fn kept_mask(m: u64, profile: &LevelProfile) -> Vec<bool> {
    profile.sizes().iter().map(|p| contributes(m, p)).collect()
}

fn kept_indices(mask: &[bool]) -> Vec<usize> {
    mask.iter()
        .enumerate()
        .filter_map(|(i, &k)| k.then_some(i))
        .collect()
}

/// The degree-`m` map between two levels: `Φ` restricted to the
/// contributing rows of `dst` and columns of `src`, order preserved.
pub fn truncate_map(
    phi: &MultiplicityMatrix,
    src: &LevelProfile,
    dst: &LevelProfile,
    m: u64,
) -> Result<IntMatrix, TruncationError> {
    check_degree(m)?;
    let matrix = phi.matrix();
    if matrix.shape() != (dst.len(), src.len()) {
        return Err(DiagramError::ShapeMismatch {
            what: "multiplicity matrix".into(),
            expected_rows: dst.len(),
            expected_cols: src.len(),
            found_rows: matrix.rows(),
            found_cols: matrix.cols(),
        }
        .into());
    }
    let rows = kept_indices(&kept_mask(m, dst));
    let cols = kept_indices(&kept_mask(m, src));
    Ok(matrix.submatrix(&rows, &cols))
}

/// Per-level contribution masks for one degree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TruncationPattern {
    pub degree: u64,
    pub kept: Vec<Vec<bool>>,
}

/// The chain of rational vector spaces and maps of one degree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TruncatedSystem {
    pub degree: u64,
    pub pattern: TruncationPattern,
    pub dims: Vec<usize>,
    /// `maps[k]` goes from level `k+1` to level `k+2` (1-based levels).
    #[serde(serialize_with = "crate::io::serde_int::serialize_matrices")]
    pub maps: Vec<IntMatrix>,
    /// Where the (mask, matrix) sequence starts repeating; set only when the
    /// diagram has a tail and the repetition was seen within the budget.
    pub cycle: Option<TailCycle>,
    /// The diagram has a tail but no cycle was found within the budget.
    pub budget_exceeded: bool,
}

impl TruncatedSystem {
    pub fn levels(&self) -> usize {
        self.dims.len()
    }

    /// Composite map from level `from` to level `to` (1-based, `from ≤ to`).
    pub fn composite(&self, from: usize, to: usize) -> IntMatrix {
        let mut acc = IntMatrix::identity(self.dims[from - 1]);
        for map in &self.maps[from - 1..to - 1] {
            acc = map.multiply(&acc).expect("consecutive maps compose");
        }
        acc
    }
}

/// Builds the degree-`m` system over the first `budget` levels (at least the
/// prefix, and at least one full tail cycle when one is found).
///
/// Finite-dimensional diagrams are analysed through their stationary
/// presentation (see [`BratteliDiagram::effective_tail`]).
pub fn build_system(d: &BratteliDiagram, m: u64, budget: usize) -> Result<TruncatedSystem, TruncationError> {
    check_degree(m)?;
    let d = d.closed();
    let cycle = d.clamped_cycle(&size_threshold(m), budget);
    let levels = match (d.tail(), cycle) {
        (None, _) => d.prefix_len(),
        (Some(_), Some(c)) => budget.max(d.prefix_len()).max(c.horizon()),
        (Some(_), None) => budget.max(d.prefix_len()),
    };
    let mat = d.materialize(levels);
    let kept: Vec<Vec<bool>> = mat.levels.iter().map(|l| kept_mask(m, l)).collect();
    let dims = kept.iter().map(|k| k.iter().filter(|&&x| x).count()).collect();
    let maps = mat
        .matrices
        .iter()
        .enumerate()
        .map(|(k, phi)| truncate_map(phi, &mat.levels[k], &mat.levels[k + 1], m))
        .collect::<Result<_, _>>()?;
    Ok(TruncatedSystem {
        degree: m,
        pattern: TruncationPattern { degree: m, kept },
        dims,
        maps,
        cycle,
        budget_exceeded: d.tail().is_some() && cycle.is_none(),
    })
}

/// The system with no truncation at all, whose limit is `K_0(A) ⊗ Q`.
pub fn untruncated_system(d: &BratteliDiagram, budget: usize) -> TruncatedSystem {
    build_system(d, 1, budget).expect("degree 1 is odd")
}
