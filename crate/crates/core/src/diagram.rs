//! Bratteli diagrams: levels, multiplicity matrices and affine-periodic tails.
//!
//! Level and summand indices exposed by this module are 1-based, matching the
//! `(p, i)` node notation used throughout the crate's reports. Internally
//! everything is 0-based.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::linalg::{self, IntMatrix, LinalgError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiagramError {
    #[error("a diagram needs at least one level")]
    NoLevels,
    #[error("level {level} has no summands")]
    EmptyLevel { level: usize },
    #[error("level {level}, summand {summand}: sizes must be positive, found {size}")]
    NonPositiveSize { level: usize, summand: usize, size: BigInt },
    #[error("multiplicities must be non-negative, found {value} at row {row}, column {col}")]
    NegativeMultiplicity { row: usize, col: usize, value: BigInt },
    #[error("{what}: expected a {expected_rows}x{expected_cols} matrix, found {found_rows}x{found_cols}")]
    ShapeMismatch {
        what: String,
        expected_rows: usize,
        expected_cols: usize,
        found_rows: usize,
        found_cols: usize,
    },
    #[error("level {level}, summand {summand}: incoming size {incoming} exceeds the summand size {size}")]
    SizeOverflowAtEdge {
        level: usize,
        summand: usize,
        incoming: BigInt,
        size: BigInt,
    },
    #[error("tail slack has length {found}, expected {expected}")]
    SlackLength { expected: usize, found: usize },
    #[error("tail slack must be non-negative, found {value} at position {index}")]
    NegativeSlack { index: usize, value: BigInt },
    #[error("tail row {row} is zero and has zero slack, so its summand would have size 0")]
    ZeroTailRow { row: usize },
    #[error("level {level} is out of range (diagram has {available} materialisable levels)")]
    LevelOutOfRange { level: usize, available: usize },
    #[error("summand {summand} is out of range at level {level}")]
    SummandOutOfRange { level: usize, summand: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// The tuple `p̄ = (p_1, …, p_n)` of matrix-block sizes of `M_{p_1} ⊕ … ⊕ M_{p_n}`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LevelProfile(Vec<BigInt>);

impl LevelProfile {
    /// `level` is only used to annotate errors.
    pub fn new(sizes: Vec<BigInt>, level: usize) -> Result<Self, DiagramError> {
        if sizes.is_empty() {
            return Err(DiagramError::EmptyLevel { level });
        }
        if let Some((i, s)) = sizes.iter().enumerate().find(|(_, s)| !s.is_positive()) {
            return Err(DiagramError::NonPositiveSize {
                level,
                summand: i + 1,
                size: s.clone(),
            });
        }
        Ok(Self(sizes))
    }

    pub fn from_u64s(sizes: &[u64]) -> Result<Self, DiagramError> {
        Self::new(sizes.iter().map(|&s| BigInt::from(s)).collect(), 1)
    }

    pub fn sizes(&self) -> &[BigInt] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn size(&self, summand: usize) -> &BigInt {
        &self.0[summand]
    }

    pub fn min_size(&self) -> &BigInt {
        self.0.iter().min().expect("profiles are nonempty")
    }

    /// Indices (0-based) of the summands of the given size.
    pub fn summands_of_size(&self, size: &BigInt) -> Vec<usize> {
        (0..self.len()).filter(|&i| &self.0[i] == size).collect()
    }
}

impl fmt::Debug for LevelProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, ")")
    }
}

/// Non-negative integer matrix `Φ = [ℓ_{i,j}]`, rows indexed by target
/// summands and columns by source summands.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiplicityMatrix(IntMatrix);

impl MultiplicityMatrix {
    pub fn new(matrix: IntMatrix) -> Result<Self, DiagramError> {
        if !linalg::all_non_negative(matrix.entries()) {
            let cols = matrix.cols();
            let (k, v) = matrix
                .entries()
                .iter()
                .enumerate()
                .find(|(_, v)| v.is_negative())
                .expect("a negative entry exists");
            return Err(DiagramError::NegativeMultiplicity {
                row: k / cols + 1,
                col: k % cols + 1,
                value: v.clone(),
            });
        }
        Ok(Self(matrix))
    }

    pub fn from_i64_rows(rows: &[&[i64]]) -> Result<Self, DiagramError> {
        Self::new(IntMatrix::from_i64_rows(rows))
    }

    pub fn identity(n: usize) -> Self {
        Self(IntMatrix::identity(n))
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> IntMatrix {
        self.0
    }

    pub fn get(&self, target: usize, source: usize) -> &BigInt {
        self.0.get(target, source)
    }

    /// Source summands feeding `target`, with multiplicities.
    pub fn incoming(&self, target: usize) -> Vec<(usize, BigInt)> {
        self.0
            .row(target)
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(j, v)| (j, v.clone()))
            .collect()
    }

    /// The source of `target` when its row is a unit vector `e_j`.
    pub fn copy_source(&self, target: usize) -> Option<usize> {
        match self.incoming(target).as_slice() {
            [(j, v)] if v.is_one() => Some(*j),
            _ => None,
        }
    }
}

/// Affine-periodic continuation: every level after the prefix is obtained by
/// `q' = Φ·q + s` with the same connecting matrix `Φ`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AffineTail {
    matrix: MultiplicityMatrix,
    slack: Vec<BigInt>,
}

impl AffineTail {
    pub fn new(matrix: MultiplicityMatrix, slack: Vec<BigInt>) -> Result<Self, DiagramError> {
        let (rows, cols) = matrix.matrix().shape();
        if rows != cols {
            return Err(DiagramError::ShapeMismatch {
                what: "tail matrix".into(),
                expected_rows: cols,
                expected_cols: cols,
                found_rows: rows,
                found_cols: cols,
            });
        }
        if slack.len() != rows {
            return Err(DiagramError::SlackLength {
                expected: rows,
                found: slack.len(),
            });
        }
        if let Some((i, v)) = slack.iter().enumerate().find(|(_, v)| v.is_negative()) {
            return Err(DiagramError::NegativeSlack {
                index: i + 1,
                value: v.clone(),
            });
        }
        if let Some(&r) = matrix
            .matrix()
            .zero_rows()
            .iter()
            .find(|&&r| slack[r].is_zero())
        {
            return Err(DiagramError::ZeroTailRow { row: r + 1 });
        }
        Ok(Self { matrix, slack })
    }

    pub fn stationary(matrix: MultiplicityMatrix) -> Result<Self, DiagramError> {
        let n = matrix.matrix().rows();
        Self::new(matrix, vec![BigInt::zero(); n])
    }

    pub fn matrix(&self) -> &MultiplicityMatrix {
        &self.matrix
    }

    pub fn slack(&self) -> &[BigInt] {
        &self.slack
    }

    pub fn dim(&self) -> usize {
        self.slack.len()
    }

    pub fn step(&self, sizes: &[BigInt]) -> Vec<BigInt> {
        let mut next = self
            .matrix
            .matrix()
            .mul_vec(sizes)
            .expect("tail dimension matches level size");
        for (x, s) in next.iter_mut().zip(&self.slack) {
            *x += s;
        }
        next
    }

    /// One step of the size recursion with every entry clamped at `cap`.
    ///
    /// Clamping commutes with the recursion because each target size is at
    /// least every source size feeding it with positive multiplicity.
    fn clamped_step(&self, clamped: &[BigInt], cap: &BigInt) -> Vec<BigInt> {
        self.step(clamped)
            .into_iter()
            .map(|x| if &x > cap { cap.clone() } else { x })
            .collect()
    }

    /// Rows that copy a single source summand verbatim: the row is a unit
    /// vector `e_j` and the slack is zero. Returns `(target, source)` pairs.
    pub fn copy_edges(&self) -> Vec<(usize, usize)> {
        (0..self.dim())
            .filter(|&r| self.slack[r].is_zero())
            .filter_map(|r| self.matrix.copy_source(r).map(|j| (r, j)))
            .collect()
    }
}

/// A node `(p, i)` of a diagram. Both indices are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Node {
    pub level: usize,
    pub summand: usize,
    #[serde(serialize_with = "crate::io::serde_int::serialize")]
    pub size: BigInt,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EdgeReport {
    /// 1-based index of the source level of this edge.
    pub level: usize,
    /// Per target summand: `Φ·p̄ = q̄` in that row.
    pub unital_rows: Vec<bool>,
    pub unital: bool,
    /// 1-based source summands with no outgoing edge.
    pub zero_columns: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub levels: usize,
    pub summands_per_level: Vec<usize>,
    pub edges: Vec<EdgeReport>,
    pub has_tail: bool,
    pub tail_unital_rows: Option<Vec<bool>>,
    pub tail_zero_columns: Option<Vec<usize>>,
    /// No zero column anywhere, prefix or tail: all connecting maps injective.
    pub injective: bool,
}

/// Checks shape and the size bound `Φ·p̄ ≤ q̄` on every prefix edge. Tail
/// edges satisfy the bound by construction, so only the tail invariants
/// already enforced by [`AffineTail::new`] and its attachment are checked.
pub fn validate(
    levels: &[LevelProfile],
    matrices: &[MultiplicityMatrix],
    tail: Option<&AffineTail>,
) -> Result<ValidationReport, DiagramError> {
    if levels.is_empty() {
        return Err(DiagramError::NoLevels);
    }
    if matrices.len() + 1 != levels.len() {
        return Err(DiagramError::ShapeMismatch {
            what: "number of connecting matrices".into(),
            expected_rows: levels.len() - 1,
            expected_cols: 1,
            found_rows: matrices.len(),
            found_cols: 1,
        });
    }
    let mut edges = Vec::with_capacity(matrices.len());
    let mut injective = true;
    for (k, phi) in matrices.iter().enumerate() {
        let (src, dst) = (&levels[k], &levels[k + 1]);
        let m = phi.matrix();
        if m.shape() != (dst.len(), src.len()) {
            return Err(DiagramError::ShapeMismatch {
                what: format!("matrix {} (level {} to {})", k + 1, k + 1, k + 2),
                expected_rows: dst.len(),
                expected_cols: src.len(),
                found_rows: m.rows(),
                found_cols: m.cols(),
            });
        }
        let incoming = m.mul_vec(src.sizes())?;
        let mut unital_rows = Vec::with_capacity(dst.len());
        for (i, (inc, size)) in incoming.iter().zip(dst.sizes()).enumerate() {
            if inc > size {
                return Err(DiagramError::SizeOverflowAtEdge {
                    level: k + 2,
                    summand: i + 1,
                    incoming: inc.clone(),
                    size: size.clone(),
                });
            }
            unital_rows.push(inc == size);
        }
        let zero_columns: Vec<usize> = m.zero_columns().into_iter().map(|c| c + 1).collect();
        injective &= zero_columns.is_empty();
        edges.push(EdgeReport {
            level: k + 1,
            unital: unital_rows.iter().all(|&u| u),
            unital_rows,
            zero_columns,
        });
    }
    let (tail_unital_rows, tail_zero_columns) = match tail {
        Some(t) => {
            let last = levels.last().expect("nonempty");
            if t.dim() != last.len() {
                return Err(DiagramError::ShapeMismatch {
                    what: "tail matrix".into(),
                    expected_rows: last.len(),
                    expected_cols: last.len(),
                    found_rows: t.dim(),
                    found_cols: t.dim(),
                });
            }
            let zero_columns: Vec<usize> =
                t.matrix().matrix().zero_columns().into_iter().map(|c| c + 1).collect();
            injective &= zero_columns.is_empty();
            (
                Some(t.slack().iter().map(Zero::is_zero).collect()),
                Some(zero_columns),
            )
        }
        None => (None, None),
    };
    Ok(ValidationReport {
        levels: levels.len(),
        summands_per_level: levels.iter().map(LevelProfile::len).collect(),
        edges,
        has_tail: tail.is_some(),
        tail_unital_rows,
        tail_zero_columns,
        injective,
    })
}

/// A validated Bratteli diagram: an explicit prefix of levels and connecting
/// matrices, optionally continued forever by an [`AffineTail`] attached to
/// the last prefix level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BratteliDiagram {
    levels: Vec<LevelProfile>,
    matrices: Vec<MultiplicityMatrix>,
    tail: Option<AffineTail>,
    report: ValidationReport,
}

/// The first `levels.len()` levels of a diagram and the matrices between them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Materialized {
    pub levels: Vec<LevelProfile>,
    pub matrices: Vec<MultiplicityMatrix>,
}

impl Materialized {
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }
}

/// Where the clamped size sequence of a tail becomes periodic: the state at
/// level `start` reappears at level `start + period`. Levels are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TailCycle {
    pub start: usize,
    pub period: usize,
}

impl TailCycle {
    /// Last level index (inclusive) needed to see every distinct state.
    pub fn horizon(&self) -> usize {
        self.start + self.period
    }
}

impl BratteliDiagram {
    pub fn new(
        levels: Vec<LevelProfile>,
        matrices: Vec<MultiplicityMatrix>,
        tail: Option<AffineTail>,
    ) -> Result<Self, DiagramError> {
        let report = validate(&levels, &matrices, tail.as_ref())?;
        Ok(Self {
            levels,
            matrices,
            tail,
            report,
        })
    }

    pub fn single_level(profile: LevelProfile) -> Self {
        Self::new(vec![profile], Vec::new(), None).expect("a single level is always valid")
    }

    /// Re-runs validation; always agrees with [`Self::report`].
    pub fn validate(&self) -> Result<ValidationReport, DiagramError> {
        validate(&self.levels, &self.matrices, self.tail.as_ref())
    }

    pub fn report(&self) -> &ValidationReport {
        &self.report
    }

    pub fn is_injective(&self) -> bool {
        self.report.injective
    }

    pub fn prefix_levels(&self) -> &[LevelProfile] {
        &self.levels
    }

    pub fn prefix_matrices(&self) -> &[MultiplicityMatrix] {
        &self.matrices
    }

    pub fn prefix_len(&self) -> usize {
        self.levels.len()
    }

    pub fn tail(&self) -> Option<&AffineTail> {
        self.tail.as_ref()
    }

    pub fn last_prefix_level(&self) -> &LevelProfile {
        self.levels.last().expect("nonempty")
    }

    /// A lone level with no tail is a finite-dimensional algebra, which is
    /// presented equally well by repeating it with identity connecting maps.
    /// All limit computations use that stationary presentation.
    pub fn is_finite_dimensional(&self) -> bool {
        self.tail.is_none() && self.levels.len() == 1
    }

    /// The tail used for limit computations: the explicit tail, or the
    /// identity tail of a finite-dimensional diagram. `None` means the
    /// diagram is an unclosed prefix.
    pub fn effective_tail(&self) -> Option<AffineTail> {
        match &self.tail {
            Some(t) => Some(t.clone()),
            None if self.is_finite_dimensional() => Some(
                AffineTail::stationary(MultiplicityMatrix::identity(self.levels[0].len()))
                    .expect("identity has no zero rows"),
            ),
            None => None,
        }
    }

    /// The diagram with [`Self::effective_tail`] attached.
    pub fn closed(&self) -> BratteliDiagram {
        match (&self.tail, self.effective_tail()) {
            (None, Some(t)) => BratteliDiagram::new(self.levels.clone(), self.matrices.clone(), Some(t))
                .expect("identity tail keeps the diagram valid"),
            _ => self.clone(),
        }
    }

    /// First `levels` levels. Tail levels are generated by the affine
    /// recursion; without a tail the prefix is the whole diagram and the
    /// result is cut there.
    pub fn materialize(&self, levels: usize) -> Materialized {
        let levels = levels.max(1);
        let keep = levels.min(self.levels.len());
        let mut out = Materialized {
            levels: self.levels[..keep].to_vec(),
            matrices: self.matrices[..keep - 1].to_vec(),
        };
        if let Some(tail) = &self.tail {
            while out.levels.len() < levels {
                let next = tail.step(out.levels.last().expect("nonempty").sizes());
                let level = out.levels.len() + 1;
                out.levels
                    .push(LevelProfile::new(next, level).expect("tail sizes stay positive"));
                out.matrices.push(tail.matrix().clone());
            }
        }
        out
    }

    /// Number of levels that exist, `None` when unbounded.
    pub fn available_levels(&self) -> Option<usize> {
        match self.tail {
            Some(_) => None,
            None => Some(self.levels.len()),
        }
    }

    fn check_level(&self, level: usize) -> Result<(), DiagramError> {
        let ok = level >= 1 && self.available_levels().is_none_or(|n| level <= n);
        if ok {
            Ok(())
        } else {
            Err(DiagramError::LevelOutOfRange {
                level,
                available: self.available_levels().unwrap_or(usize::MAX),
            })
        }
    }

    /// `φ_{to,from} = Φ_{to-1} ⋯ Φ_{from}` as a matrix; identity when equal.
    pub fn compose_multiplicities(&self, from: usize, to: usize) -> Result<IntMatrix, DiagramError> {
        self.check_level(from)?;
        self.check_level(to)?;
        if from > to {
            return Err(DiagramError::LevelOutOfRange {
                level: from,
                available: to,
            });
        }
        let mat = self.materialize(to);
        let mut acc = IntMatrix::identity(mat.levels[from - 1].len());
        for phi in &mat.matrices[from - 1..to - 1] {
            acc = linalg::multiply(phi.matrix(), &acc)?;
        }
        Ok(acc)
    }

    pub fn node(&self, level: usize, summand: usize) -> Result<Node, DiagramError> {
        self.check_level(level)?;
        let mat = self.materialize(level);
        let profile = &mat.levels[level - 1];
        if summand == 0 || summand > profile.len() {
            return Err(DiagramError::SummandOutOfRange { level, summand });
        }
        Ok(Node {
            level,
            summand,
            size: profile.size(summand - 1).clone(),
        })
    }

    /// Nodes one level down with positive multiplicity into `node`.
    pub fn predecessors(&self, node: &Node) -> Result<Vec<(Node, BigInt)>, DiagramError> {
        if node.level < 2 {
            return Err(DiagramError::LevelOutOfRange {
                level: node.level,
                available: self.available_levels().unwrap_or(usize::MAX),
            });
        }
        self.check_level(node.level)?;
        let mat = self.materialize(node.level);
        let target = &mat.levels[node.level - 1];
        if node.summand == 0 || node.summand > target.len() {
            return Err(DiagramError::SummandOutOfRange {
                level: node.level,
                summand: node.summand,
            });
        }
        let source = &mat.levels[node.level - 2];
        Ok(mat.matrices[node.level - 2]
            .incoming(node.summand - 1)
            .into_iter()
            .map(|(j, mult)| {
                (
                    Node {
                        level: node.level - 1,
                        summand: j + 1,
                        size: source.size(j).clone(),
                    },
                    mult,
                )
            })
            .collect())
    }

    /// Sizes clamped at `cap` for levels `prefix_len..`, until the clamped
    /// state repeats or `budget` levels have been generated. Clamped states
    /// determine every truncation mask with threshold `≤ cap`, so the
    /// returned cycle is a cycle of all such masks.
    ///
    /// `None` when there is no tail or no repetition within the budget.
    pub fn clamped_cycle(&self, cap: &BigInt, budget: usize) -> Option<TailCycle> {
        let tail = self.tail.as_ref()?;
        let clamp = |v: &[BigInt]| -> Vec<BigInt> {
            v.iter().map(|x| if x > cap { cap.clone() } else { x.clone() }).collect()
        };
        let mut level = self.levels.len();
        let mut state = clamp(self.last_prefix_level().sizes());
        let mut seen: HashMap<Vec<BigInt>, usize> = HashMap::new();
        loop {
            if let Some(&first) = seen.get(&state) {
                return Some(TailCycle {
                    start: first,
                    period: level - first,
                });
            }
            if level >= budget.max(self.levels.len()) {
                return None;
            }
            let next = tail.clamped_step(&state, cap);
            seen.insert(state, level);
            state = next;
            level += 1;
        }
    }

    /// The diagram starting at level `first` (1-based) of this one.
    pub fn drop_levels_before(&self, first: usize) -> Result<BratteliDiagram, DiagramError> {
        self.check_level(first)?;
        if first <= self.levels.len() {
            return BratteliDiagram::new(
                self.levels[first - 1..].to_vec(),
                self.matrices[first - 1..].to_vec(),
                self.tail.clone(),
            );
        }
        let mat = self.materialize(first);
        BratteliDiagram::new(
            vec![mat.levels[first - 1].clone()],
            Vec::new(),
            self.tail.clone(),
        )
    }

    /// Number of summands at every sufficiently late level (the tail
    /// dimension, or the last level's when there is no tail).
    pub fn eventual_width(&self) -> usize {
        self.last_prefix_level().len()
    }
}

/// The two-column diagram with levels `(k, 1 + k(k-1)/2)` used throughout
/// the tests: constant matrix `[[1,0],[1,1]]` and slack `(1,0)`.
#[doc(hidden)]
pub fn two_column_example() -> BratteliDiagram {
    let phi = MultiplicityMatrix::from_i64_rows(&[&[1, 0], &[1, 1]]).unwrap();
    BratteliDiagram::new(
        vec![
            LevelProfile::from_u64s(&[1, 1]).unwrap(),
            LevelProfile::from_u64s(&[2, 2]).unwrap(),
            LevelProfile::from_u64s(&[3, 4]).unwrap(),
        ],
        vec![phi.clone(), phi.clone()],
        Some(AffineTail::new(phi, vec![BigInt::one(), BigInt::zero()]).unwrap()),
    )
    .unwrap()
}

/// `C ⊕ M_2 ⊕ M_3 → C ⊕ M_3 ⊕ M_5 ⊕ M_8`, a single connecting map.
#[doc(hidden)]
pub fn four_by_three_example() -> BratteliDiagram {
    BratteliDiagram::new(
        vec![
            LevelProfile::from_u64s(&[1, 2, 3]).unwrap(),
            LevelProfile::from_u64s(&[1, 3, 5, 8]).unwrap(),
        ],
        vec![MultiplicityMatrix::from_i64_rows(&[&[1, 0, 0], &[1, 1, 0], &[2, 0, 1], &[0, 1, 2]]).unwrap()],
        None,
    )
    .unwrap()
}
