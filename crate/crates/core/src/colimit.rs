//! Dimensions of inductive limits of finite-dimensional rational vector
//! spaces.
//!
//! For a chain `V_1 → V_2 → …` the image of `V_k` in the limit has dimension
//! `r_k = lim_N rank(V_k → V_N)`, these images are nested, and the limit has
//! dimension `sup_k r_k`. Once the chain is periodic with period matrix `C`,
//! that supremum is the eventual rank of `C`.

use std::fmt;

use serde::Serialize;

use crate::diagram::BratteliDiagram;
use crate::linalg::{self, image_through, Subspace};
use crate::truncation::{self, TruncatedSystem};

/// Dimension of a limit, exact or only known approximately.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Dimension {
    Exact(usize),
    /// No tail: the value is the rank of the image of the first level at the
    /// last level, which is all a finite prefix shows.
    LowerBound(usize),
    /// A tail exists but its truncation pattern did not cycle within the
    /// level budget; carries the same first-level rank as `LowerBound`.
    BudgetExceeded(usize),
}

impl Dimension {
    pub fn value(&self) -> usize {
        match *self {
            Dimension::Exact(v) | Dimension::LowerBound(v) | Dimension::BudgetExceeded(v) => v,
        }
    }

    pub fn exact(&self) -> Option<usize> {
        match *self {
            Dimension::Exact(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Dimension::Exact(_))
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dimension::Exact(v) => write!(f, "{v}"),
            Dimension::LowerBound(v) => write!(f, ">= {v} (prefix only)"),
            Dimension::BudgetExceeded(v) => write!(f, "? (budget exceeded, first-level rank {v})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevelRank {
    pub level: usize,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ColimitResult {
    pub dimension: Dimension,
    pub stabilized_at: Option<usize>,
    pub per_level_ranks: Vec<LevelRank>,
}

/// Applies `c` to `s` enough times to land in the eventual image of `c`.
fn stable_image(c: &linalg::IntMatrix, mut s: Subspace) -> Subspace {
    for _ in 0..c.rows() {
        if s.dim() == 0 {
            break;
        }
        s = image_through(c, &s).expect("period matrix is square on the cycle space");
    }
    s
}

pub fn colimit_dimension(sys: &TruncatedSystem) -> ColimitResult {
    match sys.cycle {
        Some(cycle) => {
            let (start, period) = (cycle.start, cycle.period);
            let end = start + period;
            let c = sys.composite(start, end);
            let dimension = linalg::eventual_rank(&c).expect("period matrix is square");
            let per_level_ranks = (1..end)
                .map(|k| {
                    // push the image of level k to the next level in phase with `start`
                    let target = if k <= start { start } else { end };
                    let image = Subspace::column_space(&sys.composite(k, target));
                    LevelRank {
                        level: k,
                        rank: stable_image(&c, image).dim(),
                    }
                })
                .collect();
            ColimitResult {
                dimension: Dimension::Exact(dimension),
                stabilized_at: Some(start),
                per_level_ranks,
            }
        }
        None => {
            let last = sys.levels();
            let per_level_ranks: Vec<LevelRank> = (1..=last)
                .map(|k| LevelRank {
                    level: k,
                    rank: sys.composite(k, last).rank(),
                })
                .collect();
            let first = per_level_ranks[0].rank;
            ColimitResult {
                dimension: if sys.budget_exceeded {
                    Dimension::BudgetExceeded(first)
                } else {
                    Dimension::LowerBound(first)
                },
                stabilized_at: None,
                per_level_ranks,
            }
        }
    }
}

/// `dim K_0(A) ⊗ Q`: the limit of the untruncated system.
pub fn k0_rational_dimension(d: &BratteliDiagram, budget: usize) -> ColimitResult {
    colimit_dimension(&truncation::untruncated_system(d, budget))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DegreeResult {
    pub m: u64,
    /// Even degrees are answered without computation.
    pub even_shortcut: bool,
    pub result: ColimitResult,
}

/// Dimension of the degree-`m` group; even degrees vanish outright.
pub fn fm_dimension(d: &BratteliDiagram, m: u64, budget: usize) -> DegreeResult {
    if m.is_multiple_of(2) {
        return DegreeResult {
            m,
            even_shortcut: true,
            result: ColimitResult {
                dimension: Dimension::Exact(0),
                stabilized_at: None,
                per_level_ranks: Vec::new(),
            },
        };
    }
    let sys = truncation::build_system(d, m, budget).expect("odd degree");
    DegreeResult {
        m,
        even_shortcut: false,
        result: colimit_dimension(&sys),
    }
}

/// `fm_dimension` for every degree `1..=max_m`.
pub fn fm_profile(d: &BratteliDiagram, max_m: u64, budget: usize) -> Vec<DegreeResult> {
    (1..=max_m).map(|m| fm_dimension(d, m, budget)).collect()
}
