//! K-chains, telescoping and the K-stability verdict.
//!
//! For AF-algebras K-stability, rational K-stability, the absence of nonzero
//! finite-dimensional representations, and the existence of generating nests
//! of arbitrarily large min-dim are all equivalent. An infinite `K`-chain in
//! the diagram produces a quotient `M_K(C)`; conversely, when every chain
//! terminates the diagram can be telescoped to any min-dim.
//!
//! Inside an affine tail `q' = Φq + s` a node of size `K` whose only
//! predecessor also has size `K` must sit in a row of `Φ` equal to a unit
//! vector, with zero slack. Those "copy rows" are the same at every tail
//! level, so infinite chains in a tail are exactly the cycles of the copy
//! graph, and the search below is exact for every diagram with a tail.

use std::collections::VecDeque;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::diagram::{AffineTail, BratteliDiagram, DiagramError, LevelProfile, Materialized, MultiplicityMatrix};
use crate::linalg::{self, IntMatrix};

/// The repeating part of an infinite chain: summand indices (1-based) at
/// the `period` levels following the explicit path, repeated forever.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainCycle {
    pub period: usize,
    pub summands: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KChainWitness {
    #[serde(serialize_with = "crate::io::serde_int::serialize")]
    pub k: BigInt,
    pub start_level: usize,
    /// Summands (1-based) at levels `start_level ..= start_level + len - 1`;
    /// the last entry sits on the level the tail is attached to.
    pub node_path: Vec<usize>,
    pub cycle: ChainCycle,
}

impl KChainWitness {
    /// Level at which the tail takes over (the last level of `node_path`).
    pub fn anchor_level(&self) -> usize {
        self.start_level + self.node_path.len() - 1
    }

    /// Summand on `level`, for any `level ≥ start_level`.
    pub fn summand_at(&self, level: usize) -> Option<usize> {
        if level < self.start_level {
            return None;
        }
        let anchor = self.anchor_level();
        if level <= anchor {
            return Some(self.node_path[level - self.start_level]);
        }
        Some(self.cycle.summands[(level - anchor - 1) % self.cycle.period])
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChainSearch {
    Found(KChainWitness),
    NoneExists,
    /// The diagram is an unclosed prefix; nothing can be certified.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WitnessViolation {
    #[error("level {level}: summand {summand} does not exist")]
    MissingNode { level: usize, summand: usize },
    #[error("level {level}: node has size {size}, expected {k}")]
    WrongSize { level: usize, size: BigInt, k: BigInt },
    #[error("level {level}: no edge from the previous chain node")]
    NotConnected { level: usize },
    #[error("level {level}: edge from the previous chain node has multiplicity {multiplicity}")]
    Multiplicity { level: usize, multiplicity: BigInt },
    #[error("level {level}: node has a predecessor off the chain")]
    ExtraPredecessor { level: usize },
    #[error("witness shape is inconsistent: {0}")]
    Malformed(String),
}

/// Checks the K-chain conditions edge by edge over `periods` full periods of
/// the cycle. Because the tail matrix is the same at every tail level, one
/// period already covers every tail edge the chain uses.
pub fn replay_witness(d: &BratteliDiagram, w: &KChainWitness, periods: usize) -> Result<(), WitnessViolation> {
    if w.node_path.is_empty() || w.cycle.period == 0 || w.cycle.summands.len() != w.cycle.period {
        return Err(WitnessViolation::Malformed("empty path or cycle".into()));
    }
    let d = d.closed();
    if d.tail().is_none() || w.anchor_level() != d.prefix_len() {
        return Err(WitnessViolation::Malformed(
            "the path must end where the tail is attached".into(),
        ));
    }
    let last = w.anchor_level() + periods.max(1) * w.cycle.period;
    let mat = d.materialize(last + 1);
    let mut prev: Option<usize> = None;
    for level in w.start_level..=last + 1 {
        let summand = w.summand_at(level).expect("level is past the start");
        let profile = &mat.levels[level - 1];
        if summand == 0 || summand > profile.len() {
            return Err(WitnessViolation::MissingNode { level, summand });
        }
        let size = profile.size(summand - 1);
        if size != &w.k {
            return Err(WitnessViolation::WrongSize {
                level,
                size: size.clone(),
                k: w.k.clone(),
            });
        }
        if let Some(p) = prev {
            let incoming = mat.matrices[level - 2].incoming(summand - 1);
            let Some((_, mult)) = incoming.iter().find(|(j, _)| *j == p - 1) else {
                return Err(WitnessViolation::NotConnected { level });
            };
            if mult != &BigInt::from(1) {
                return Err(WitnessViolation::Multiplicity {
                    level,
                    multiplicity: mult.clone(),
                });
            }
            if incoming.len() != 1 {
                return Err(WitnessViolation::ExtraPredecessor { level });
            }
        }
        prev = Some(summand);
    }
    Ok(())
}

/// Summands on cycles of the tail's copy graph, each with its successor on
/// the cycle (0-based).
fn copy_cycles(tail: &AffineTail) -> Vec<Vec<usize>> {
    let n = tail.dim();
    let mut pred = vec![None; n];
    for (target, source) in tail.copy_edges() {
        pred[target] = Some(source);
    }
    let mut on_cycle = vec![false; n];
    for j in 0..n {
        let mut cur = pred[j];
        for _ in 0..n {
            match cur {
                Some(c) if c == j => {
                    on_cycle[j] = true;
                    break;
                }
                Some(c) => cur = pred[c],
                None => break,
            }
        }
    }
    let mut cycles = Vec::new();
    let mut done = vec![false; n];
    for j in 0..n {
        if !on_cycle[j] || done[j] {
            continue;
        }
        // walk backwards along pred, then reverse to get forward order
        let mut members = vec![j];
        done[j] = true;
        let mut cur = pred[j].expect("cycle nodes have a copy source");
        while cur != j {
            members.push(cur);
            done[cur] = true;
            cur = pred[cur].expect("cycle nodes have a copy source");
        }
        members.reverse();
        // forward order now ends at j; rotate so it starts at j
        members.rotate_right(1);
        cycles.push(members);
    }
    cycles
}

/// All infinite chains through the tail, one per starting summand on a copy
/// cycle, each extended backwards through the prefix as far as possible.
fn infinite_chains(d: &BratteliDiagram) -> Option<Vec<KChainWitness>> {
    let d = d.closed();
    let tail = d.tail()?;
    let anchor = d.prefix_len();
    let levels = d.prefix_levels();
    let matrices = d.prefix_matrices();
    let mut out = Vec::new();
    for cycle in copy_cycles(tail) {
        let len = cycle.len();
        for pos in 0..len {
            let start = cycle[pos];
            let k = levels[anchor - 1].size(start).clone();
            let summands = (1..=len).map(|t| cycle[(pos + t) % len] + 1).collect();
            let mut path = VecDeque::from([start + 1]);
            let mut level = anchor;
            let mut summand = start;
            while level > 1 {
                let source = matrices[level - 2]
                    .copy_source(summand)
                    .filter(|&j| levels[level - 2].size(j) == &k);
                match source {
                    Some(j) => {
                        level -= 1;
                        summand = j;
                        path.push_front(j + 1);
                    }
                    None => break,
                }
            }
            out.push(KChainWitness {
                k: k.clone(),
                start_level: level,
                node_path: path.into(),
                cycle: ChainCycle { period: len, summands },
            });
        }
    }
    out.sort_by(|a, b| {
        (&a.k, a.start_level, a.node_path[0]).cmp(&(&b.k, b.start_level, b.node_path[0]))
    });
    Some(out)
}

/// Searches for an infinite K-chain of any size. Ties go to the smallest
/// `K`, then the earliest start level, then the lowest summand index.
pub fn find_infinite_k_chain(d: &BratteliDiagram) -> ChainSearch {
    match infinite_chains(d) {
        None => ChainSearch::Inconclusive,
        Some(chains) => chains
            .into_iter()
            .next()
            .map_or(ChainSearch::NoneExists, ChainSearch::Found),
    }
}

fn find_chain_of_size(d: &BratteliDiagram, k: &BigInt) -> Option<KChainWitness> {
    infinite_chains(d)?.into_iter().find(|w| &w.k == k)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum StageAction {
    /// Every level from `first_kept_level` on already has min-dim above the
    /// stage size, so earlier levels are discarded.
    DropLevels { first_kept_level: usize },
    /// Levels `cut_levels` are kept with their stage-size summands projected
    /// away, followed by a tail composed over `tail_gap` original levels.
    Cut { cut_levels: Vec<usize>, tail_gap: usize },
}

/// One stage of telescoping raises min-dim from `size` to at least `size+1`.
/// Level numbers refer to the diagram the stage started from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TelescopeStage {
    #[serde(serialize_with = "crate::io::serde_int::serialize")]
    pub size: BigInt,
    #[serde(flatten)]
    pub action: StageAction,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Telescoped {
    pub diagram: BratteliDiagram,
    pub stages: Vec<TelescopeStage>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TelescopeError {
    #[error("telescoping needs injective connecting maps (no zero columns)")]
    InjectivityRequired,
    #[error("an infinite {}-chain prevents raising min-dim", .0.k)]
    InfiniteChain(Box<KChainWitness>),
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl From<DiagramError> for TelescopeError {
    fn from(e: DiagramError) -> Self {
        TelescopeError::Internal(e.to_string())
    }
}

/// Whether every level has min-dim at least `min`; `None` when the tail's
/// clamped orbit does not close within `budget`.
pub fn min_dim_at_least(d: &BratteliDiagram, min: &BigInt, budget: usize) -> Option<bool> {
    let levels = match d.tail() {
        None => d.prefix_len(),
        Some(_) => d.clamped_cycle(min, budget)?.horizon() - 1,
    };
    let levels = levels.max(d.prefix_len());
    Some(d.materialize(levels).levels.iter().all(|l| l.min_size() >= min))
}

/// Smallest summand size over all levels, when it can be certified.
pub fn min_dim(d: &BratteliDiagram, budget: usize) -> Option<BigInt> {
    let prefix_min = d.prefix_levels().iter().map(|l| l.min_size()).min()?.clone();
    match d.tail() {
        None => Some(prefix_min),
        Some(_) => {
            // clamping above the prefix minimum keeps every size that matters
            let cycle = d.clamped_cycle(&(prefix_min.clone() + 1), budget)?;
            let mat = d.materialize(cycle.horizon() - 1);
            mat.levels.iter().map(|l| l.min_size().clone()).min()
        }
    }
}

/// Produces a diagram of the same algebra whose levels all have min-dim at
/// least `target`, raising min-dim one stage at a time.
pub fn telescope(d: &BratteliDiagram, target: u64, budget: usize) -> Result<Telescoped, TelescopeError> {
    if !d.is_injective() {
        return Err(TelescopeError::InjectivityRequired);
    }
    let target_big = BigInt::from(target);
    let unchanged = || Telescoped {
        diagram: d.clone(),
        stages: Vec::new(),
    };
    if d.tail().is_none() && min_dim_at_least(d, &target_big, budget) == Some(true) {
        return Ok(unchanged());
    }
    let mut cur = d.closed();
    if cur.tail().is_none() {
        return Err(TelescopeError::Inconclusive(
            "the diagram has no tail, so chains at its last level cannot be shown to terminate".into(),
        ));
    }
    // report blocking chains in the input's own level numbering
    if let Some(w) = infinite_chains(&cur)
        .unwrap_or_default()
        .into_iter()
        .find(|w| w.k < target_big)
    {
        return Err(TelescopeError::InfiniteChain(Box::new(w)));
    }
    let mut stages = Vec::new();
    for s in 1..target {
        let s = BigInt::from(s);
        let next = &s + 1;
        match min_dim_at_least(&cur, &next, budget) {
            None => {
                return Err(TelescopeError::Inconclusive(format!(
                    "tail sizes did not become periodic (clamped at {next}) within {budget} levels"
                )))
            }
            Some(true) => continue,
            Some(false) => {}
        }
        let (diagram, stage) = raise_min_dim(&cur, &s, budget)?;
        stages.push(stage);
        cur = diagram;
    }
    if stages.is_empty() {
        return Ok(unchanged());
    }
    if !cur.is_injective() {
        return Err(TelescopeError::Internal("telescoped diagram is not injective".into()));
    }
    Ok(Telescoped { diagram: cur, stages })
}

/// One stage: `d` has min-dim exactly `s`; returns a diagram with min-dim
/// at least `s + 1` presenting the same limit.
fn raise_min_dim(
    d: &BratteliDiagram,
    s: &BigInt,
    budget: usize,
) -> Result<(BratteliDiagram, TelescopeStage), TelescopeError> {
    let cap = s + 1;
    let cycle = d
        .clamped_cycle(&cap, budget)
        .ok_or_else(|| TelescopeError::Inconclusive(format!("no periodic orbit within {budget} levels")))?;
    let horizon = cycle.horizon() - 1;
    let mat = d.materialize(horizon);
    if mat.levels.iter().any(|l| l.min_size() < s) {
        return Err(TelescopeError::Internal(format!("stage {s} started below min-dim {s}")));
    }
    let small: Vec<bool> = mat.levels.iter().map(|l| l.min_size() <= s).collect();

    if !small[cycle.start - 1..].iter().any(|&x| x) {
        let last_small = small
            .iter()
            .rposition(|&x| x)
            .ok_or_else(|| TelescopeError::Internal("stage has nothing to remove".into()))?;
        let first = last_small + 2;
        let diagram = d.drop_levels_before(first)?;
        return Ok((
            diagram,
            TelescopeStage {
                size: s.clone(),
                action: StageAction::DropLevels { first_kept_level: first },
            },
        ));
    }

    if let Some(w) = find_chain_of_size(d, s) {
        return Err(TelescopeError::InfiniteChain(Box::new(w)));
    }
    cut_and_project(d, s, cycle.start, cycle.period)
}

/// The projection construction: keep levels `n_1 < n_2 < …` at which every
/// size-`s` node receives nothing from the previous kept level, delete the
/// size-`s` summands there, and compose the connecting maps in between.
fn cut_and_project(
    d: &BratteliDiagram,
    s: &BigInt,
    cycle_start: usize,
    period: usize,
) -> Result<(BratteliDiagram, TelescopeStage), TelescopeError> {
    let tail = d.tail().expect("caller checked the tail").clone();
    // a terminating s-chain has at most one node per prefix level and then
    // walks the acyclic part of the copy graph
    let chain_bound = d.prefix_len() + tail.dim();
    let gap = period * chain_bound.div_ceil(period);
    let horizon = cycle_start + chain_bound + gap + 1;
    let mat = d.materialize(horizon);

    let chain_start = chain_starts(&mat, s);
    let mut cuts = Vec::new();
    let mut prev = 1;
    while prev < cycle_start || cuts.is_empty() {
        let next = (prev + 1..=horizon - gap)
            .find(|&l| {
                chain_start[l - 1]
                    .iter()
                    .all(|c| c.is_none_or(|start| start > prev))
            })
            .ok_or_else(|| TelescopeError::Internal("s-chains did not terminate within their bound".into()))?;
        cuts.push(next);
        prev = next;
    }
    let last_cut = *cuts.last().expect("at least one cut");

    let kept_at = |level: usize| -> Vec<usize> {
        let p = &mat.levels[level - 1];
        (0..p.len()).filter(|&i| p.size(i) > s).collect()
    };
    let deleted_at = |level: usize| -> Vec<usize> {
        let p = &mat.levels[level - 1];
        (0..p.len()).filter(|&i| p.size(i) == s).collect()
    };
    let composite = |from: usize, to: usize| -> IntMatrix {
        let mut acc = IntMatrix::identity(mat.levels[from - 1].len());
        for phi in &mat.matrices[from - 1..to - 1] {
            acc = linalg::multiply(phi.matrix(), &acc).expect("consecutive levels compose");
        }
        acc
    };
    let check_cut = |from: usize, to: usize, c: &IntMatrix| -> Result<(), TelescopeError> {
        for r in deleted_at(to) {
            if c.row(r).iter().any(|x| !x.is_zero()) {
                return Err(TelescopeError::Internal(format!(
                    "size-{s} summand {} at level {to} is reached from level {from}",
                    r + 1
                )));
            }
        }
        Ok(())
    };

    let mut levels = Vec::with_capacity(cuts.len());
    let mut matrices = Vec::with_capacity(cuts.len().saturating_sub(1));
    let mut from = 1;
    for (j, &cut) in cuts.iter().enumerate() {
        check_cut(from, cut, &composite(from, cut))?;
        let kept = kept_at(cut);
        let sizes = kept.iter().map(|&i| mat.levels[cut - 1].size(i).clone()).collect();
        levels.push(LevelProfile::new(sizes, j + 1)?);
        if j > 0 {
            let c = composite(from, cut);
            matrices.push(MultiplicityMatrix::new(c.submatrix(&kept, &kept_at(from)))?);
        }
        from = cut;
    }

    let tail_power = tail.matrix().matrix().power(gap).expect("tail is square");
    check_cut(last_cut, last_cut + gap, &tail_power)?;
    let kept = kept_at(last_cut);
    let deleted = deleted_at(last_cut);
    if kept != kept_at(last_cut + gap) {
        return Err(TelescopeError::Internal("kept summands are not periodic".into()));
    }
    let mut accumulated = vec![BigInt::zero(); tail.dim()];
    for _ in 0..gap {
        accumulated = tail.step(&accumulated);
    }
    let deleted_sizes = vec![s.clone(); deleted.len()];
    let from_deleted = tail_power.submatrix(&kept, &deleted).mul_vec(&deleted_sizes).expect("shapes agree");
    let slack: Vec<BigInt> = kept
        .iter()
        .zip(from_deleted)
        .map(|(&i, x)| x + &accumulated[i])
        .collect();
    let new_tail = AffineTail::new(MultiplicityMatrix::new(tail_power.submatrix(&kept, &kept))?, slack)?;

    let expected: Vec<BigInt> = kept.iter().map(|&i| mat.levels[last_cut + gap - 1].size(i).clone()).collect();
    if new_tail.step(levels.last().expect("nonempty").sizes()) != expected {
        return Err(TelescopeError::Internal("composed tail does not reproduce the sizes".into()));
    }
    let diagram = BratteliDiagram::new(levels, matrices, Some(new_tail))?;
    Ok((
        diagram,
        TelescopeStage {
            size: s.clone(),
            action: StageAction::Cut {
                cut_levels: cuts,
                tail_gap: gap,
            },
        },
    ))
}

/// For every size-`s` node, the level at which its backward `s`-chain
/// starts; `None` for larger nodes.
fn chain_starts(mat: &Materialized, s: &BigInt) -> Vec<Vec<Option<usize>>> {
    let mut out: Vec<Vec<Option<usize>>> = Vec::with_capacity(mat.len());
    for (k, profile) in mat.levels.iter().enumerate() {
        let level = k + 1;
        let row = (0..profile.len())
            .map(|i| {
                if profile.size(i) != s {
                    return None;
                }
                let inherited = (k > 0)
                    .then(|| mat.matrices[k - 1].copy_source(i))
                    .flatten()
                    .filter(|&j| mat.levels[k - 1].size(j) == s)
                    .and_then(|j| out[k - 1][j]);
                Some(inherited.unwrap_or(level))
            })
            .collect();
        out.push(row);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KStabilityStatus {
    KStable,
    NotKStable,
    InconclusiveAtBudget,
}

/// Telescoping to min-dim `m` succeeded with these stages.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub m: u64,
    pub stages: Vec<TelescopeStage>,
    /// Sizes at the first level of the telescoped diagram.
    #[serde(serialize_with = "crate::io::serde_int::serialize_vec")]
    pub first_level: Vec<BigInt>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KStabilityVerdict {
    pub status: KStabilityStatus,
    pub witness: Option<KChainWitness>,
    pub certificates: Vec<Certificate>,
    /// The tail's copy graph is acyclic, so every telescoped diagram is
    /// chain-free as well and certificates exist for every `m`.
    pub extends_to_all_m: bool,
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassifyError {
    #[error("classification needs injective connecting maps (no zero columns)")]
    InjectivityRequired,
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub const DEFAULT_MAX_STAGE: u64 = 8;

/// Decides K-stability. `max_stage` is the largest min-dim for which an
/// explicit telescoping certificate is produced.
pub fn classify(d: &BratteliDiagram, budget: usize, max_stage: u64) -> Result<KStabilityVerdict, ClassifyError> {
    if !d.is_injective() {
        return Err(ClassifyError::InjectivityRequired);
    }
    match find_infinite_k_chain(d) {
        ChainSearch::Found(w) => Ok(KStabilityVerdict {
            status: KStabilityStatus::NotKStable,
            reason: Some(format!(
                "infinite {}-chain: the algebra has a quotient isomorphic to M_{}(C)",
                w.k, w.k
            )),
            witness: Some(w),
            certificates: Vec::new(),
            extends_to_all_m: false,
        }),
        ChainSearch::Inconclusive => Ok(inconclusive(
            "the diagram has no tail: chains alive at the last level cannot be shown to terminate".into(),
        )),
        ChainSearch::NoneExists => {
            let mut certificates = Vec::new();
            for m in 1..=max_stage.max(1) {
                match telescope(d, m, budget) {
                    Ok(t) => certificates.push(Certificate {
                        m,
                        first_level: t.diagram.prefix_levels()[0].sizes().to_vec(),
                        stages: t.stages,
                    }),
                    Err(TelescopeError::Inconclusive(reason)) => return Ok(inconclusive(reason)),
                    Err(e) => return Err(ClassifyError::Internal(e.to_string())),
                }
            }
            Ok(KStabilityVerdict {
                status: KStabilityStatus::KStable,
                witness: None,
                certificates,
                extends_to_all_m: true,
                reason: Some("no infinite K-chain: the tail's copy graph is acyclic".into()),
            })
        }
    }
}

fn inconclusive(reason: String) -> KStabilityVerdict {
    KStabilityVerdict {
        status: KStabilityStatus::InconclusiveAtBudget,
        witness: None,
        certificates: Vec::new(),
        extends_to_all_m: false,
        reason: Some(reason),
    }
}
