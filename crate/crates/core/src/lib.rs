//! Rational nonstable K-theory of AF-algebras, computed from Bratteli
//! diagrams.
//!
//! A diagram is an explicit prefix of levels `M_{p_1} ⊕ … ⊕ M_{p_n}` and
//! multiplicity matrices, optionally continued forever by an affine tail
//! `q' = Φq + s`. From it the crate computes
//!
//! * the dimensions of the rational groups `F_m(A) = π_m(Û(A)) ⊗ Q`, as
//!   limits of truncated multiplicity-matrix systems ([`colimit`]),
//! * `dim K_0(A) ⊗ Q`,
//! * whether `A` is K-stable, with either a chain witness for a finite
//!   dimensional quotient or telescoping certificates ([`kstability`]).
//!
//! All arithmetic is exact.

pub mod colimit;
pub mod diagram;
pub mod io;
pub mod kstability;
pub mod linalg;
pub mod truncation;

pub use colimit::{colimit_dimension, fm_dimension, fm_profile, k0_rational_dimension, ColimitResult, Dimension};
pub use diagram::{AffineTail, BratteliDiagram, DiagramError, LevelProfile, MultiplicityMatrix, Node};
pub use io::{export_dot, parse, parse_diagram, DiagramDocument, ParseError};
pub use kstability::{
    classify, find_infinite_k_chain, replay_witness, telescope, ChainSearch, KChainWitness, KStabilityStatus,
    KStabilityVerdict, TelescopeError,
};
pub use linalg::{eventual_rank, rank, IntMatrix, LinalgError, Subspace};
pub use truncation::{build_system, contributes, truncate_map, TruncatedSystem, TruncationError};
