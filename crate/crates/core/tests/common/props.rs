//! Property bodies, shared by the standalone property suite and the
//! acceptance harness. Each takes a seed and builds its own random input.

use afk_core::colimit::{fm_profile, Dimension};
use afk_core::io::{parse, DiagramDocument, TailDocument};
use afk_core::kstability::{find_infinite_k_chain, min_dim, replay_witness, telescope, ChainSearch, TelescopeError};
use afk_core::{truncate_map, BratteliDiagram, MultiplicityMatrix};
use num_bigint::BigInt;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{Map, Value};

use super::{random_diagram, Shape, TailKind};

pub const CASES: u32 = 256;
pub const BUDGET: usize = 256;

/// A deterministic runner with `CASES` cases and no failure persistence.
pub fn runner() -> TestRunner {
    let config = Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Truncating a composite equals composing the truncations.
pub fn functoriality(seed: u64) -> Result<(), TestCaseError> {
    let mut r = rng(seed);
    let d = random_diagram(&mut r, &Shape::default());
    let depth = d.prefix_len() + if d.tail().is_some() { 3 } else { 0 };
    let mat = d.materialize(depth);
    let depth = mat.len();
    let mut picks = [r.gen_range(1..=depth), r.gen_range(1..=depth), r.gen_range(1..=depth)];
    picks.sort_unstable();
    let [a, b, c] = picks;
    let m = 2 * r.gen_range(0..5u64) + 1;
    let compose = |from: usize, to: usize| MultiplicityMatrix::new(d.compose_multiplicities(from, to).unwrap()).unwrap();
    let lv = |k: usize| &mat.levels[k - 1];
    let direct = truncate_map(&compose(a, c), lv(a), lv(c), m).unwrap();
    let first = truncate_map(&compose(a, b), lv(a), lv(b), m).unwrap();
    let second = truncate_map(&compose(b, c), lv(b), lv(c), m).unwrap();
    prop_assert_eq!(direct, second.multiply(&first).unwrap(), "levels {} {} {}, m = {}", a, b, c, m);
    let id = truncate_map(&compose(b, b), lv(b), lv(b), m).unwrap();
    prop_assert_eq!(id.clone(), afk_core::IntMatrix::identity(id.rows()));
    Ok(())
}

fn dims(d: &BratteliDiagram) -> Vec<Dimension> {
    fm_profile(d, 9, BUDGET).into_iter().map(|r| r.result.dimension).collect()
}

/// Telescoping either succeeds without changing any rational group, or is
/// blocked by a genuine infinite chain.
pub fn telescope_preserves_profile(seed: u64) -> Result<(), TestCaseError> {
    let mut r = rng(seed);
    let tail = match r.gen_range(0..3) {
        0 => TailKind::Stationary,
        1 => TailKind::Affine,
        _ => TailKind::Orphans,
    };
    let shape = Shape {
        max_summands: 3,
        max_prefix: 4,
        max_entry: 2,
        max_start_size: 3,
        tail,
        injective: true,
    };
    let d = random_diagram(&mut r, &shape);
    let target = r.gen_range(2..=4u64);
    match telescope(&d, target, BUDGET) {
        Ok(t) => {
            let reached = min_dim(&t.diagram, BUDGET).expect("periodic within the budget");
            prop_assert!(reached >= BigInt::from(target), "min-dim {} < {}", reached, target);
            prop_assert!(t.diagram.is_injective());
            let before = dims(&d);
            prop_assert!(before.iter().all(Dimension::is_exact), "{:?}", before);
            prop_assert_eq!(dims(&t.diagram), before, "stages {:?}", t.stages);
        }
        Err(TelescopeError::InfiniteChain(w)) => {
            prop_assert!(w.k < BigInt::from(target));
            prop_assert!(replay_witness(&d, &w, 3).is_ok());
        }
        Err(e) => return Err(TestCaseError::fail(format!("{e} on {d:?}"))),
    }
    Ok(())
}

/// Longest run of chain edges ending at each node, by brute force.
fn longest_chain(d: &BratteliDiagram, levels: usize) -> usize {
    let mat = d.materialize(levels);
    let mut prev: Vec<usize> = vec![1; mat.levels[0].len()];
    let mut best = 1;
    for k in 1..mat.len() {
        let (src, dst) = (&mat.levels[k - 1], &mat.levels[k]);
        let phi = mat.matrices[k - 1].matrix();
        let cur: Vec<usize> = (0..dst.len())
            .map(|i| {
                let nonzero: Vec<usize> = (0..src.len()).filter(|&j| phi.get(i, j) != &BigInt::from(0)).collect();
                match nonzero.as_slice() {
                    [j] if phi.get(i, *j) == &BigInt::from(1) && src.size(*j) == dst.size(i) => prev[*j] + 1,
                    _ => 1,
                }
            })
            .collect();
        best = best.max(*cur.iter().max().unwrap());
        prev = cur;
    }
    best
}

/// Witnesses replay, and when none is reported, chains visibly terminate.
pub fn witness_soundness(seed: u64) -> Result<(), TestCaseError> {
    let mut r = rng(seed);
    let d = random_diagram(&mut r, &Shape::default());
    match find_infinite_k_chain(&d) {
        ChainSearch::Found(w) => {
            let replay = replay_witness(&d, &w, 3);
            prop_assert!(replay.is_ok(), "{:?}", replay);
            prop_assert_eq!(&w.k, &d.closed().node(w.start_level, w.node_path[0]).unwrap().size);
        }
        ChainSearch::NoneExists => {
            let (l, n) = (d.prefix_len(), d.eventual_width());
            let longest = longest_chain(&d, 2 * l + 2 * n + 2);
            prop_assert!(longest <= l + n, "chain of length {} in {:?}", longest, d);
        }
        ChainSearch::Inconclusive => {
            prop_assert!(d.tail().is_none() && !d.is_finite_dimensional());
        }
    }
    Ok(())
}

fn random_big(r: &mut ChaCha8Rng) -> BigInt {
    match r.gen_range(0..4) {
        0 => BigInt::from(r.gen_range(-5i64..=5)),
        1 => BigInt::from(r.gen::<i64>()),
        _ => {
            let digits: String = (0..r.gen_range(1..60)).map(|_| char::from(b'0' + r.gen_range(0..10))).collect();
            let x: BigInt = digits.parse().unwrap();
            if r.gen_bool(0.2) {
                -x
            } else {
                x
            }
        }
    }
}

fn random_rows(r: &mut ChaCha8Rng, rows: usize, cols: usize) -> Vec<Vec<BigInt>> {
    (0..rows).map(|_| (0..cols).map(|_| random_big(r)).collect()).collect()
}

fn random_text(r: &mut ChaCha8Rng) -> String {
    let alphabet: Vec<char> = "abc xyz\"\\/\n\tΦ⊕é😀".chars().collect();
    (0..r.gen_range(0..20)).map(|_| alphabet[r.gen_range(0..alphabet.len())]).collect()
}

/// `parse ∘ serialize` is the identity on documents, including documents
/// that would fail validation, and validated diagrams survive the trip.
pub fn round_trip(seed: u64) -> Result<(), TestCaseError> {
    let mut r = rng(seed);
    let levels: Vec<Vec<BigInt>> = (0..r.gen_range(1..5))
        .map(|_| (0..r.gen_range(0..4)).map(|_| random_big(&mut r)).collect())
        .collect();
    let matrices = (0..r.gen_range(0..4))
        .map(|_| {
            let (rows, cols) = (r.gen_range(0..4), r.gen_range(1..4));
            random_rows(&mut r, rows, cols)
        })
        .collect();
    let tail = r.gen_bool(0.5).then(|| {
        let n = r.gen_range(1..4);
        TailDocument {
            matrix: random_rows(&mut r, n, n),
            slack: (0..n).map(|_| random_big(&mut r)).collect(),
        }
    });
    let metadata = r.gen_bool(0.5).then(|| {
        let mut m = Map::new();
        m.insert("name".into(), Value::String(random_text(&mut r)));
        if r.gen_bool(0.5) {
            m.insert("notes".into(), Value::String(random_text(&mut r)));
        }
        m
    });
    let doc = DiagramDocument {
        levels,
        matrices,
        tail,
        metadata,
    };
    prop_assert_eq!(parse(&doc.serialize()).unwrap(), doc.clone());
    prop_assert_eq!(parse(&doc.canonical()).unwrap(), doc.clone());
    prop_assert_eq!(parse(&doc.serialize()).unwrap().digest(), doc.digest());

    let d = random_diagram(&mut r, &Shape::default());
    let doc = DiagramDocument::from_diagram(&d);
    let back = parse(&doc.serialize()).unwrap();
    prop_assert_eq!(&back, &doc);
    prop_assert_eq!(back.to_diagram().unwrap(), d);
    Ok(())
}
