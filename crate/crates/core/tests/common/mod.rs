//! Generators and independent oracles shared by the integration tests.
#![allow(dead_code)]

pub mod props;

use afk_core::{AffineTail, BratteliDiagram, LevelProfile, MultiplicityMatrix};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailKind {
    None,
    /// `q' = Φq`, no zero rows.
    Stationary,
    /// Random slack in `0..=2`.
    Affine,
    /// At least one zero row fed only by slack.
    Orphans,
    Any,
}

#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub max_summands: usize,
    pub max_prefix: usize,
    pub max_entry: i64,
    pub max_start_size: i64,
    pub tail: TailKind,
    pub injective: bool,
}

impl Default for Shape {
    fn default() -> Self {
        Shape {
            max_summands: 4,
            max_prefix: 5,
            max_entry: 3,
            max_start_size: 4,
            tail: TailKind::Any,
            injective: false,
        }
    }
}

fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize, max_entry: i64) -> Vec<Vec<i64>> {
    (0..rows)
        .map(|_| {
            (0..cols)
                .map(|_| if rng.gen_bool(0.45) { 0 } else { rng.gen_range(1..=max_entry) })
                .collect()
        })
        .collect()
}

fn fill_zero_columns(rng: &mut impl Rng, m: &mut [Vec<i64>]) {
    let cols = m[0].len();
    for j in 0..cols {
        if m.iter().all(|r| r[j] == 0) {
            let i = rng.gen_range(0..m.len());
            m[i][j] = 1;
        }
    }
}

fn to_big(rows: &[Vec<i64>]) -> MultiplicityMatrix {
    let refs: Vec<&[i64]> = rows.iter().map(Vec::as_slice).collect();
    MultiplicityMatrix::from_i64_rows(&refs).unwrap()
}

fn apply(rows: &[Vec<i64>], v: &[BigInt]) -> Vec<BigInt> {
    rows.iter()
        .map(|r| r.iter().zip(v).map(|(&a, x)| BigInt::from(a) * x).sum())
        .collect()
}

pub fn random_diagram(rng: &mut impl Rng, shape: &Shape) -> BratteliDiagram {
    let prefix = rng.gen_range(1..=shape.max_prefix);
    let first: Vec<BigInt> = (0..rng.gen_range(1..=shape.max_summands))
        .map(|_| BigInt::from(rng.gen_range(1..=shape.max_start_size)))
        .collect();
    let mut levels = vec![first];
    let mut matrices = Vec::new();
    for _ in 1..prefix {
        let src = levels.last().unwrap().clone();
        let n = rng.gen_range(1..=shape.max_summands);
        let mut phi = random_matrix(rng, n, src.len(), shape.max_entry);
        if shape.injective {
            fill_zero_columns(rng, &mut phi);
        }
        let next: Vec<BigInt> = apply(&phi, &src)
            .into_iter()
            .map(|x| {
                let extra = if x.is_zero() { rng.gen_range(1..=3) } else { rng.gen_range(0..=2) };
                x + extra
            })
            .collect();
        matrices.push(to_big(&phi));
        levels.push(next);
    }
    let n = levels.last().unwrap().len();
    let kind = match shape.tail {
        TailKind::Any => match rng.gen_range(0..4) {
            0 => TailKind::None,
            1 => TailKind::Stationary,
            2 => TailKind::Affine,
            _ => TailKind::Orphans,
        },
        k => k,
    };
    let tail = match kind {
        TailKind::None => None,
        _ => {
            let mut phi = random_matrix(rng, n, n, shape.max_entry);
            let mut slack: Vec<i64> = match kind {
                TailKind::Stationary => vec![0; n],
                _ => (0..n).map(|_| if rng.gen_bool(0.5) { 0 } else { rng.gen_range(1..=2) }).collect(),
            };
            if kind == TailKind::Orphans {
                let i = rng.gen_range(0..n);
                phi[i] = vec![0; n];
                slack[i] = rng.gen_range(1..=2);
            }
            if shape.injective {
                fill_zero_columns(rng, &mut phi);
            }
            for (row, s) in phi.iter_mut().zip(slack.iter_mut()) {
                if row.iter().all(|&x| x == 0) && *s == 0 {
                    if kind == TailKind::Stationary {
                        let j = rng.gen_range(0..n);
                        row[j] = 1;
                    } else {
                        *s = 1;
                    }
                }
            }
            Some(AffineTail::new(to_big(&phi), slack.into_iter().map(BigInt::from).collect()).unwrap())
        }
    };
    let levels = levels
        .into_iter()
        .enumerate()
        .map(|(k, l)| LevelProfile::new(l, k + 1).unwrap())
        .collect();
    BratteliDiagram::new(levels, matrices, tail).unwrap()
}

/// Rank by plain Gaussian elimination over `Q` (with division), kept
/// deliberately different from the fraction-free routine under test.
pub fn naive_rank(rows: &[Vec<BigInt>]) -> usize {
    let mut m: Vec<Vec<BigRational>> = rows
        .iter()
        .map(|r| r.iter().map(|x| BigRational::from_integer(x.clone())).collect())
        .collect();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&r| !m[r][c].is_zero()) else { continue };
        m.swap(rank, p);
        let pivot = m[rank][c].clone();
        for x in m[rank].iter_mut() {
            *x = &*x / &pivot;
        }
        for r in 0..m.len() {
            if r != rank && !m[r][c].is_zero() {
                let f = m[r][c].clone();
                let pivot_row = m[rank].clone();
                for (x, p) in m[r].iter_mut().zip(&pivot_row) {
                    *x -= &f * p;
                }
            }
        }
        rank += 1;
    }
    rank
}

pub fn naive_mul(a: &[Vec<BigInt>], b: &[Vec<BigInt>], b_cols: usize) -> Vec<Vec<BigInt>> {
    a.iter()
        .map(|row| {
            (0..b_cols)
                .map(|j| row.iter().zip(b).map(|(x, brow)| x * &brow[j]).sum())
                .collect()
        })
        .collect()
}

/// Level sizes and truncated maps of the first `levels` levels, unrolled
/// directly from the raw diagram data.
fn unroll(d: &BratteliDiagram, levels: usize) -> (Vec<Vec<BigInt>>, Vec<Vec<Vec<BigInt>>>) {
    let mut sizes: Vec<Vec<BigInt>> = d.prefix_levels().iter().map(|l| l.sizes().to_vec()).collect();
    let mut maps: Vec<Vec<Vec<BigInt>>> = d.prefix_matrices().iter().map(|m| m.matrix().to_rows()).collect();
    let tail = d.tail().expect("oracle needs a tail");
    let phi = tail.matrix().matrix().to_rows();
    while sizes.len() < levels {
        let q = sizes.last().unwrap();
        let next: Vec<BigInt> = phi
            .iter()
            .zip(tail.slack())
            .map(|(row, s)| row.iter().zip(q).map(|(a, x)| a * x).sum::<BigInt>() + s)
            .collect();
        sizes.push(next);
        maps.push(phi.clone());
    }
    (sizes, maps)
}

/// Brute-force limit dimension in odd degree `m`: unroll far past any
/// possible pre-period and period of the truncation pattern, then take the
/// largest rank of any early level's image at the last level.
pub fn oracle_fm_dimension(d: &BratteliDiagram, m: u64) -> usize {
    let l = d.prefix_len();
    let n = d.eventual_width();
    let t = m.div_ceil(2) as usize;
    // clamped size states are vectors in {1..t}^n
    let states = t.pow(n as u32);
    let early = l + states;
    let last = (early + (n + 1) * states).max(l + 3 * n);
    let (sizes, maps) = unroll(d, last);
    let keep = |k: usize| -> Vec<usize> {
        (0..sizes[k].len())
            .filter(|&i| &sizes[k][i] * 2u32 > BigInt::from(m))
            .collect()
    };
    let kept: Vec<Vec<usize>> = (0..last).map(keep).collect();
    // suffix products: composite from level k to `last` (0-based levels)
    let mut best = 0;
    let width = kept[last - 1].len();
    let mut acc: Vec<Vec<BigInt>> = (0..width)
        .map(|i| (0..width).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect();
    for k in (0..last - 1).rev() {
        let map: Vec<Vec<BigInt>> = kept[k + 1]
            .iter()
            .map(|&i| kept[k].iter().map(|&j| maps[k][i][j].clone()).collect())
            .collect();
        acc = naive_mul(&acc, &map, kept[k].len());
        if k < early {
            best = best.max(if kept[k].is_empty() || width == 0 { 0 } else { naive_rank(&acc) });
        }
    }
    best
}
