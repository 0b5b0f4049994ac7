//! Test instances and brute-force oracles shared by the integration tests.

#![allow(dead_code)]

use minkowski_core::geometry::packing_threshold;
use minkowski_core::{
    CylinderWord, EuclideanIfs, IntervalMap, PointSet, SimilarIFS, Similitude, SpongeSystem, SymbolicSystem,
};
use minkowski_core::symbolic::Flavor;
use rand::Rng;

pub fn frac(ratio: (i64, i64), offset: (i64, i64)) -> IntervalMap {
    IntervalMap::fractions(ratio, offset).unwrap()
}

pub fn cantor() -> SpongeSystem {
    SpongeSystem::from_rows(vec![vec![frac((1, 3), (0, 1))], vec![frac((1, 3), (2, 3))]]).unwrap()
}

/// Three digits on the 2 x 3 grid: coordinate ratios 1/2 and 1/3, one
/// digit per row.
pub fn mcmullen() -> SpongeSystem {
    SpongeSystem::from_rows(vec![
        vec![frac((1, 2), (0, 1)), frac((1, 3), (0, 1))],
        vec![frac((1, 2), (1, 2)), frac((1, 3), (1, 3))],
        vec![frac((1, 2), (0, 1)), frac((1, 3), (2, 3))],
    ])
    .unwrap()
}

/// `{x/3, (x+1)/3, (x+lambda)/3}` with `lambda = sqrt(2)/2`.
pub fn kenyon() -> SimilarIFS {
    let lambda = 2f64.sqrt() / 2.0;
    SimilarIFS::new(
        vec![
            Similitude::scaling(1.0 / 3.0, vec![0.0]),
            Similitude::scaling(1.0 / 3.0, vec![1.0 / 3.0]),
            Similitude::scaling(1.0 / 3.0, vec![lambda / 3.0]),
        ],
        None,
    )
    .unwrap()
}

/// The symbolic counterpart of [`mcmullen`].
pub fn symbolic_full() -> SymbolicSystem {
    SymbolicSystem::new(3, 2, vec![(0, 0), (1, 1), (2, 0)], Flavor::Full).unwrap()
}

pub fn geometric(base: f64, ks: std::ops::RangeInclusive<i32>) -> Vec<f64> {
    ks.map(|k| base.powi(-k)).collect()
}

pub fn cantor_model() -> EuclideanIfs {
    EuclideanIfs::from_sponge(&cantor())
}

/// A sponge satisfying coordinate ordering and neat projection by
/// construction: coordinate `j` uses a grid of `q_j` cells with
/// `q_{j+1} > 2 q_j`; each digit sits in a distinct grid cell with ratio
/// `1/q_j` or `1/(2 q_j)`, and the choice depends only on the prefix, so
/// equal prefixes give equal maps and distinct prefixes disjoint cells.
pub fn random_valid_sponge(rng: &mut impl Rng) -> SpongeSystem {
    let d = rng.random_range(1..=3usize);
    let mut q = vec![rng.random_range(2..=3i64)];
    for j in 1..d {
        let prev = q[j - 1];
        q.push(rng.random_range(2 * prev + 1..=2 * prev + 3));
    }
    let total: i64 = q.iter().product();
    let want = rng.random_range(1..=8usize).min(total as usize);
    let mut cells: Vec<Vec<i64>> = Vec::new();
    while cells.len() < want {
        let cell: Vec<i64> = q.iter().map(|&qj| rng.random_range(0..qj)).collect();
        if !cells.contains(&cell) {
            cells.push(cell);
        }
    }
    // per-prefix choice of (halved ratio, upper placement)
    let salt: u64 = rng.random();
    let choice = |prefix: &[i64]| -> (bool, bool) {
        let h = prefix
            .iter()
            .fold(salt, |h, &c| (h ^ c as u64).wrapping_mul(0x0100_0000_01b3));
        (h & 1 == 1, h & 2 == 2)
    };
    let rows = cells
        .iter()
        .map(|cell| {
            (0..d)
                .map(|j| {
                    let (half, upper) = choice(&cell[..=j]);
                    let c = cell[j];
                    if half {
                        let shift = if upper { 1 } else { 0 };
                        frac((1, 2 * q[j]), (2 * c + shift, 2 * q[j]))
                    } else {
                        frac((1, q[j]), (c, q[j]))
                    }
                })
                .collect()
        })
        .collect();
    SpongeSystem::from_rows(rows).unwrap()
}

/// Maximum size of a family of points pairwise more than `2 delta` apart,
/// by exhaustive branch and bound. At most 64 points.
pub fn exhaustive_max_packing(set: &dyn PointSet, indices: &[usize], delta: f64) -> usize {
    assert!(indices.len() <= 64, "exhaustive oracle limited to 64 points");
    let n = indices.len();
    let threshold = packing_threshold(delta);
    let conflicts: Vec<u64> = (0..n)
        .map(|a| {
            (0..n)
                .filter(|&b| b != a && set.distance(indices[a], indices[b]) <= threshold)
                .fold(0u64, |m, b| m | 1 << b)
        })
        .collect();
    fn best(candidates: u64, conflicts: &[u64], chosen: usize, record: &mut usize) {
        if candidates == 0 {
            *record = (*record).max(chosen);
            return;
        }
        if chosen + candidates.count_ones() as usize <= *record {
            return;
        }
        let v = candidates.trailing_zeros() as usize;
        let rest = candidates & !(1 << v);
        best(rest & !conflicts[v], conflicts, chosen + 1, record);
        best(rest, conflicts, chosen, record);
    }
    let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut record = 0;
    best(all, &conflicts, 0, &mut record);
    record
}

/// Component labels of the rank-`depth` Cantor intervals by pairwise
/// chain search in exact integer units of `3^-depth`. Labels are numbered
/// by first appearance in lexicographic word order.
pub fn cantor_chain_classes(depth: usize, epsilon: f64) -> Vec<usize> {
    let count = 1usize << depth;
    let unit = 3f64.powi(depth as i32);
    let left: Vec<i64> = (0..count)
        .map(|i| {
            CylinderWord::from_index(i, 2, depth)
                .letters()
                .iter()
                .enumerate()
                .map(|(t, &l)| 2 * l as i64 * 3i64.pow((depth - 1 - t) as u32))
                .sum()
        })
        .collect();
    let linked = |a: usize, b: usize| {
        let gap = (left[b] - (left[a] + 1)).max(left[a] - (left[b] + 1)).max(0);
        (gap as f64) <= epsilon * unit
    };
    let mut label = vec![usize::MAX; count];
    let mut next = 0;
    for start in 0..count {
        if label[start] != usize::MAX {
            continue;
        }
        label[start] = next;
        let mut stack = vec![start];
        while let Some(a) = stack.pop() {
            let fresh: Vec<usize> = (0..count).filter(|&b| label[b] == usize::MAX && linked(a, b)).collect();
            for b in fresh {
                label[b] = next;
                stack.push(b);
            }
        }
        next += 1;
    }
    label
}
