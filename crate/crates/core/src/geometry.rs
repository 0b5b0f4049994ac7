//! Packing numbers, epsilon-components, Hausdorff distance and Minkowski
//! content estimates on finite approximations of attractors.
//!
//! Packing uses closed balls: two centers are compatible only when their
//! distance exceeds `2 * delta`. The comparison carries a relative slack of
//! [`SEPARATION_RTOL`] so that centers sitting exactly `2 * delta` apart in
//! exact arithmetic are never accepted because of round-off.

use std::collections::{HashMap, HashSet};

use crate::error::{check_positive, invalid, Error, Result};
use crate::ifs::CylinderWord;
use crate::measure::MeasurableSet;
use crate::model::CodedModel;
use crate::symbolic::SymbolicSystem;

/// Relative slack applied to every distance threshold.
pub const SEPARATION_RTOL: f64 = 1e-9;

/// Distance descriptor of a point set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Metric {
    Euclidean,
    MaxNorm,
    /// Prefix ultrametric in both coordinates of a symbolic space.
    FullSymbolic { n: u32, m: u32 },
    /// Prefix ultrametric in x, `m`-adic value distance in y.
    HalfSymbolic { n: u32, m: u32 },
}

impl Metric {
    pub fn name(&self) -> &'static str {
        match self {
            Metric::Euclidean => "euclidean",
            Metric::MaxNorm => "max",
            Metric::FullSymbolic { .. } => "full-symbolic",
            Metric::HalfSymbolic { .. } => "half-symbolic",
        }
    }

    pub fn is_real(&self) -> bool {
        matches!(self, Metric::Euclidean | Metric::MaxNorm)
    }

    /// Distance between two real vectors. Symbolic descriptors have no
    /// real-vector meaning and fall back to Euclidean.
    pub fn real_distance(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::MaxNorm => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max),
            _ => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
        }
    }

    /// Combines per-axis gaps into a distance.
    pub fn combine_gaps(&self, gaps: impl Iterator<Item = f64>) -> f64 {
        match self {
            Metric::MaxNorm => gaps.fold(0.0, f64::max),
            _ => gaps.map(|g| g * g).sum::<f64>().sqrt(),
        }
    }
}

/// Largest distance at which two packing centers still conflict.
pub fn packing_threshold(delta: f64) -> f64 {
    2.0 * delta * (1.0 + SEPARATION_RTOL)
}

/// `base^-level`, the scale of a prefix ultrametric at a given agreement.
pub fn level_scale(base: u32, level: usize) -> f64 {
    (base as f64).powi(-(level as i32))
}

/// Smallest level `a <= cap` with `base^-a <= threshold`, or `cap`.
pub(crate) fn level_for(base: u32, threshold: f64, cap: usize) -> usize {
    (0..cap)
        .find(|&a| level_scale(base, a) <= threshold)
        .unwrap_or(cap)
}

/// A finite metric space indexed by `0..len()`.
pub trait PointSet: Sync {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn distance(&self, i: usize, j: usize) -> f64;

    /// A lookup structure answering "is there a stored center within
    /// `2 delta` of point p" with the same predicate as [`PointSet::distance`].
    fn center_index(&self, delta: f64) -> Box<dyn CenterIndex + '_>;
}

pub trait CenterIndex {
    fn conflicts(&self, p: usize) -> bool;
    fn insert(&mut self, p: usize);
}

/// Representative points of an attractor, one per word of rank `depth`, in
/// lexicographic word order.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
    depth: usize,
    alphabet: usize,
    metric: Metric,
}

impl PointCloud {
    pub(crate) fn from_raw(dim: usize, coords: Vec<f64>, depth: usize, alphabet: usize, metric: Metric) -> Self {
        PointCloud {
            dim,
            coords,
            depth,
            alphabet,
            metric,
        }
    }

    /// A plain point list (depth 0, no coding).
    pub fn from_points(points: &[Vec<f64>], metric: Metric) -> Result<Self> {
        const OP: &str = "PointCloud::from_points";
        let dim = points.first().ok_or(Error::Empty { op: OP, param: "points" })?.len();
        if dim == 0 || points.iter().any(|p| p.len() != dim) {
            return Err(invalid(OP, "points", "inconsistent dimensions"));
        }
        if matches!(metric, Metric::FullSymbolic { .. } | Metric::HalfSymbolic { .. }) {
            return Err(invalid(OP, "metric", "real points need a real metric"));
        }
        Ok(PointCloud {
            dim,
            coords: points.concat(),
            depth: 0,
            alphabet: points.len(),
            metric,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    /// The word whose representative is point `i`.
    pub fn source_word(&self, i: usize) -> CylinderWord {
        CylinderWord::from_index(i, self.alphabet, self.depth)
    }

    /// Applies a coordinatewise map to every point.
    pub fn map_points(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> PointCloud {
        let coords: Vec<f64> = self.points().flat_map(f).collect();
        PointCloud {
            dim: coords.len() / self.len().max(1),
            coords,
            ..self.clone()
        }
    }
}

impl PointSet for PointCloud {
    fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    fn distance(&self, i: usize, j: usize) -> f64 {
        self.metric.real_distance(self.point(i), self.point(j))
    }

    fn center_index(&self, delta: f64) -> Box<dyn CenterIndex + '_> {
        Box::new(GridIndex::new(self, packing_threshold(delta)))
    }
}

/// Uniform hash grid with cell side equal to the conflict threshold, so
/// conflicting centers always lie in adjacent cells.
struct GridIndex<'a> {
    cloud: &'a PointCloud,
    threshold: f64,
    cells: HashMap<u64, Vec<usize>>,
    offsets: Vec<Vec<i64>>,
}

impl<'a> GridIndex<'a> {
    fn new(cloud: &'a PointCloud, threshold: f64) -> Self {
        let mut offsets: Vec<Vec<i64>> = vec![Vec::new()];
        for _ in 0..cloud.dim {
            offsets = offsets
                .into_iter()
                .flat_map(|o| {
                    (-1..=1).map(move |d| {
                        let mut next = o.clone();
                        next.push(d);
                        next
                    })
                })
                .collect();
        }
        GridIndex {
            cloud,
            threshold,
            cells: HashMap::new(),
            offsets,
        }
    }

    fn cell_of(&self, p: usize) -> Vec<i64> {
        self.cloud
            .point(p)
            .iter()
            .map(|x| (x / self.threshold).floor() as i64)
            .collect()
    }

    fn key(cell: impl Iterator<Item = i64>) -> u64 {
        // FNV-1a over the coordinates; collisions only merge buckets
        cell.fold(0xcbf2_9ce4_8422_2325u64, |h, c| {
            (h ^ c as u64).wrapping_mul(0x0100_0000_01b3)
        })
    }
}

impl CenterIndex for GridIndex<'_> {
    fn conflicts(&self, p: usize) -> bool {
        let cell = self.cell_of(p);
        self.offsets.iter().any(|off| {
            let key = Self::key(cell.iter().zip(off).map(|(c, o)| c + o));
            self.cells.get(&key).is_some_and(|bucket| {
                bucket
                    .iter()
                    .any(|&c| self.cloud.distance(p, c) <= self.threshold)
            })
        })
    }

    fn insert(&mut self, p: usize) {
        let key = Self::key(self.cell_of(p).into_iter());
        self.cells.entry(key).or_default().push(p);
    }
}

/// A maximal delta-packing selected by a greedy scan.
#[derive(Debug, Clone, PartialEq)]
pub struct PackingResult {
    pub delta: f64,
    pub count: usize,
    pub centers: Vec<usize>,
}

/// Greedy maximal packing over all points in index order.
pub fn greedy_packing(set: &dyn PointSet, delta: f64) -> Result<PackingResult> {
    let all: Vec<usize> = (0..set.len()).collect();
    greedy_packing_subset(set, &all, delta)
}

/// Greedy maximal packing over the given points, scanned in the given
/// order. A point is selected iff it is more than `2 delta` from every
/// previously selected center.
pub fn greedy_packing_subset(set: &dyn PointSet, indices: &[usize], delta: f64) -> Result<PackingResult> {
    const OP: &str = "greedy_packing";
    check_positive(OP, "delta", delta)?;
    if indices.is_empty() {
        return Err(Error::Empty { op: OP, param: "cloud" });
    }
    let mut index = set.center_index(delta);
    let mut centers = Vec::new();
    for &p in indices {
        if !index.conflicts(p) {
            index.insert(p);
            centers.push(p);
        }
    }
    Ok(PackingResult {
        delta,
        count: centers.len(),
        centers,
    })
}

/// The same greedy scan with pairwise distance checks only. Quadratic;
/// intended as a cross-check for the indexed scan.
pub fn greedy_packing_bruteforce(set: &dyn PointSet, indices: &[usize], delta: f64) -> Result<PackingResult> {
    check_positive("greedy_packing", "delta", delta)?;
    let threshold = packing_threshold(delta);
    let mut centers: Vec<usize> = Vec::new();
    for &p in indices {
        if centers.iter().all(|&c| set.distance(p, c) > threshold) {
            centers.push(p);
        }
    }
    Ok(PackingResult {
        delta,
        count: centers.len(),
        centers,
    })
}

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }

    /// Class labels numbered by first appearance.
    pub fn labels(&mut self) -> Vec<usize> {
        let mut seen: HashMap<usize, usize> = HashMap::new();
        (0..self.parent.len())
            .map(|i| {
                let root = self.find(i);
                let next = seen.len();
                *seen.entry(root).or_insert(next)
            })
            .collect()
    }
}

/// The cells (rank-`depth` cylinders) of a coded model, with the geometry
/// needed to measure distances between them.
#[derive(Debug, Clone)]
pub enum CellSet {
    /// Axis-aligned boxes containing each cylinder, flattened.
    Boxes {
        dim: usize,
        metric: Metric,
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    Symbolic {
        system: SymbolicSystem,
        depth: usize,
    },
}

impl CellSet {
    pub fn len(&self) -> usize {
        match self {
            CellSet::Boxes { dim, lo, .. } => lo.len() / dim,
            CellSet::Symbolic { system, depth } => system.len().pow(*depth as u32),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Minimum distance between the sets contained in cells `i` and `j`
    /// (a lower bound; exact for boxes that are the cylinders' hulls).
    pub fn cell_distance(&self, i: usize, j: usize) -> f64 {
        match self {
            CellSet::Boxes { dim, metric, lo, hi } => {
                let (a, b) = (i * dim, j * dim);
                metric.combine_gaps((0..*dim).map(|t| {
                    (lo[b + t] - hi[a + t]).max(lo[a + t] - hi[b + t]).max(0.0)
                }))
            }
            CellSet::Symbolic { system, depth } => system.cell_distance(*depth, i, j),
        }
    }

    /// Component label of every cell: cells joined by a chain of cells at
    /// distance `<= epsilon`.
    pub fn chain_classes(&self, epsilon: f64) -> Vec<usize> {
        let threshold = epsilon * (1.0 + SEPARATION_RTOL);
        let mut uf = UnionFind::new(self.len());
        match self {
            CellSet::Boxes { dim, lo, hi, .. } => {
                let n = self.len();
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_by(|&a, &b| lo[a * dim].total_cmp(&lo[b * dim]).then(a.cmp(&b)));
                for (pos, &i) in order.iter().enumerate() {
                    let reach = hi[i * dim] + threshold;
                    for &j in &order[pos + 1..] {
                        if lo[j * dim] > reach {
                            break;
                        }
                        if self.cell_distance(i, j) <= threshold {
                            uf.union(i, j);
                        }
                    }
                }
            }
            CellSet::Symbolic { system, depth } => {
                for (a, b) in system.chain_edges(*depth, threshold) {
                    uf.union(a, b);
                }
            }
        }
        uf.labels()
    }
}

/// A partition of the rank-`depth` words into epsilon-components.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentPartition {
    pub epsilon: f64,
    pub depth: usize,
    /// Each class as a minimal union of cylinders.
    pub classes: Vec<MeasurableSet>,
    /// Component id of every rank-`depth` word, by lexicographic index.
    pub class_of: Vec<usize>,
}

impl ComponentPartition {
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }
}

/// Epsilon-components of a coded model, resolved at the given rank.
pub fn epsilon_components(
    model: &dyn CodedModel,
    epsilon: f64,
    depth: usize,
    budget: u64,
) -> Result<ComponentPartition> {
    const OP: &str = "epsilon_components";
    check_positive(OP, "epsilon", epsilon)?;
    let diameter = model.max_cell_diameter(depth);
    if diameter > epsilon / 4.0 {
        return Err(Error::DepthTooShallow {
            op: OP,
            depth,
            scale: epsilon,
            diameter,
        });
    }
    let cells = model.cells(depth, budget)?;
    let class_of = cells.chain_classes(epsilon);
    let count = class_of.iter().max().map_or(0, |m| m + 1);
    let alphabet = model.alphabet_len();
    let mut members: Vec<Vec<CylinderWord>> = vec![Vec::new(); count];
    for (i, &c) in class_of.iter().enumerate() {
        members[c].push(CylinderWord::from_index(i, alphabet, depth));
    }
    let classes = members
        .into_iter()
        .map(|words| MeasurableSet::new(words).map(|set| set.coarsened(alphabet)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ComponentPartition {
        epsilon,
        depth,
        classes,
        class_of,
    })
}

/// Hausdorff distance between two finite sets under a distance function.
pub fn hausdorff_distance_by<P>(a: &[P], b: &[P], dist: impl Fn(&P, &P) -> f64) -> Result<f64> {
    const OP: &str = "hausdorff_distance";
    if a.is_empty() {
        return Err(Error::Empty { op: OP, param: "A" });
    }
    if b.is_empty() {
        return Err(Error::Empty { op: OP, param: "B" });
    }
    let directed = |from: &[P], to: &[P]| {
        from.iter()
            .map(|x| to.iter().map(|y| dist(x, y)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    Ok(directed(a, b).max(directed(b, a)))
}

/// Hausdorff distance between real point lists.
pub fn hausdorff_distance(a: &[Vec<f64>], b: &[Vec<f64>], metric: Metric) -> Result<f64> {
    hausdorff_distance_by(a, b, |x, y| metric.real_distance(x, y))
}

/// Grid estimate of `L^n({x : d(x, A) < delta}) / delta^n` over the box
/// `[-delta, 1 + delta]^n`.
pub fn minkowski_content_estimate(cloud: &PointCloud, delta: f64, grid_step: f64) -> Result<f64> {
    const OP: &str = "minkowski_content_estimate";
    check_positive(OP, "delta", delta)?;
    check_positive(OP, "grid_step", grid_step)?;
    if grid_step > delta / 8.0 * (1.0 + SEPARATION_RTOL) {
        return Err(invalid(OP, "grid_step", format!("{grid_step} exceeds delta/8")));
    }
    if cloud.len() == 0 {
        return Err(Error::Empty { op: OP, param: "cloud" });
    }
    let n = cloud.dim();
    let per_axis = ((1.0 + 2.0 * delta) / grid_step).ceil() as i64;
    let center = |idx: i64| -delta + (idx as f64 + 0.5) * grid_step;
    let mut marked: HashSet<u64> = HashSet::new();
    let mut cell = vec![0i64; n];
    let mut coords = vec![0.0; n];
    for p in cloud.points() {
        let ranges: Vec<(i64, i64)> = p
            .iter()
            .map(|&x| {
                let lo = (x / grid_step - 0.5).floor() as i64;
                let hi = ((x + 2.0 * delta) / grid_step - 0.5).ceil() as i64;
                (lo.max(0), hi.min(per_axis - 1))
            })
            .collect();
        if ranges.iter().any(|(lo, hi)| lo > hi) {
            continue;
        }
        for (c, r) in cell.iter_mut().zip(&ranges) {
            *c = r.0;
        }
        'walk: loop {
            for (x, &c) in coords.iter_mut().zip(&cell) {
                *x = center(c);
            }
            if cloud.metric().real_distance(&coords, p) < delta {
                let linear = cell.iter().fold(0u64, |acc, &c| acc * per_axis as u64 + c as u64);
                marked.insert(linear);
            }
            for axis in (0..n).rev() {
                if cell[axis] < ranges[axis].1 {
                    cell[axis] += 1;
                    continue 'walk;
                }
                cell[axis] = ranges[axis].0;
            }
            break;
        }
    }
    Ok(marked.len() as f64 * grid_step.powi(n as i32) / delta.powi(n as i32))
}
