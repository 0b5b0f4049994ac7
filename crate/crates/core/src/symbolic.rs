//! Full- and half-symbolic spaces over a digit set `D ⊂ Z × {0..m-1}`.
//!
//! A depth-`K` word stands for the cylinder of its continuations. Point
//! clouds represent each cylinder by the continuation repeating the first
//! digit; that continuation is shared by all points and cancels from every
//! distance, so distances between truncations are computed directly.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use crate::error::{check_budget, invalid, Error, Result};
use crate::geometry::{level_for, level_scale, packing_threshold, CellSet, CenterIndex, Metric, PointSet};
use crate::ifs::CylinderWord;
use crate::model::{Cloud, CodedModel, MAX_RANK};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flavor {
    /// Prefix ultrametrics in both coordinates.
    Full,
    /// Prefix ultrametric in x, `m`-adic value distance in y.
    Half,
}

/// A symbolic space with parameters `(n, m, D)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolicSystem {
    n: u32,
    m: u32,
    digits: Vec<(i64, u32)>,
    flavor: Flavor,
    /// Compact index of each digit's first coordinate.
    x_class: Vec<u16>,
}

impl SymbolicSystem {
    pub fn new(n: u32, m: u32, digits: Vec<(i64, u32)>, flavor: Flavor) -> Result<Self> {
        const OP: &str = "SymbolicSystem::new";
        if m < 2 || m > n {
            return Err(invalid(OP, "m", format!("need 2 <= m <= n, got m={m}, n={n}")));
        }
        if digits.is_empty() {
            return Err(Error::Empty { op: OP, param: "digits" });
        }
        if m > u16::MAX as u32 {
            return Err(invalid(OP, "m", format!("{m} exceeds {}", u16::MAX)));
        }
        if digits.len() > u16::MAX as usize {
            return Err(invalid(OP, "digits", "too many digits"));
        }
        if let Some(d) = digits.iter().find(|d| d.1 >= m) {
            return Err(invalid(OP, "digits", format!("second coordinate {} not below m={m}", d.1)));
        }
        if digits.iter().collect::<HashSet<_>>().len() != digits.len() {
            return Err(invalid(OP, "digits", "repeated digit"));
        }
        let xs: Vec<i64> = digits.iter().map(|d| d.0).collect::<BTreeSet<_>>().into_iter().collect();
        let x_class = digits
            .iter()
            .map(|d| xs.binary_search(&d.0).unwrap_or(0) as u16)
            .collect();
        Ok(SymbolicSystem {
            n,
            m,
            digits,
            flavor,
            x_class,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn digits(&self) -> &[(i64, u32)] {
        &self.digits
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    /// The same digits with another flavor.
    pub fn with_flavor(&self, flavor: Flavor) -> Self {
        SymbolicSystem {
            flavor,
            ..self.clone()
        }
    }

    pub fn point(&self, word: &CylinderWord) -> Result<SymbolicPoint> {
        word.validate(self.len(), "SymbolicSystem::point")?;
        Ok(SymbolicPoint {
            x: word.letters().iter().map(|&l| self.digits[l].0).collect(),
            y: word.letters().iter().map(|&l| self.digits[l].1).collect(),
        })
    }

    fn x_distinct(&self) -> usize {
        self.x_class.iter().collect::<HashSet<_>>().len()
    }

    fn y_range(&self) -> (u32, u32) {
        let ys = self.digits.iter().map(|d| d.1);
        (ys.clone().min().unwrap_or(0), ys.max().unwrap_or(0))
    }

    /// Checks the non-overlapping condition required by the half flavor.
    pub fn require_nonoverlapping(&self) -> Result<()> {
        let check = check_nonoverlapping(&self.with_flavor(Flavor::Half), 2)?;
        match check.witness {
            None => Ok(()),
            Some((first, second)) => Err(Error::NonOverlapping {
                first: first.0,
                second: second.0,
            }),
        }
    }

    /// Minimum distance between points of the rank-`depth` cylinders with
    /// lexicographic indices `i` and `j`. For the half flavor the y-part is
    /// the gap between the hulls of the cylinders' y-projections.
    pub fn cell_distance(&self, depth: usize, i: usize, j: usize) -> f64 {
        let a = CylinderWord::from_index(i, self.len(), depth);
        let b = CylinderWord::from_index(j, self.len(), depth);
        let xa: Vec<u16> = a.letters().iter().map(|&l| self.x_class[l]).collect();
        let xb: Vec<u16> = b.letters().iter().map(|&l| self.x_class[l]).collect();
        let dx = prefix_distance(self.n, &xa, &xb);
        let dy = match self.flavor {
            Flavor::Full => {
                let ya: Vec<u32> = a.letters().iter().map(|&l| self.digits[l].1).collect();
                let yb: Vec<u32> = b.letters().iter().map(|&l| self.digits[l].1).collect();
                prefix_distance(self.m, &ya, &yb)
            }
            Flavor::Half => {
                let (lo_a, hi_a) = self.y_hull(a.letters());
                let (lo_b, hi_b) = self.y_hull(b.letters());
                (lo_b - hi_a).max(lo_a - hi_b).max(0.0)
            }
        };
        dx.max(dy)
    }

    fn y_hull(&self, letters: &[usize]) -> (f64, f64) {
        let m = self.m as f64;
        let base: f64 = letters
            .iter()
            .rev()
            .fold(0.0, |acc, &l| (acc + self.digits[l].1 as f64) / m);
        let (ymin, ymax) = self.y_range();
        let tail = level_scale(self.m, letters.len()) / (m - 1.0);
        (base + ymin as f64 * tail, base + ymax as f64 * tail)
    }

    /// Edges of a graph on rank-`depth` cells whose connected components
    /// are the chains of cells at distance `<= threshold`.
    pub(crate) fn chain_edges(&self, depth: usize, threshold: f64) -> Vec<(usize, usize)> {
        let letters = word_table(self.len(), depth);
        let count = letters.len() / depth.max(1);
        let count = if depth == 0 { 1 } else { count };
        let ax = level_for(self.n, threshold, depth);
        let x_key = |i: usize| -> Vec<u16> {
            letters[i * depth..i * depth + ax]
                .iter()
                .map(|&l| self.x_class[l as usize])
                .collect()
        };
        let mut edges = Vec::new();
        match self.flavor {
            Flavor::Full => {
                let by = level_for(self.m, threshold, depth);
                let mut first: HashMap<Vec<u16>, usize> = HashMap::new();
                for i in 0..count {
                    let mut key = x_key(i);
                    key.extend(
                        letters[i * depth..i * depth + by]
                            .iter()
                            .map(|&l| self.digits[l as usize].1 as u16),
                    );
                    match first.get(&key) {
                        Some(&root) => edges.push((root, i)),
                        None => {
                            first.insert(key, i);
                        }
                    }
                }
            }
            Flavor::Half => {
                let mut groups: HashMap<Vec<u16>, Vec<(f64, f64, usize)>> = HashMap::new();
                for i in 0..count {
                    let word: Vec<usize> = letters[i * depth..(i + 1) * depth]
                        .iter()
                        .map(|&l| l as usize)
                        .collect();
                    let (lo, hi) = self.y_hull(&word);
                    groups.entry(x_key(i)).or_default().push((lo, hi, i));
                }
                for mut group in groups.into_values() {
                    group.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.2.cmp(&b.2)));
                    let (mut reach, mut holder) = (group[0].1, group[0].2);
                    for &(lo, hi, i) in &group[1..] {
                        if lo - reach <= threshold {
                            edges.push((holder, i));
                        }
                        if hi > reach {
                            reach = hi;
                            holder = i;
                        }
                    }
                }
            }
        }
        edges
    }
}

/// Letters of every rank-`depth` word in lexicographic order, flattened.
fn word_table(alphabet: usize, depth: usize) -> Vec<u16> {
    let count = alphabet.pow(depth as u32);
    let mut out = Vec::with_capacity(count * depth);
    for i in 0..count {
        let mut rest = i;
        let start = out.len();
        out.resize(start + depth, 0);
        for t in (0..depth).rev() {
            out[start + t] = (rest % alphabet) as u16;
            rest /= alphabet;
        }
    }
    out
}

fn common_prefix<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    a.iter().zip(b).take_while(|(p, q)| p == q).count()
}

/// `base^-a` for the common prefix length `a`, or 0 for equal strings.
fn prefix_distance<T: PartialEq>(base: u32, a: &[T], b: &[T]) -> f64 {
    let k = common_prefix(a, b);
    if k == a.len() {
        0.0
    } else {
        level_scale(base, k)
    }
}

/// A truncated point of `D^∞`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolicPoint {
    pub x: Vec<i64>,
    pub y: Vec<u32>,
}

impl SymbolicPoint {
    pub fn depth(&self) -> usize {
        self.x.len()
    }
}

fn check_depths(op: &'static str, p: &SymbolicPoint, q: &SymbolicPoint) -> Result<()> {
    if p.x.len() != p.y.len() || q.x.len() != q.y.len() || p.depth() != q.depth() {
        return Err(invalid(op, "q", format!("depth {} differs from {}", q.depth(), p.depth())));
    }
    Ok(())
}

/// `max(n^-a, m^-b)` with `a`, `b` the common prefix lengths of the x- and
/// y-strings; zero for identical truncations.
pub fn metric_full(p: &SymbolicPoint, q: &SymbolicPoint, n: u32, m: u32) -> Result<f64> {
    check_depths("metric_full", p, q)?;
    if p == q {
        return Ok(0.0);
    }
    Ok(prefix_distance(n, &p.x, &q.x).max(prefix_distance(m, &p.y, &q.y)))
}

/// `max(n^-a, |sum (y_i - y'_i) m^-i|)` over the truncations.
pub fn metric_half(p: &SymbolicPoint, q: &SymbolicPoint, n: u32, m: u32) -> Result<f64> {
    check_depths("metric_half", p, q)?;
    let dy = p
        .y
        .iter()
        .zip(&q.y)
        .rev()
        .fold(0.0, |acc, (&a, &b)| (acc + a as f64 - b as f64) / m as f64)
        .abs();
    Ok(prefix_distance(n, &p.x, &q.x).max(dy))
}

/// Outcome of the non-overlapping check.
#[derive(Debug, Clone, PartialEq)]
pub struct NonOverlapCheck {
    pub holds: bool,
    /// Two distinct words of the requested depth whose continuations
    /// collide at half-symbolic distance zero.
    pub witness: Option<(CylinderWord, CylinderWord)>,
}

/// Decides whether distinct points of `D^∞` can sit at half-symbolic
/// distance zero.
///
/// Equal x-strings with equal `m`-adic y-values but distinct y-strings
/// differ first at a digit pair `(a, c)`, `(a, c + 1)` and continue with
/// `(x_i, m - 1)` against `(x_i, 0)`. Both pieces are constant patterns, so
/// the search is exact; `depth` only fixes the witness length.
pub fn check_nonoverlapping(system: &SymbolicSystem, depth: usize) -> Result<NonOverlapCheck> {
    const OP: &str = "check_nonoverlapping";
    if system.flavor() == Flavor::Full {
        return Err(invalid(OP, "system", "the condition applies to the half flavor only"));
    }
    if depth == 0 {
        return Err(invalid(OP, "depth", "must be at least 1"));
    }
    let index: HashMap<(i64, u32), usize> = system
        .digits()
        .iter()
        .enumerate()
        .map(|(i, &d)| (d, i))
        .collect();
    let top = system.m() - 1;
    let carry = system
        .digits()
        .iter()
        .filter(|d| d.1 == 0)
        .filter_map(|d| Some((index[d], *index.get(&(d.0, top))?)))
        .min();
    let branch = system
        .digits()
        .iter()
        .filter_map(|d| Some((index[d], *index.get(&(d.0, d.1 + 1))?)))
        .min();
    let witness = match (branch, carry) {
        (Some((low, high)), Some((zero, full))) => {
            let mut first = vec![low];
            let mut second = vec![high];
            first.extend(std::iter::repeat_n(full, depth - 1));
            second.extend(std::iter::repeat_n(zero, depth - 1));
            Some((CylinderWord(first), CylinderWord(second)))
        }
        _ => None,
    };
    Ok(NonOverlapCheck {
        holds: witness.is_none(),
        witness,
    })
}

/// All rank-`k` words in lexicographic order.
pub fn enumerate_cylinders(system: &SymbolicSystem, k: usize, budget: u64) -> Result<Vec<CylinderWord>> {
    let count = check_budget("enumerate_cylinders", system.len(), k, budget)?;
    Ok((0..count)
        .map(|i| CylinderWord::from_index(i, system.len(), k))
        .collect())
}

/// One truncated point per rank-`depth` word, in lexicographic order.
#[derive(Debug, Clone)]
pub struct SymbolicCloud {
    system: SymbolicSystem,
    depth: usize,
    letters: Vec<u16>,
    /// `sum y_i m^(K-i)` per point; half flavor only.
    y_values: Vec<u128>,
    y_unit: f64,
}

/// Builds the truncated point cloud of a symbolic system.
pub fn symbolic_point_cloud(system: &SymbolicSystem, depth: usize, budget: u64) -> Result<SymbolicCloud> {
    const OP: &str = "symbolic_point_cloud";
    check_budget(OP, system.len(), depth, budget)?;
    if system.flavor() == Flavor::Half && (depth as f64) * (system.m() as f64).log2() >= 120.0 {
        return Err(invalid(OP, "depth", format!("m^{depth} overflows exact y-values")));
    }
    let letters = word_table(system.len(), depth);
    let y_values = match system.flavor() {
        Flavor::Full => Vec::new(),
        Flavor::Half if depth == 0 => vec![0],
        Flavor::Half => letters
            .chunks_exact(depth)
            .map(|w| {
                w.iter()
                    .fold(0u128, |acc, &l| acc * system.m() as u128 + system.digits[l as usize].1 as u128)
            })
            .collect(),
    };
    Ok(SymbolicCloud {
        system: system.clone(),
        depth,
        letters,
        y_values,
        y_unit: (system.m() as f64).powi(depth as i32),
    })
}

impl SymbolicCloud {
    pub fn system(&self) -> &SymbolicSystem {
        &self.system
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn metric(&self) -> Metric {
        self.system.metric()
    }

    fn word(&self, i: usize) -> &[u16] {
        &self.letters[i * self.depth..(i + 1) * self.depth]
    }

    pub fn point(&self, i: usize) -> SymbolicPoint {
        let d = &self.system.digits;
        SymbolicPoint {
            x: self.word(i).iter().map(|&l| d[l as usize].0).collect(),
            y: self.word(i).iter().map(|&l| d[l as usize].1).collect(),
        }
    }

    fn x_agreement(&self, i: usize, j: usize) -> usize {
        let cls = &self.system.x_class;
        self.word(i)
            .iter()
            .zip(self.word(j))
            .take_while(|(&a, &b)| cls[a as usize] == cls[b as usize])
            .count()
    }

    fn x_key(&self, i: usize, len: usize) -> Vec<u16> {
        self.word(i)[..len]
            .iter()
            .map(|&l| self.system.x_class[l as usize])
            .collect()
    }
}

impl PointSet for SymbolicCloud {
    fn len(&self) -> usize {
        self.letters.len().checked_div(self.depth).unwrap_or(1)
    }

    fn distance(&self, i: usize, j: usize) -> f64 {
        let k = self.depth;
        let a = self.x_agreement(i, j);
        let dx = if a == k { 0.0 } else { level_scale(self.system.n, a) };
        let dy = match self.system.flavor {
            Flavor::Full => {
                let d = &self.system.digits;
                let b = self
                    .word(i)
                    .iter()
                    .zip(self.word(j))
                    .take_while(|(&p, &q)| d[p as usize].1 == d[q as usize].1)
                    .count();
                if b == k {
                    0.0
                } else {
                    level_scale(self.system.m, b)
                }
            }
            Flavor::Half => self.y_values[i].abs_diff(self.y_values[j]) as f64 / self.y_unit,
        };
        dx.max(dy)
    }

    fn center_index(&self, delta: f64) -> Box<dyn CenterIndex + '_> {
        let threshold = packing_threshold(delta);
        let ax = level_for(self.system.n, threshold, self.depth);
        match self.system.flavor {
            Flavor::Full => Box::new(PrefixIndex {
                cloud: self,
                ax,
                by: level_for(self.system.m, threshold, self.depth),
                keys: HashSet::new(),
            }),
            Flavor::Half => Box::new(ValueIndex {
                cloud: self,
                ax,
                threshold,
                width: (threshold * self.y_unit).ceil() as u128 + 1,
                groups: HashMap::new(),
            }),
        }
    }
}

/// Under the full metric, "within threshold" is equality of fixed-length
/// x- and y-prefixes, an equivalence relation.
struct PrefixIndex<'a> {
    cloud: &'a SymbolicCloud,
    ax: usize,
    by: usize,
    keys: HashSet<Vec<u16>>,
}

impl PrefixIndex<'_> {
    fn key(&self, p: usize) -> Vec<u16> {
        let d = &self.cloud.system.digits;
        let mut key = self.cloud.x_key(p, self.ax);
        key.extend(self.cloud.word(p)[..self.by].iter().map(|&l| d[l as usize].1 as u16));
        key
    }
}

impl CenterIndex for PrefixIndex<'_> {
    fn conflicts(&self, p: usize) -> bool {
        self.keys.contains(&self.key(p))
    }

    fn insert(&mut self, p: usize) {
        let key = self.key(p);
        self.keys.insert(key);
    }
}

/// Half metric: group by x-prefix, then range-search exact y-values.
struct ValueIndex<'a> {
    cloud: &'a SymbolicCloud,
    ax: usize,
    threshold: f64,
    width: u128,
    groups: HashMap<Vec<u16>, BTreeMap<u128, Vec<usize>>>,
}

impl CenterIndex for ValueIndex<'_> {
    fn conflicts(&self, p: usize) -> bool {
        let Some(tree) = self.groups.get(&self.cloud.x_key(p, self.ax)) else {
            return false;
        };
        let y = self.cloud.y_values[p];
        tree.range(y.saturating_sub(self.width)..=y.saturating_add(self.width))
            .flat_map(|(_, c)| c)
            .any(|&c| self.cloud.distance(p, c) <= self.threshold)
    }

    fn insert(&mut self, p: usize) {
        self.groups
            .entry(self.cloud.x_key(p, self.ax))
            .or_default()
            .entry(self.cloud.y_values[p])
            .or_default()
            .push(p);
    }
}

impl CodedModel for SymbolicSystem {
    fn alphabet_len(&self) -> usize {
        self.len()
    }

    fn metric(&self) -> Metric {
        match self.flavor {
            Flavor::Full => Metric::FullSymbolic { n: self.n, m: self.m },
            Flavor::Half => Metric::HalfSymbolic { n: self.n, m: self.m },
        }
    }

    fn max_cell_diameter(&self, rank: usize) -> f64 {
        let dx = if self.x_distinct() > 1 {
            level_scale(self.n, rank)
        } else {
            0.0
        };
        let (ymin, ymax) = self.y_range();
        let dy = match self.flavor {
            Flavor::Full if ymin < ymax => level_scale(self.m, rank),
            Flavor::Full => 0.0,
            Flavor::Half => (ymax - ymin) as f64 * level_scale(self.m, rank) / (self.m - 1) as f64,
        };
        dx.max(dy)
    }

    fn cell_scale_floor(&self, rank: usize) -> f64 {
        level_scale(self.n, rank)
    }

    fn cell_diameter(&self, word: &[usize]) -> f64 {
        self.max_cell_diameter(word.len())
    }

    /// Under the full metric a packing at radius `delta` only reads the
    /// prefixes that decide conflicts, so truncating there is exact.
    fn packing_depth(&self, delta: f64) -> Result<usize> {
        match self.flavor {
            Flavor::Full => {
                let threshold = packing_threshold(delta);
                Ok(level_for(self.n, threshold, MAX_RANK).max(level_for(self.m, threshold, MAX_RANK)))
            }
            Flavor::Half => self.depth_for(delta),
        }
    }

    fn sample(&self, depth: usize, budget: u64) -> Result<Cloud> {
        Ok(Cloud::Symbolic(symbolic_point_cloud(self, depth, budget)?))
    }

    fn cells(&self, depth: usize, budget: u64) -> Result<CellSet> {
        check_budget("cells", self.len(), depth, budget)?;
        Ok(CellSet::Symbolic {
            system: self.clone(),
            depth,
        })
    }
}
