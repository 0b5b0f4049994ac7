//! One-dimensional similitudes, diagonal self-affine systems on the unit
//! cube, and general similitude systems.
//!
//! Map parameters may be carried exactly (as rationals) alongside their
//! floating-point values. Interval-disjointness tests use the exact values
//! whenever both operands have them and fall back to a 1e-12 tolerance
//! otherwise.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};

use crate::error::{invalid, Error, Result};

/// Tolerance for floating interval comparisons.
pub const INTERVAL_TOL: f64 = 1e-12;

/// Builds an exact rational `num / den`.
pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    Preserving,
    Reversing,
}

impl Orientation {
    pub fn from_sign(sign: i64) -> Result<Self> {
        match sign {
            1 => Ok(Orientation::Preserving),
            -1 => Ok(Orientation::Reversing),
            other => Err(invalid(
                "IntervalMap::new",
                "orientation",
                format!("expected +1 or -1, got {other}"),
            )),
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Orientation::Preserving => 1.0,
            Orientation::Reversing => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct ExactParams {
    ratio: BigRational,
    offset: BigRational,
}

/// A contracting similitude of `[0, 1]` into itself.
///
/// `offset` is the left endpoint of the image interval, so the image is
/// `[offset, offset + ratio]` regardless of orientation.
#[derive(Debug, Clone)]
pub struct IntervalMap {
    ratio: f64,
    offset: f64,
    orientation: Orientation,
    exact: Option<ExactParams>,
}

impl IntervalMap {
    pub fn new(ratio: f64, offset: f64, orientation: Orientation) -> Result<Self> {
        const OP: &str = "IntervalMap::new";
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(invalid(OP, "ratio", format!("{ratio} not in (0, 1)")));
        }
        if !offset.is_finite()
            || offset < -INTERVAL_TOL
            || offset + ratio > 1.0 + INTERVAL_TOL
        {
            return Err(invalid(
                OP,
                "offset",
                format!("image [{offset}, {}] not inside [0, 1]", offset + ratio),
            ));
        }
        Ok(IntervalMap {
            ratio,
            offset,
            orientation,
            exact: None,
        })
    }

    /// Builds a map from exact rational parameters.
    pub fn exact(ratio: BigRational, offset: BigRational, orientation: Orientation) -> Result<Self> {
        const OP: &str = "IntervalMap::exact";
        if !(ratio.is_positive() && ratio < BigRational::one()) {
            return Err(invalid(OP, "ratio", format!("{ratio} not in (0, 1)")));
        }
        if offset.is_negative() || &offset + &ratio > BigRational::one() {
            return Err(invalid(
                OP,
                "offset",
                format!("image [{offset}, {}] not inside [0, 1]", &offset + &ratio),
            ));
        }
        Ok(IntervalMap {
            ratio: to_f64(&ratio),
            offset: to_f64(&offset),
            orientation,
            exact: Some(ExactParams { ratio, offset }),
        })
    }

    /// Orientation-preserving map `x -> offset + ratio * x` from small fractions.
    pub fn fractions(ratio: (i64, i64), offset: (i64, i64)) -> Result<Self> {
        Self::exact(
            rational(ratio.0, ratio.1),
            rational(offset.0, offset.1),
            Orientation::Preserving,
        )
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn apply(&self, x: f64) -> f64 {
        match self.orientation {
            Orientation::Preserving => self.offset + self.ratio * x,
            Orientation::Reversing => self.offset + self.ratio * (1.0 - x),
        }
    }

    /// Image of the interval `[lo, hi]`, returned with `lo <= hi`.
    pub fn apply_interval(&self, lo: f64, hi: f64) -> (f64, f64) {
        let (a, b) = (self.apply(lo), self.apply(hi));
        if a <= b {
            (a, b)
        } else {
            (b, a)
        }
    }

    /// True when the open images of `(0, 1)` under `self` and `other` are
    /// disjoint.
    pub fn open_images_disjoint(&self, other: &IntervalMap) -> bool {
        if let (Some(a), Some(b)) = (&self.exact, &other.exact) {
            let a_hi = &a.offset + &a.ratio;
            let b_hi = &b.offset + &b.ratio;
            return a_hi <= b.offset || b_hi <= a.offset;
        }
        self.offset + self.ratio <= other.offset + INTERVAL_TOL
            || other.offset + other.ratio <= self.offset + INTERVAL_TOL
    }

    /// Strict comparison of contraction ratios, exact when possible.
    fn ratio_gt(&self, other: &IntervalMap) -> bool {
        match (&self.exact, &other.exact) {
            (Some(a), Some(b)) => a.ratio > b.ratio,
            _ => self.ratio > other.ratio + INTERVAL_TOL,
        }
    }
}

/// Parameter equality: exact when both maps are exact, bitwise otherwise.
impl PartialEq for IntervalMap {
    fn eq(&self, other: &Self) -> bool {
        if self.orientation != other.orientation {
            return false;
        }
        match (&self.exact, &other.exact) {
            (Some(a), Some(b)) => a == b,
            _ => self.ratio == other.ratio && self.offset == other.offset,
        }
    }
}

/// A diagonal affine map of `[0, 1]^d`, acting by one interval map per
/// coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalMap {
    pub label: String,
    pub components: Vec<IntervalMap>,
}

impl DiagonalMap {
    pub fn new(label: impl Into<String>, components: Vec<IntervalMap>) -> Self {
        DiagonalMap {
            label: label.into(),
            components,
        }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn ratios(&self) -> Vec<f64> {
        self.components.iter().map(IntervalMap::ratio).collect()
    }
}

/// A finite word over the digit indices of a system.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct CylinderWord(pub Vec<usize>);

impl CylinderWord {
    pub fn empty() -> Self {
        CylinderWord(Vec::new())
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn letters(&self) -> &[usize] {
        &self.0
    }

    pub fn is_prefix_of(&self, other: &CylinderWord) -> bool {
        other.0.starts_with(&self.0)
    }

    pub fn push(&self, letter: usize) -> CylinderWord {
        let mut letters = Vec::with_capacity(self.0.len() + 1);
        letters.extend_from_slice(&self.0);
        letters.push(letter);
        CylinderWord(letters)
    }

    pub fn validate(&self, alphabet: usize, op: &'static str) -> Result<()> {
        match self.0.iter().find(|&&l| l >= alphabet) {
            Some(&letter) => Err(Error::InvalidLetter {
                op,
                letter,
                alphabet,
            }),
            None => Ok(()),
        }
    }

    /// Position of this word in the lexicographic enumeration of all words
    /// of the same rank.
    pub fn index(&self, alphabet: usize) -> usize {
        self.0.iter().fold(0, |acc, &l| acc * alphabet + l)
    }

    /// Inverse of [`CylinderWord::index`].
    pub fn from_index(mut index: usize, alphabet: usize, rank: usize) -> Self {
        let mut letters = vec![0; rank];
        for slot in letters.iter_mut().rev() {
            *slot = index % alphabet;
            index /= alphabet;
        }
        CylinderWord(letters)
    }
}

impl From<Vec<usize>> for CylinderWord {
    fn from(v: Vec<usize>) -> Self {
        CylinderWord(v)
    }
}

impl fmt::Display for CylinderWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "()");
        }
        let parts: Vec<String> = self.0.iter().map(usize::to_string).collect();
        write!(f, "{}", parts.join("."))
    }
}

/// Image of the unit cube under a composition of sponge maps.
#[derive(Debug, Clone, PartialEq)]
pub struct Pillar {
    pub word: CylinderWord,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub sides: Vec<f64>,
    pub shortest_side: f64,
}

/// A diagonal IFS on `[0, 1]^d`.
#[derive(Debug, Clone)]
pub struct SpongeSystem {
    dim: usize,
    digits: Vec<DiagonalMap>,
    r_star: f64,
    r_upper: f64,
}

impl SpongeSystem {
    pub fn new(digits: Vec<DiagonalMap>) -> Result<Self> {
        const OP: &str = "SpongeSystem::new";
        let first = digits.first().ok_or(Error::Empty { op: OP, param: "digits" })?;
        let dim = first.dim();
        if dim == 0 {
            return Err(invalid(OP, "d", "dimension must be positive"));
        }
        for (i, digit) in digits.iter().enumerate() {
            if digit.dim() != dim {
                return Err(invalid(
                    OP,
                    "digits",
                    format!("digit {i} has {} coordinates, expected {dim}", digit.dim()),
                ));
            }
            if digits[..i].iter().any(|d| d.label == digit.label) {
                return Err(invalid(
                    OP,
                    "digits",
                    format!("duplicate digit label `{}`", digit.label),
                ));
            }
        }
        let r_star = digits
            .iter()
            .map(|d| d.components[dim - 1].ratio())
            .fold(f64::INFINITY, f64::min);
        let r_upper = digits
            .iter()
            .map(|d| d.components[0].ratio())
            .fold(0.0, f64::max);
        Ok(SpongeSystem {
            dim,
            digits,
            r_star,
            r_upper,
        })
    }

    /// Convenience constructor: one row of interval maps per digit, labels
    /// are the digit indices.
    pub fn from_rows(rows: Vec<Vec<IntervalMap>>) -> Result<Self> {
        Self::new(
            rows.into_iter()
                .enumerate()
                .map(|(i, c)| DiagonalMap::new(i.to_string(), c))
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn digits(&self) -> &[DiagonalMap] {
        &self.digits
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    /// Smallest contraction ratio in the last coordinate.
    pub fn r_star(&self) -> f64 {
        self.r_star
    }

    /// Largest contraction ratio in the first coordinate.
    pub fn r_upper(&self) -> f64 {
        self.r_upper
    }

    /// Strictly decreasing ratios along the coordinates, for every digit.
    pub fn validate_coordinate_ordering(&self) -> bool {
        self.ordering_violation().is_none()
    }

    fn ordering_violation(&self) -> Option<usize> {
        self.digits.iter().position(|d| {
            d.components
                .windows(2)
                .any(|pair| !pair[0].ratio_gt(&pair[1]))
        })
    }

    /// Errors with the first digit that breaks the coordinate ordering.
    pub fn require_coordinate_ordering(&self) -> Result<()> {
        match self.ordering_violation() {
            None => Ok(()),
            Some(digit) => Err(Error::CoordinateOrdering {
                digit,
                ratios: self.digits[digit].ratios(),
            }),
        }
    }

    /// Reorders coordinates so that the ordering condition reads with the
    /// identity permutation. Returns the reordered system and the
    /// permutation (`new coordinate i` = `old coordinate perm[i]`), or
    /// `None` when no common permutation works.
    pub fn normalize_coordinates(&self) -> Option<(SpongeSystem, Vec<usize>)> {
        let first = &self.digits[0];
        let mut perm: Vec<usize> = (0..self.dim).collect();
        perm.sort_by(|&a, &b| {
            first.components[b]
                .ratio()
                .partial_cmp(&first.components[a].ratio())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let digits = self
            .digits
            .iter()
            .map(|d| {
                DiagonalMap::new(
                    d.label.clone(),
                    perm.iter().map(|&i| d.components[i].clone()).collect(),
                )
            })
            .collect();
        let system = SpongeSystem::new(digits).ok()?;
        system.validate_coordinate_ordering().then_some((system, perm))
    }

    /// The projected system on the first `j` coordinates, duplicates
    /// removed (first occurrence order).
    pub fn project_ifs(&self, j: usize) -> Result<Vec<Vec<IntervalMap>>> {
        Ok(self.prefix_classes(j)?.0)
    }

    /// Distinct `j`-prefixes together with the prefix index of every digit.
    pub fn prefix_classes(&self, j: usize) -> Result<(Vec<Vec<IntervalMap>>, Vec<usize>)> {
        if j == 0 || j > self.dim {
            return Err(Error::LevelOutOfRange {
                op: "project_ifs",
                level: j,
                dim: self.dim,
            });
        }
        let mut prefixes: Vec<Vec<IntervalMap>> = Vec::new();
        let mut class_of = Vec::with_capacity(self.digits.len());
        for digit in &self.digits {
            let prefix = &digit.components[..j];
            let class = match prefixes.iter().position(|p| p.as_slice() == prefix) {
                Some(c) => c,
                None => {
                    prefixes.push(prefix.to_vec());
                    prefixes.len() - 1
                }
            };
            class_of.push(class);
        }
        Ok((prefixes, class_of))
    }

    /// Open set condition with open set `(0,1)^j` for every coordinate
    /// projection.
    pub fn validate_neat_projection(&self) -> bool {
        self.neat_projection_violation().is_none()
    }

    pub fn require_neat_projection(&self) -> Result<()> {
        match self.neat_projection_violation() {
            None => Ok(()),
            Some((level, first, second)) => Err(Error::NeatProjection {
                level,
                first,
                second,
            }),
        }
    }

    fn neat_projection_violation(&self) -> Option<(usize, usize, usize)> {
        // the full maps of two digits coincide: identical images
        let (_, class_of) = self.prefix_classes(self.dim).expect("level in range");
        for (b, cb) in class_of.iter().enumerate() {
            if let Some(a) = class_of[..b].iter().position(|ca| ca == cb) {
                return Some((self.dim, a, b));
            }
        }
        for j in 1..=self.dim {
            let prefixes = self.project_ifs(j).expect("level in range");
            for a in 0..prefixes.len() {
                for b in a + 1..prefixes.len() {
                    let disjoint = prefixes[a]
                        .iter()
                        .zip(&prefixes[b])
                        .any(|(f, g)| f.open_images_disjoint(g));
                    if !disjoint {
                        return Some((j, a, b));
                    }
                }
            }
        }
        None
    }

    /// Both structural conditions, with a named error on failure.
    pub fn validate(&self) -> Result<()> {
        self.require_coordinate_ordering()?;
        self.require_neat_projection()
    }

    /// The basic pillar `phi_w([0,1]^d)`.
    pub fn pillar(&self, word: &CylinderWord) -> Result<Pillar> {
        word.validate(self.digits.len(), "pillar")?;
        let mut lo = vec![0.0; self.dim];
        let mut hi = vec![1.0; self.dim];
        let mut sides = vec![1.0; self.dim];
        for &letter in word.letters().iter().rev() {
            for (i, map) in self.digits[letter].components.iter().enumerate() {
                let (a, b) = map.apply_interval(lo[i], hi[i]);
                lo[i] = a;
                hi[i] = b;
            }
        }
        for &letter in word.letters() {
            for (side, map) in sides.iter_mut().zip(&self.digits[letter].components) {
                *side *= map.ratio();
            }
        }
        let shortest_side = sides.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(Pillar {
            word: word.clone(),
            lo,
            hi,
            sides,
            shortest_side,
        })
    }

    pub fn children(&self, word: &CylinderWord) -> Vec<CylinderWord> {
        (0..self.digits.len()).map(|a| word.push(a)).collect()
    }
}

/// Open-set condition on `[0, 1]` with open set `(0, 1)`: the open images
/// are pairwise disjoint.
pub fn check_osc_intervals(maps: &[IntervalMap]) -> bool {
    maps.iter().enumerate().all(|(i, f)| {
        maps[i + 1..]
            .iter()
            .all(|g| f.open_images_disjoint(g))
    })
}

/// A similitude `x -> ratio * Q x + translation` of `R^n` with `Q`
/// orthogonal (row-major).
#[derive(Debug, Clone, PartialEq)]
pub struct Similitude {
    pub ratio: f64,
    pub linear: Vec<f64>,
    pub translation: Vec<f64>,
}

impl Similitude {
    /// Similitude with identity orthogonal part.
    pub fn scaling(ratio: f64, translation: Vec<f64>) -> Self {
        let n = translation.len();
        let mut linear = vec![0.0; n * n];
        for i in 0..n {
            linear[i * n + i] = 1.0;
        }
        Similitude {
            ratio,
            linear,
            translation,
        }
    }

    pub fn dim(&self) -> usize {
        self.translation.len()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let row = &self.linear[i * n..(i + 1) * n];
                self.ratio * row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
                    + self.translation[i]
            })
            .collect()
    }
}

/// A system of contracting similitudes of `R^n`.
#[derive(Debug, Clone)]
pub struct SimilarIFS {
    dim: usize,
    maps: Vec<Similitude>,
    osc_open_set: Option<(Vec<f64>, Vec<f64>)>,
}

impl SimilarIFS {
    pub fn new(maps: Vec<Similitude>, osc_open_set: Option<(Vec<f64>, Vec<f64>)>) -> Result<Self> {
        const OP: &str = "SimilarIFS::new";
        let dim = maps.first().ok_or(Error::Empty { op: OP, param: "maps" })?.dim();
        if dim == 0 {
            return Err(invalid(OP, "d", "dimension must be positive"));
        }
        for (k, map) in maps.iter().enumerate() {
            if map.dim() != dim || map.linear.len() != dim * dim {
                return Err(invalid(OP, "maps", format!("map {k} has inconsistent dimension")));
            }
            if !(map.ratio > 0.0 && map.ratio < 1.0) {
                return Err(invalid(OP, "ratio", format!("map {k}: {} not in (0, 1)", map.ratio)));
            }
            // Q Q^T = I
            for i in 0..dim {
                for j in 0..dim {
                    let dot: f64 = (0..dim)
                        .map(|t| map.linear[i * dim + t] * map.linear[j * dim + t])
                        .sum();
                    let want = if i == j { 1.0 } else { 0.0 };
                    if (dot - want).abs() > 1e-9 {
                        return Err(invalid(
                            OP,
                            "linear",
                            format!("map {k}: linear part is not orthogonal"),
                        ));
                    }
                }
            }
        }
        if let Some((lo, hi)) = &osc_open_set {
            if lo.len() != dim || hi.len() != dim || lo.iter().zip(hi).any(|(a, b)| a >= b) {
                return Err(invalid(OP, "osc_open_set", "malformed box"));
            }
        }
        Ok(SimilarIFS {
            dim,
            maps,
            osc_open_set,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn maps(&self) -> &[Similitude] {
        &self.maps
    }

    pub fn osc_open_set(&self) -> Option<&(Vec<f64>, Vec<f64>)> {
        self.osc_open_set.as_ref()
    }

    pub fn ratios(&self) -> Vec<f64> {
        self.maps.iter().map(|m| m.ratio).collect()
    }

    /// The maps as interval maps of `[0, 1]`, when the system is
    /// one-dimensional and maps the unit interval into itself.
    pub fn interval_maps(&self) -> Option<Vec<IntervalMap>> {
        if self.dim != 1 {
            return None;
        }
        self.maps
            .iter()
            .map(|m| {
                let (a, b) = (m.translation[0], m.ratio * m.linear[0] + m.translation[0]);
                let orientation = if m.linear[0] > 0.0 {
                    Orientation::Preserving
                } else {
                    Orientation::Reversing
                };
                IntervalMap::new(m.ratio, a.min(b), orientation).ok()
            })
            .collect()
    }
}

impl fmt::Display for SpongeSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "sponge(d={}, digits={})", self.dim, self.digits.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mcmullen() -> SpongeSystem {
        // coordinate 1: ratio 1/2, columns {0, 1, 0}; coordinate 2: ratio 1/3, rows {0, 1, 2}
        let rows = [(0, 0), (1, 1), (0, 2)]
            .iter()
            .map(|&(a, b)| {
                vec![
                    IntervalMap::fractions((1, 2), (a, 2)).unwrap(),
                    IntervalMap::fractions((1, 3), (b, 3)).unwrap(),
                ]
            })
            .collect();
        SpongeSystem::from_rows(rows).unwrap()
    }

    #[test]
    fn ordering_examples() {
        assert!(mcmullen().validate_coordinate_ordering());
        let flat = SpongeSystem::from_rows(vec![vec![
            IntervalMap::fractions((1, 3), (0, 1)).unwrap(),
            IntervalMap::fractions((1, 3), (0, 1)).unwrap(),
        ]])
        .unwrap();
        assert!(!flat.validate_coordinate_ordering());
        assert!(matches!(
            flat.require_coordinate_ordering(),
            Err(Error::CoordinateOrdering { digit: 0, .. })
        ));
    }

    #[test]
    fn normalization_reorders_coordinates() {
        let swapped = SpongeSystem::from_rows(vec![vec![
            IntervalMap::fractions((1, 3), (0, 1)).unwrap(),
            IntervalMap::fractions((1, 2), (0, 1)).unwrap(),
        ]])
        .unwrap();
        assert!(!swapped.validate_coordinate_ordering());
        let (fixed, perm) = swapped.normalize_coordinates().unwrap();
        assert_eq!(perm, vec![1, 0]);
        assert!(fixed.validate_coordinate_ordering());
        assert_eq!(fixed.digits()[0].ratios(), vec![0.5, 1.0 / 3.0]);
    }

    #[test]
    fn projections() {
        let s = mcmullen();
        assert_eq!(s.project_ifs(1).unwrap().len(), 2);
        assert_eq!(s.project_ifs(2).unwrap().len(), 3);
        assert!(matches!(s.project_ifs(3), Err(Error::LevelOutOfRange { .. })));
        assert!(matches!(s.project_ifs(0), Err(Error::LevelOutOfRange { .. })));
        let single = SpongeSystem::from_rows(vec![vec![
            IntervalMap::fractions((1, 2), (0, 1)).unwrap(),
            IntervalMap::fractions((1, 3), (0, 1)).unwrap(),
        ]])
        .unwrap();
        assert_eq!(single.project_ifs(1).unwrap().len(), 1);
        assert_eq!(single.project_ifs(2).unwrap().len(), 1);
    }

    #[test]
    fn neat_projection_examples() {
        assert!(mcmullen().validate_neat_projection());
        let row = vec![
            IntervalMap::fractions((1, 2), (0, 1)).unwrap(),
            IntervalMap::fractions((1, 3), (0, 1)).unwrap(),
        ];
        let dup = SpongeSystem::new(vec![
            DiagonalMap::new("a", row.clone()),
            DiagonalMap::new("b", row.clone()),
        ])
        .unwrap();
        assert!(!dup.validate_neat_projection());
        // same first coordinate map collapses at j = 1, so the overlap is at j = 2
        assert!(matches!(
            dup.require_neat_projection(),
            Err(Error::NeatProjection { level: 2, .. })
        ));
        assert!(SpongeSystem::from_rows(vec![row]).unwrap().validate_neat_projection());
    }

    #[test]
    fn duplicate_labels_rejected() {
        let row = vec![IntervalMap::fractions((1, 2), (0, 1)).unwrap()];
        let err = SpongeSystem::new(vec![
            DiagonalMap::new("a", row.clone()),
            DiagonalMap::new("a", row),
        ]);
        assert!(err.is_err());
    }

    #[test]
    fn pillar_examples() {
        let s = mcmullen();
        let unit = s.pillar(&CylinderWord::empty()).unwrap();
        assert_eq!(unit.lo, vec![0.0, 0.0]);
        assert_eq!(unit.hi, vec![1.0, 1.0]);
        assert_eq!(unit.shortest_side, 1.0);

        let p = s.pillar(&CylinderWord(vec![1, 2])).unwrap();
        assert!((p.sides[0] - 0.25).abs() < 1e-15);
        assert!((p.sides[1] - 1.0 / 9.0).abs() < 1e-15);
        // phi_1(phi_2(cube)): x in 1/2 + [0,1/2]/2, y in 1/3 + (2/3 + [0,1/3])/3
        assert!((p.lo[0] - 0.5).abs() < 1e-15);
        assert!((p.lo[1] - (1.0 / 3.0 + 2.0 / 9.0)).abs() < 1e-15);
        assert!((p.shortest_side - 1.0 / 9.0).abs() < 1e-15);

        let deep = s.pillar(&CylinderWord(vec![0; 7])).unwrap();
        assert!((deep.shortest_side - (1.0f64 / 3.0).powi(7)).abs() < 1e-18);

        assert!(matches!(
            s.pillar(&CylinderWord(vec![3])),
            Err(Error::InvalidLetter { letter: 3, .. })
        ));
    }

    #[test]
    fn reversing_maps_give_same_boxes() {
        let fwd = IntervalMap::fractions((1, 3), (2, 3)).unwrap();
        let rev = IntervalMap::exact(rational(1, 3), rational(2, 3), Orientation::Reversing).unwrap();
        assert_eq!(fwd.apply_interval(0.0, 1.0), rev.apply_interval(0.0, 1.0));
        assert!((rev.apply(0.0) - 1.0).abs() < 1e-15);
        assert_ne!(fwd, rev);
    }

    #[test]
    fn children_counts() {
        let s = mcmullen();
        let level1 = s.children(&CylinderWord::empty());
        assert_eq!(level1.len(), 3);
        assert!(level1.iter().all(|w| w.rank() == 1));
        let level2: Vec<_> = level1.iter().flat_map(|w| s.children(w)).collect();
        assert_eq!(level2.len(), 9);
        assert_eq!(s.children(&CylinderWord(vec![0, 1])).len(), 3);
    }

    #[test]
    fn osc_interval_examples() {
        let cantor = vec![
            IntervalMap::fractions((1, 3), (0, 1)).unwrap(),
            IntervalMap::fractions((1, 3), (2, 3)).unwrap(),
        ];
        assert!(check_osc_intervals(&cantor));
        let lambda = std::f64::consts::SQRT_2 / 2.0;
        let kenyon = vec![
            IntervalMap::new(1.0 / 3.0, 0.0, Orientation::Preserving).unwrap(),
            IntervalMap::new(1.0 / 3.0, 1.0 / 3.0, Orientation::Preserving).unwrap(),
            IntervalMap::new(1.0 / 3.0, lambda / 3.0, Orientation::Preserving).unwrap(),
        ];
        assert!(!check_osc_intervals(&kenyon));
        assert!(check_osc_intervals(&cantor[..1]));
        // touching exact intervals are disjoint as open sets
        let touching = vec![
            IntervalMap::fractions((1, 3), (0, 1)).unwrap(),
            IntervalMap::fractions((1, 3), (1, 3)).unwrap(),
            IntervalMap::fractions((1, 3), (2, 3)).unwrap(),
        ];
        assert!(check_osc_intervals(&touching));
    }

    #[test]
    fn word_index_roundtrip() {
        let w = CylinderWord(vec![2, 0, 1]);
        let idx = w.index(3);
        assert_eq!(idx, 2 * 9 + 1);
        assert_eq!(CylinderWord::from_index(idx, 3, 3), w);
    }

    #[test]
    fn similar_ifs_validation() {
        let ok = SimilarIFS::new(vec![Similitude::scaling(0.5, vec![0.0, 0.0])], None);
        assert!(ok.is_ok());
        let bad = Similitude {
            ratio: 0.5,
            linear: vec![1.0, 1.0, 0.0, 1.0],
            translation: vec![0.0, 0.0],
        };
        assert!(SimilarIFS::new(vec![bad], None).is_err());
        assert!(SimilarIFS::new(vec![Similitude::scaling(1.5, vec![0.0])], None).is_err());
        let one_d = SimilarIFS::new(
            vec![Similitude::scaling(1.0 / 3.0, vec![0.0]), Similitude::scaling(1.0 / 3.0, vec![2.0 / 3.0])],
            None,
        )
        .unwrap();
        assert!(check_osc_intervals(&one_d.interval_maps().unwrap()));
    }
}
