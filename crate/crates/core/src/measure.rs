//! Bernoulli measures on coding spaces, cylinder-union sets, pushforwards
//! under word bijections, and empirical equivalence ratios.

use std::collections::HashMap;

use crate::dimension::BetaSequence;
use crate::error::{invalid, Error, Result};
use crate::ifs::{CylinderWord, SpongeSystem};

/// Tolerance on the total mass of a probability weight.
pub const WEIGHT_SUM_TOL: f64 = 1e-10;

/// A Bernoulli (product) measure given by one probability weight per digit.
#[derive(Debug, Clone, PartialEq)]
pub struct BernoulliMeasure {
    weights: Vec<f64>,
}

impl BernoulliMeasure {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        const OP: &str = "BernoulliMeasure::new";
        if weights.is_empty() {
            return Err(Error::Empty { op: OP, param: "weights" });
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0 && **w <= 1.0)) {
            return Err(invalid(OP, "weights", format!("weight {w} not in (0, 1]")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(invalid(OP, "weights", format!("weights sum to {total}, not 1")));
        }
        Ok(BernoulliMeasure { weights })
    }

    pub fn uniform(alphabet: usize) -> Result<Self> {
        if alphabet == 0 {
            return Err(Error::Empty {
                op: "BernoulliMeasure::uniform",
                param: "alphabet",
            });
        }
        Ok(BernoulliMeasure {
            weights: vec![1.0 / alphabet as f64; alphabet],
        })
    }

    /// Natural measure of a self-similar set: weights `r_i^s`.
    pub fn natural(ratios: &[f64], s: f64) -> Result<Self> {
        Self::new(ratios.iter().map(|r| r.powf(s)).collect())
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn alphabet_len(&self) -> usize {
        self.weights.len()
    }

    pub fn measure_of_word(&self, word: &CylinderWord) -> Result<f64> {
        word.validate(self.weights.len(), "measure_of_word")?;
        Ok(self.word_mass(word.letters()))
    }

    pub(crate) fn word_mass(&self, letters: &[usize]) -> f64 {
        letters.iter().map(|&l| self.weights[l]).product()
    }

    pub fn measure_of_set(&self, set: &MeasurableSet) -> Result<f64> {
        set.words()
            .iter()
            .map(|w| self.measure_of_word(w))
            .sum()
    }
}

/// Sponge weights `p_a = prod_j (f'_j)^{beta_j}`.
pub fn bernoulli_weights(sponge: &SpongeSystem, betas: &BetaSequence) -> Result<BernoulliMeasure> {
    if betas.betas.len() != sponge.dim() {
        return Err(invalid(
            "bernoulli_weights",
            "betas",
            format!("{} exponents for a {}-dimensional sponge", betas.betas.len(), sponge.dim()),
        ));
    }
    let weights = sponge
        .digits()
        .iter()
        .map(|d| {
            d.components
                .iter()
                .zip(&betas.betas)
                .map(|(f, b)| f.ratio().powf(*b))
                .product()
        })
        .collect();
    BernoulliMeasure::new(weights)
}

/// Measure of a word over the projected system on the first `j`
/// coordinates; letters index the distinct `j`-prefixes.
pub fn projected_measure(
    sponge: &SpongeSystem,
    betas: &BetaSequence,
    j: usize,
    word: &CylinderWord,
) -> Result<f64> {
    let prefixes = sponge.project_ifs(j).map_err(|e| match e {
        Error::LevelOutOfRange { level, dim, .. } => Error::LevelOutOfRange {
            op: "projected_measure",
            level,
            dim,
        },
        other => other,
    })?;
    word.validate(prefixes.len(), "projected_measure")?;
    let weights: Vec<f64> = prefixes
        .iter()
        .map(|p| {
            p.iter()
                .zip(&betas.betas)
                .map(|(f, b)| f.ratio().powf(*b))
                .product()
        })
        .collect();
    Ok(word.letters().iter().map(|&l| weights[l]).product())
}

/// A finite union of cylinders, no word being a prefix of another.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasurableSet {
    words: Vec<CylinderWord>,
}

impl MeasurableSet {
    pub fn new(words: Vec<CylinderWord>) -> Result<Self> {
        let mut sorted = words.clone();
        sorted.sort();
        // in sorted order any word is followed directly by its extensions
        for pair in sorted.windows(2) {
            if pair[0].is_prefix_of(&pair[1]) {
                return Err(Error::NestedWords {
                    op: "MeasurableSet::new",
                    outer: pair[0].0.clone(),
                    inner: pair[1].0.clone(),
                });
            }
        }
        Ok(MeasurableSet { words })
    }

    pub fn cylinder(word: CylinderWord) -> Self {
        MeasurableSet { words: vec![word] }
    }

    /// All words of the given rank.
    pub fn full(alphabet: usize, rank: usize) -> Self {
        let count = alphabet.pow(rank as u32);
        MeasurableSet {
            words: (0..count)
                .map(|i| CylinderWord::from_index(i, alphabet, rank))
                .collect(),
        }
    }

    pub fn words(&self) -> &[CylinderWord] {
        &self.words
    }

    /// The same set with every complete family of siblings replaced by its
    /// parent, repeatedly. Words come out in lexicographic order.
    pub fn coarsened(&self, alphabet: usize) -> MeasurableSet {
        let mut words = self.words.clone();
        words.sort();
        if alphabet == 0 {
            return MeasurableSet { words };
        }
        for rank in (1..=self.max_rank()).rev() {
            let mut merged: Vec<CylinderWord> = Vec::with_capacity(words.len());
            let mut i = 0;
            while i < words.len() {
                let w = &words[i];
                let run = if w.rank() == rank && *w.0.last().unwrap() == 0 && i + alphabet <= words.len() {
                    let parent = &w.0[..rank - 1];
                    (1..alphabet).all(|l| {
                        let v = &words[i + l].0;
                        v.len() == rank && v[..rank - 1] == *parent && v[rank - 1] == l
                    })
                } else {
                    false
                };
                if run {
                    merged.push(CylinderWord(w.0[..rank - 1].to_vec()));
                    i += alphabet;
                } else {
                    merged.push(w.clone());
                    i += 1;
                }
            }
            words = merged;
        }
        MeasurableSet { words }
    }

    pub fn max_rank(&self) -> usize {
        self.words.iter().map(CylinderWord::rank).max().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Anything that assigns a mass to cylinder unions.
pub trait SetFunction: Sync {
    fn measure(&self, set: &MeasurableSet) -> Result<f64>;
}

impl SetFunction for BernoulliMeasure {
    fn measure(&self, set: &MeasurableSet) -> Result<f64> {
        self.measure_of_set(set)
    }
}

impl<F> SetFunction for F
where
    F: Fn(&MeasurableSet) -> Result<f64> + Sync,
{
    fn measure(&self, set: &MeasurableSet) -> Result<f64> {
        self(set)
    }
}

/// A rank-preserving bijection of coding space.
#[derive(Debug, Clone, PartialEq)]
pub enum CodeMap {
    /// Applies the same digit permutation to every letter.
    Permutation(Vec<usize>),
    /// A bijection of the words of rank `rank`, acting on the first `rank`
    /// letters and leaving the tail unchanged.
    Table {
        rank: usize,
        forward: HashMap<CylinderWord, CylinderWord>,
    },
}

impl CodeMap {
    pub fn identity(alphabet: usize) -> Self {
        CodeMap::Permutation((0..alphabet).collect())
    }

    pub fn permutation(perm: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; perm.len()];
        for &p in &perm {
            if p >= perm.len() || std::mem::replace(&mut seen[p], true) {
                return Err(Error::NonBijective {
                    op: "CodeMap::permutation",
                    reason: format!("{perm:?} is not a permutation"),
                });
            }
        }
        Ok(CodeMap::Permutation(perm))
    }

    pub fn table(alphabet: usize, rank: usize, forward: HashMap<CylinderWord, CylinderWord>) -> Result<Self> {
        const OP: &str = "CodeMap::table";
        let expected = alphabet.pow(rank as u32);
        if forward.len() != expected {
            return Err(Error::NonBijective {
                op: OP,
                reason: format!("{} entries, expected {expected}", forward.len()),
            });
        }
        let mut hit = vec![false; expected];
        for (src, dst) in &forward {
            src.validate(alphabet, OP)?;
            dst.validate(alphabet, OP)?;
            if src.rank() != rank || dst.rank() != rank {
                return Err(Error::NonBijective {
                    op: OP,
                    reason: format!("entry {src} -> {dst} is not rank {rank}"),
                });
            }
            if std::mem::replace(&mut hit[dst.index(alphabet)], true) {
                return Err(Error::NonBijective {
                    op: OP,
                    reason: format!("image {dst} hit twice"),
                });
            }
        }
        Ok(CodeMap::Table { rank, forward })
    }

    /// Preimage of a cylinder as a set of cylinders.
    pub fn preimage(&self, word: &CylinderWord) -> Result<Vec<CylinderWord>> {
        match self {
            CodeMap::Permutation(perm) => {
                let mut inverse = vec![0; perm.len()];
                for (i, &p) in perm.iter().enumerate() {
                    inverse[p] = i;
                }
                word.validate(perm.len(), "pushforward_measure")?;
                Ok(vec![CylinderWord(word.letters().iter().map(|&l| inverse[l]).collect())])
            }
            CodeMap::Table { rank, forward } => {
                if word.rank() > *rank {
                    return Err(Error::RankExceeded {
                        op: "pushforward_measure",
                        rank: word.rank(),
                        max: *rank,
                    });
                }
                let mut out: Vec<CylinderWord> = forward
                    .iter()
                    .filter(|(_, dst)| word.is_prefix_of(dst))
                    .map(|(src, _)| src.clone())
                    .collect();
                out.sort();
                Ok(out)
            }
        }
    }
}

/// `mu(f^{-1}(set))` for a word bijection `f`.
pub fn pushforward_measure(map: &CodeMap, mu: &BernoulliMeasure, set: &MeasurableSet) -> Result<f64> {
    let mut total = 0.0;
    for word in set.words() {
        for pre in map.preimage(word)? {
            total += mu.measure_of_word(&pre)?;
        }
    }
    Ok(total)
}

/// The pushforward `f_* mu` as a set function.
#[derive(Debug, Clone)]
pub struct Pushforward<'a> {
    pub map: &'a CodeMap,
    pub mu: &'a BernoulliMeasure,
}

impl SetFunction for Pushforward<'_> {
    fn measure(&self, set: &MeasurableSet) -> Result<f64> {
        pushforward_measure(self.map, self.mu, set)
    }
}

/// Range `(min, max)` of `nu(S) / mu(S)` over a family of sets.
pub fn equivalence_test(
    mu: &dyn SetFunction,
    nu: &dyn SetFunction,
    family: &[MeasurableSet],
) -> Result<(f64, f64)> {
    const OP: &str = "equivalence_test";
    if family.is_empty() {
        return Err(Error::Empty { op: OP, param: "family" });
    }
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for (i, set) in family.iter().enumerate() {
        let a = mu.measure(set)?;
        let b = nu.measure(set)?;
        if a <= 0.0 || b <= 0.0 {
            return Err(Error::ZeroMeasure { op: OP, set: i });
        }
        lo = lo.min(b / a);
        hi = hi.max(b / a);
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dimension::solve_beta_sequence;
    use crate::ifs::IntervalMap;

    fn w(v: &[usize]) -> CylinderWord {
        CylinderWord(v.to_vec())
    }

    fn mcmullen() -> SpongeSystem {
        SpongeSystem::from_rows(
            [(0, 0), (1, 1), (0, 2)]
                .iter()
                .map(|&(a, b)| {
                    vec![
                        IntervalMap::fractions((1, 2), (a, 2)).unwrap(),
                        IntervalMap::fractions((1, 3), (b, 3)).unwrap(),
                    ]
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn mcmullen_weights_are_uniform() {
        let s = mcmullen();
        let betas = solve_beta_sequence(&s).unwrap();
        let mu = bernoulli_weights(&s, &betas).unwrap();
        for p in mu.weights() {
            assert!((p - 1.0 / 3.0).abs() < 1e-10);
        }
        let m = mu.measure_of_word(&w(&[0, 2, 1])).unwrap();
        assert!((m - 1.0 / 27.0).abs() < 1e-10);
    }

    #[test]
    fn cantor_and_single_digit_weights() {
        let cantor = SpongeSystem::from_rows(vec![
            vec![IntervalMap::fractions((1, 3), (0, 1)).unwrap()],
            vec![IntervalMap::fractions((1, 3), (2, 3)).unwrap()],
        ])
        .unwrap();
        let mu = bernoulli_weights(&cantor, &solve_beta_sequence(&cantor).unwrap()).unwrap();
        assert!((mu.weights()[0] - 0.5).abs() < 1e-12);

        let single = SpongeSystem::from_rows(vec![vec![
            IntervalMap::fractions((1, 2), (0, 1)).unwrap(),
            IntervalMap::fractions((1, 3), (0, 1)).unwrap(),
        ]])
        .unwrap();
        let mu = bernoulli_weights(&single, &solve_beta_sequence(&single).unwrap()).unwrap();
        assert_eq!(mu.weights(), &[1.0]);

        let short = BetaSequence {
            betas: vec![1.0],
            alphas: vec![1.0],
            tolerance: 0.0,
        };
        assert!(bernoulli_weights(&single, &short).is_err());
    }

    #[test]
    fn word_measures() {
        let mu = BernoulliMeasure::uniform(3).unwrap();
        assert!((mu.measure_of_word(&w(&[1, 2])).unwrap() - 1.0 / 9.0).abs() < 1e-15);
        assert_eq!(mu.measure_of_word(&w(&[])).unwrap(), 1.0);
        assert!(matches!(
            mu.measure_of_word(&w(&[3])),
            Err(Error::InvalidLetter { .. })
        ));
    }

    #[test]
    fn projected_measure_examples() {
        let s = mcmullen();
        let betas = solve_beta_sequence(&s).unwrap();
        let p = projected_measure(&s, &betas, 1, &w(&[0])).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
        assert!((projected_measure(&s, &betas, 1, &w(&[1])).unwrap() - 0.5).abs() < 1e-12);
        assert!(projected_measure(&s, &betas, 1, &w(&[2])).is_err());
        assert!(matches!(
            projected_measure(&s, &betas, 3, &w(&[0])),
            Err(Error::LevelOutOfRange { op: "projected_measure", .. })
        ));
        let mu = bernoulli_weights(&s, &betas).unwrap();
        let word = w(&[2, 0, 1, 1]);
        let a = projected_measure(&s, &betas, 2, &word).unwrap();
        assert!((a - mu.measure_of_word(&word).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn set_measures() {
        let mu3 = BernoulliMeasure::uniform(3).unwrap();
        let all = MeasurableSet::full(3, 4);
        assert!((mu3.measure_of_set(&all).unwrap() - 1.0).abs() < 1e-12);
        let two = MeasurableSet::new(vec![w(&[0]), w(&[2])]).unwrap();
        assert!((mu3.measure_of_set(&two).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        let mu2 = BernoulliMeasure::uniform(2).unwrap();
        assert_eq!(mu2.measure_of_set(&MeasurableSet::cylinder(w(&[0]))).unwrap(), 0.5);
        assert!(matches!(
            MeasurableSet::new(vec![w(&[0, 1, 2]), w(&[1]), w(&[0, 1])]),
            Err(Error::NestedWords { .. })
        ));
        assert!(MeasurableSet::new(vec![w(&[1]), w(&[1])]).is_err());
    }

    #[test]
    fn coarsening() {
        assert_eq!(MeasurableSet::full(2, 5).coarsened(2).words(), &[w(&[])]);
        let set = MeasurableSet::new(vec![w(&[1, 0]), w(&[0, 1]), w(&[1, 2]), w(&[1, 1]), w(&[2])]).unwrap();
        assert_eq!(set.coarsened(3).words(), &[w(&[0, 1]), w(&[1]), w(&[2])]);
        let nested = MeasurableSet::new(vec![w(&[0, 0, 0]), w(&[0, 0, 1]), w(&[0, 1])]).unwrap();
        assert_eq!(nested.coarsened(2).words(), &[w(&[0])]);
        let mu = BernoulliMeasure::new(vec![0.2, 0.3, 0.5]).unwrap();
        let big = MeasurableSet::new((0..20).map(|i| CylinderWord::from_index(i, 3, 3)).collect()).unwrap();
        let a = mu.measure_of_set(&big).unwrap();
        let b = mu.measure_of_set(&big.coarsened(3)).unwrap();
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn weight_validation() {
        assert!(BernoulliMeasure::new(vec![0.5, 0.4]).is_err());
        assert!(BernoulliMeasure::new(vec![1.0, 0.0]).is_err());
        assert!(BernoulliMeasure::new(vec![]).is_err());
        assert!(BernoulliMeasure::new(vec![0.25, 0.75]).is_ok());
    }

    #[test]
    fn pushforward_examples() {
        let mu = BernoulliMeasure::new(vec![0.5, 0.25, 0.25]).unwrap();
        let set = MeasurableSet::new(vec![w(&[0, 1]), w(&[2])]).unwrap();
        let id = CodeMap::identity(3);
        assert_eq!(
            pushforward_measure(&id, &mu, &set).unwrap(),
            mu.measure_of_set(&set).unwrap()
        );
        // swap digits 0 and 1
        let swap = CodeMap::permutation(vec![1, 0, 2]).unwrap();
        let c1 = MeasurableSet::cylinder(w(&[1]));
        assert_eq!(pushforward_measure(&swap, &mu, &c1).unwrap(), 0.5);
        let c0 = MeasurableSet::cylinder(w(&[0]));
        assert_eq!(pushforward_measure(&swap, &mu, &c0).unwrap(), 0.25);

        let uniform = BernoulliMeasure::uniform(3).unwrap();
        let cycle = CodeMap::permutation(vec![1, 2, 0]).unwrap();
        for word in MeasurableSet::full(3, 3).words() {
            let s = MeasurableSet::cylinder(word.clone());
            assert!(
                (pushforward_measure(&cycle, &uniform, &s).unwrap()
                    - uniform.measure_of_set(&s).unwrap())
                .abs()
                    < 1e-15
            );
        }
        assert!(CodeMap::permutation(vec![0, 0, 1]).is_err());
    }

    #[test]
    fn table_pushforward() {
        let mu = BernoulliMeasure::new(vec![0.5, 0.25, 0.25]).unwrap();
        let mut forward = HashMap::new();
        for i in 0..9 {
            let src = CylinderWord::from_index(i, 3, 2);
            let dst = CylinderWord::from_index((i + 4) % 9, 3, 2);
            forward.insert(src, dst);
        }
        let map = CodeMap::table(3, 2, forward.clone()).unwrap();
        let total = pushforward_measure(&map, &mu, &MeasurableSet::full(3, 2)).unwrap();
        assert!((total - 1.0).abs() < 1e-15);
        // rank-1 cylinder [0] is the image of indices {5, 6, 7} -> words 12, 20, 21
        let got = pushforward_measure(&map, &mu, &MeasurableSet::cylinder(w(&[0]))).unwrap();
        let want = 0.25 * 0.25 + 0.25 * 0.5 + 0.25 * 0.25;
        assert!((got - want).abs() < 1e-15);
        assert!(matches!(
            pushforward_measure(&map, &mu, &MeasurableSet::cylinder(w(&[0, 0, 0]))),
            Err(Error::RankExceeded { .. })
        ));
        let mut broken = forward;
        broken.insert(w(&[0, 0]), w(&[2, 2]));
        assert!(CodeMap::table(3, 2, broken).is_err());
    }

    #[test]
    fn equivalence_examples() {
        let mu = BernoulliMeasure::uniform(3).unwrap();
        let family: Vec<MeasurableSet> = MeasurableSet::full(3, 2)
            .words()
            .iter()
            .map(|w| MeasurableSet::cylinder(w.clone()))
            .collect();
        assert_eq!(equivalence_test(&mu, &mu, &family).unwrap(), (1.0, 1.0));
        let double = |s: &MeasurableSet| mu.measure_of_set(s).map(|m| 2.0 * m);
        assert_eq!(equivalence_test(&mu, &double, &family).unwrap(), (2.0, 2.0));
        let zero = |_: &MeasurableSet| Ok(0.0);
        assert!(matches!(
            equivalence_test(&mu, &zero, &family),
            Err(Error::ZeroMeasure { .. })
        ));
        assert!(equivalence_test(&mu, &mu, &[]).is_err());
    }
}
