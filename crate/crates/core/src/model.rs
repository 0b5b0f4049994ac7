//! Attractors coded by words over a finite alphabet.
//!
//! A [`CodedModel`] exposes the rank-k cylinders of an attractor: their
//! sizes, representative points and enclosing cells. Both Euclidean
//! systems and symbolic spaces implement it, so the verifier works on
//! either through one interface.

use crate::error::{check_budget, invalid, Error, Result};
use crate::geometry::{CellSet, Metric, PointCloud, PointSet};
use crate::ifs::{SimilarIFS, SpongeSystem};
use crate::symbolic::SymbolicCloud;

/// Ranks beyond this are never searched by [`CodedModel::depth_for`].
pub const MAX_RANK: usize = 200;

pub trait CodedModel: Sync {
    fn alphabet_len(&self) -> usize;

    fn metric(&self) -> Metric;

    /// Upper bound on the diameter of every rank-`rank` cylinder.
    fn max_cell_diameter(&self, rank: usize) -> f64;

    /// Lower bound on the smallest size scale of rank-`rank` cylinders.
    fn cell_scale_floor(&self, rank: usize) -> f64;

    /// Diameter of the cell enclosing one cylinder.
    fn cell_diameter(&self, word: &[usize]) -> f64;

    /// One representative point per rank-`depth` word, lexicographic order.
    fn sample(&self, depth: usize, budget: u64) -> Result<Cloud>;

    /// The rank-`depth` cells, lexicographic order.
    fn cells(&self, depth: usize, budget: u64) -> Result<CellSet>;

    /// Rank of a sampled cloud adequate for packing at radius `delta`.
    fn packing_depth(&self, delta: f64) -> Result<usize> {
        self.depth_for(delta)
    }

    /// Smallest rank whose cylinders have diameter at most `scale / 4`.
    fn depth_for(&self, scale: f64) -> Result<usize> {
        (0..=MAX_RANK)
            .find(|&k| self.max_cell_diameter(k) <= scale / 4.0)
            .ok_or(Error::DepthTooShallow {
                op: "depth_for",
                depth: MAX_RANK,
                scale,
                diameter: self.max_cell_diameter(MAX_RANK),
            })
    }
}

/// A sampled attractor.
#[derive(Debug, Clone)]
pub enum Cloud {
    Real(PointCloud),
    Symbolic(SymbolicCloud),
}

impl Cloud {
    pub fn points(&self) -> &dyn PointSet {
        match self {
            Cloud::Real(c) => c,
            Cloud::Symbolic(c) => c,
        }
    }

    pub fn len(&self) -> usize {
        self.points().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn depth(&self) -> usize {
        match self {
            Cloud::Real(c) => c.depth(),
            Cloud::Symbolic(c) => c.depth(),
        }
    }

    pub fn as_real(&self) -> Option<&PointCloud> {
        match self {
            Cloud::Real(c) => Some(c),
            Cloud::Symbolic(_) => None,
        }
    }
}

/// An affine contraction `x -> A x + t`, `A` row-major.
#[derive(Debug, Clone, PartialEq)]
struct Affine {
    a: Vec<f64>,
    t: Vec<f64>,
    /// Lower bound on the smallest singular value of `A`.
    sigma_min: f64,
}

impl Affine {
    fn apply(&self, x: &[f64], out: &mut [f64]) {
        let n = self.t.len();
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.t[i] + (0..n).map(|j| self.a[i * n + j] * x[j]).sum::<f64>();
        }
    }

    /// Center and half-widths of the bounding box of the image of a box.
    fn apply_box(&self, center: &[f64], half: &[f64], out_c: &mut [f64], out_h: &mut [f64]) {
        let n = self.t.len();
        self.apply(center, out_c);
        for (i, h) in out_h.iter_mut().enumerate() {
            *h = (0..n).map(|j| self.a[i * n + j].abs() * half[j]).sum();
        }
    }
}

/// An affine IFS on `R^n` with a reference box containing its attractor.
#[derive(Debug, Clone, PartialEq)]
pub struct EuclideanIfs {
    dim: usize,
    maps: Vec<Affine>,
    center: Vec<f64>,
    half: Vec<f64>,
    metric: Metric,
    diagonal: bool,
}

impl EuclideanIfs {
    /// The diagonal maps of a sponge acting on the unit cube.
    pub fn from_sponge(sponge: &SpongeSystem) -> Self {
        let dim = sponge.dim();
        let maps = sponge
            .digits()
            .iter()
            .map(|digit| {
                let mut a = vec![0.0; dim * dim];
                let mut t = vec![0.0; dim];
                for (i, c) in digit.components.iter().enumerate() {
                    let sign = c.orientation().sign();
                    a[i * dim + i] = sign * c.ratio();
                    t[i] = if sign > 0.0 { c.offset() } else { c.offset() + c.ratio() };
                }
                let sigma_min = digit.ratios().into_iter().fold(f64::INFINITY, f64::min);
                Affine { a, t, sigma_min }
            })
            .collect();
        EuclideanIfs {
            dim,
            maps,
            center: vec![0.5; dim],
            half: vec![0.5; dim],
            metric: Metric::Euclidean,
            diagonal: true,
        }
    }

    /// A similarity IFS with the bounding box of its attractor as the
    /// reference box.
    pub fn from_similar(ifs: &SimilarIFS) -> Self {
        let dim = ifs.dim();
        let maps: Vec<Affine> = ifs
            .maps()
            .iter()
            .map(|s| Affine {
                a: s.linear.iter().map(|q| q * s.ratio).collect(),
                t: s.translation.clone(),
                sigma_min: s.ratio,
            })
            .collect();
        let diagonal = maps.iter().all(|m| {
            (0..dim).all(|i| (0..dim).all(|j| i == j || m.a[i * dim + j] == 0.0))
        });
        let (center, half) = attractor_box(&maps, dim);
        EuclideanIfs {
            dim,
            maps,
            center,
            half,
            metric: Metric::Euclidean,
            diagonal,
        }
    }

    pub fn with_metric(mut self, metric: Metric) -> Result<Self> {
        if matches!(metric, Metric::FullSymbolic { .. } | Metric::HalfSymbolic { .. }) {
            return Err(invalid("EuclideanIfs::with_metric", "metric", "a real metric is required"));
        }
        self.metric = metric;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    /// The reference box as `(lo, hi)`.
    pub fn reference_box(&self) -> (Vec<f64>, Vec<f64>) {
        let lo = self.center.iter().zip(&self.half).map(|(c, h)| c - h).collect();
        let hi = self.center.iter().zip(&self.half).map(|(c, h)| c + h).collect();
        (lo, hi)
    }

    /// Conjugates by `x -> diag(factors) x`; the image of the attractor is
    /// the attractor of the conjugated system, with the same coding.
    pub fn scaled(&self, factors: &[f64]) -> Result<Self> {
        const OP: &str = "EuclideanIfs::scaled";
        if factors.len() != self.dim {
            return Err(invalid(OP, "scale", format!("expected {} factors", self.dim)));
        }
        if let Some(f) = factors.iter().find(|f| !(**f > 0.0 && f.is_finite())) {
            return Err(invalid(OP, "scale", format!("factor {f} is not positive")));
        }
        let n = self.dim;
        let spread = factors.iter().copied().fold(0.0, f64::max) / factors.iter().copied().fold(f64::INFINITY, f64::min);
        let maps = self
            .maps
            .iter()
            .map(|m| {
                let mut a = m.a.clone();
                for i in 0..n {
                    for j in 0..n {
                        if factors[i] != factors[j] {
                            a[i * n + j] = m.a[i * n + j] * factors[i] / factors[j];
                        }
                    }
                }
                let sigma_min = if self.diagonal { m.sigma_min } else { m.sigma_min / spread };
                Affine {
                    a,
                    t: m.t.iter().zip(factors).map(|(t, f)| t * f).collect(),
                    sigma_min,
                }
            })
            .collect();
        Ok(EuclideanIfs {
            dim: n,
            maps,
            center: self.center.iter().zip(factors).map(|(c, f)| c * f).collect(),
            half: self.half.iter().zip(factors).map(|(h, f)| h * f).collect(),
            metric: self.metric,
            diagonal: self.diagonal,
        })
    }

    /// Applies the map of `word` (outermost letter first) to `x`.
    pub fn apply_word(&self, word: &[usize], x: &[f64]) -> Vec<f64> {
        let mut cur = x.to_vec();
        let mut next = vec![0.0; self.dim];
        for &l in word.iter().rev() {
            self.maps[l].apply(&cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
        }
        cur
    }

    fn widths_at(&self, rank: usize) -> Vec<f64> {
        // elementwise maxima of |A| bound every composed cell's box widths
        let n = self.dim;
        let mut bound = vec![0.0f64; n * n];
        for m in &self.maps {
            for (b, a) in bound.iter_mut().zip(&m.a) {
                *b = b.max(a.abs());
            }
        }
        let mut w: Vec<f64> = self.half.iter().map(|h| 2.0 * h).collect();
        for _ in 0..rank {
            w = (0..n)
                .map(|i| (0..n).map(|j| bound[i * n + j] * w[j]).sum())
                .collect();
        }
        w
    }
}

/// Bounding box of the attractor: iterate the box map from a ball that
/// every map sends into itself.
fn attractor_box(maps: &[Affine], dim: usize) -> (Vec<f64>, Vec<f64>) {
    let rmax = maps.iter().map(|m| operator_bound(&m.a)).fold(0.0, f64::max);
    let tmax = maps
        .iter()
        .map(|m| m.t.iter().map(|t| t * t).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let radius = tmax / (1.0 - rmax).max(1e-12);
    let mut center = vec![0.0; dim];
    let mut half = vec![radius; dim];
    let mut c = vec![0.0; dim];
    let mut h = vec![0.0; dim];
    for _ in 0..200 {
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for m in maps {
            m.apply_box(&center, &half, &mut c, &mut h);
            for i in 0..dim {
                lo[i] = lo[i].min(c[i] - h[i]);
                hi[i] = hi[i].max(c[i] + h[i]);
            }
        }
        let next_c: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect();
        let next_h: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (b - a)).collect();
        let moved = next_c
            .iter()
            .zip(&center)
            .chain(next_h.iter().zip(&half))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        center = next_c;
        half = next_h;
        if moved < 1e-15 {
            break;
        }
    }
    (center, half)
}

/// Frobenius norm, an upper bound on the operator norm.
fn operator_bound(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl CodedModel for EuclideanIfs {
    fn alphabet_len(&self) -> usize {
        self.maps.len()
    }

    fn metric(&self) -> Metric {
        self.metric
    }

    fn max_cell_diameter(&self, rank: usize) -> f64 {
        self.metric.combine_gaps(self.widths_at(rank).into_iter())
    }

    fn cell_scale_floor(&self, rank: usize) -> f64 {
        let n = self.dim;
        if self.diagonal {
            (0..n)
                .map(|i| {
                    let r = self
                        .maps
                        .iter()
                        .map(|m| m.a[i * n + i].abs())
                        .fold(f64::INFINITY, f64::min);
                    r.powi(rank as i32) * 2.0 * self.half[i]
                })
                .fold(f64::INFINITY, f64::min)
        } else {
            let r = self.maps.iter().map(|m| m.sigma_min).fold(f64::INFINITY, f64::min);
            let w = self.half.iter().copied().fold(f64::INFINITY, f64::min) * 2.0;
            r.powi(rank as i32) * w
        }
    }

    fn cell_diameter(&self, word: &[usize]) -> f64 {
        let mut c = self.center.clone();
        let mut h = self.half.clone();
        let mut nc = vec![0.0; self.dim];
        let mut nh = vec![0.0; self.dim];
        for &l in word.iter().rev() {
            self.maps[l].apply_box(&c, &h, &mut nc, &mut nh);
            std::mem::swap(&mut c, &mut nc);
            std::mem::swap(&mut h, &mut nh);
        }
        self.metric.combine_gaps(h.iter().map(|x| 2.0 * x))
    }

    fn sample(&self, depth: usize, budget: u64) -> Result<Cloud> {
        let count = check_budget("sample_attractor", self.maps.len(), depth, budget)?;
        let n = self.dim;
        let mut coords = self.center.clone();
        let mut level = 1usize;
        let mut tmp = vec![0.0; n];
        for _ in 0..depth {
            let mut next = Vec::with_capacity(coords.len() * self.maps.len());
            for m in &self.maps {
                for p in coords.chunks_exact(n) {
                    m.apply(p, &mut tmp);
                    next.extend_from_slice(&tmp);
                }
            }
            coords = next;
            level *= self.maps.len();
        }
        debug_assert_eq!(level, count);
        Ok(Cloud::Real(PointCloud::from_raw(
            n,
            coords,
            depth,
            self.maps.len(),
            self.metric,
        )))
    }

    fn cells(&self, depth: usize, budget: u64) -> Result<CellSet> {
        check_budget("cells", self.maps.len(), depth, budget)?;
        let n = self.dim;
        let mut centers = self.center.clone();
        let mut halves = self.half.clone();
        let mut c = vec![0.0; n];
        let mut h = vec![0.0; n];
        for _ in 0..depth {
            let mut nc = Vec::with_capacity(centers.len() * self.maps.len());
            let mut nh = Vec::with_capacity(centers.len() * self.maps.len());
            for m in &self.maps {
                for (pc, ph) in centers.chunks_exact(n).zip(halves.chunks_exact(n)) {
                    m.apply_box(pc, ph, &mut c, &mut h);
                    nc.extend_from_slice(&c);
                    nh.extend_from_slice(&h);
                }
            }
            centers = nc;
            halves = nh;
        }
        Ok(CellSet::Boxes {
            dim: n,
            metric: self.metric,
            lo: centers.iter().zip(&halves).map(|(c, h)| c - h).collect(),
            hi: centers.iter().zip(&halves).map(|(c, h)| c + h).collect(),
        })
    }
}

/// Representative points of all rank-`depth` words of a sponge: images of
/// the unit cube's center.
pub fn sample_attractor(sponge: &SpongeSystem, depth: usize, budget: u64) -> Result<PointCloud> {
    match EuclideanIfs::from_sponge(sponge).sample(depth, budget)? {
        Cloud::Real(c) => Ok(c),
        Cloud::Symbolic(_) => unreachable!("Euclidean models sample real points"),
    }
}
