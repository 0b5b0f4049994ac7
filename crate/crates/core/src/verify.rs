//! Empirical checks of Minkowski-measure comparability.
//!
//! The central report compares `N_delta(R) * delta^beta` with `mu(R)` over
//! the epsilon-components `R` of a coded model, for every admissible
//! `delta <= epsilon / 4`. All packings are taken from one sampled cloud
//! deep enough for the smallest `delta`; each point inherits its component
//! from its word prefix.

use rayon::prelude::*;

use crate::dimension::fit_box_dimension;
use crate::error::{check_budget, check_positive, invalid, Error, Result};
use crate::geometry::{epsilon_components, greedy_packing, greedy_packing_subset, CellSet};
use crate::ifs::CylinderWord;
use crate::measure::{BernoulliMeasure, CodeMap, MeasurableSet, Pushforward, SetFunction};
use crate::model::{Cloud, CodedModel};

/// Steps of the `M_hat` trajectory inspected by the stability statistic.
pub const STABILITY_WINDOW: usize = 3;

/// Log-growth of `M_hat` over the window below which a report is stable.
pub const STABLE_GROWTH: f64 = 0.1;

/// Histogram bin width of the coarse spectrum.
pub const SPECTRUM_BIN_WIDTH: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct RatioRow {
    pub component_id: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub packing_count: usize,
    pub measure: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioReport {
    pub beta: f64,
    pub rows: Vec<RatioRow>,
    /// `max(ratio_max, 1 / ratio_min)` over all rows.
    pub m_hat: f64,
    /// `M_hat` restricted to the rows of each epsilon.
    pub per_epsilon: Vec<(f64, f64)>,
    /// `M_hat` over rows with `delta >= d`, for each scheduled `d` in
    /// decreasing order.
    pub trajectory: Vec<(f64, f64)>,
    /// `ln M_hat` growth across the last [`STABILITY_WINDOW`] trajectory
    /// steps, when the trajectory is long enough.
    pub stability: Option<f64>,
    pub divergent: bool,
    /// Rank of the sampled cloud.
    pub depth: usize,
}

fn spread(rows: &[RatioRow]) -> f64 {
    let max = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let min = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    max.max(1.0 / min)
}

/// Stability statistic and divergence flag of an `M_hat` trajectory.
///
/// The trajectory is non-decreasing by construction. It is stable when its
/// log-growth over the last window stays below [`STABLE_GROWTH`], and
/// divergent when it grew strictly at every step of the window and by at
/// least that much in total.
pub fn assess_trajectory(trajectory: &[f64]) -> (Option<f64>, bool) {
    let n = trajectory.len();
    if n <= STABILITY_WINDOW {
        return (None, false);
    }
    let logs: Vec<f64> = trajectory[n - STABILITY_WINDOW - 1..]
        .iter()
        .map(|m| m.ln())
        .collect();
    let growth = logs[STABILITY_WINDOW] - logs[0];
    let rising = logs.windows(2).all(|w| w[1] > w[0]);
    (Some(growth), rising && growth >= STABLE_GROWTH)
}

impl RatioReport {
    fn from_rows(beta: f64, rows: Vec<RatioRow>, epsilons: &[f64], depth: usize) -> Self {
        let per_epsilon = epsilons
            .iter()
            .filter_map(|&e| {
                let sub: Vec<RatioRow> = rows.iter().filter(|r| r.epsilon == e).cloned().collect();
                (!sub.is_empty()).then(|| (e, spread(&sub)))
            })
            .collect();
        let mut deltas: Vec<f64> = rows.iter().map(|r| r.delta).collect();
        deltas.sort_by(|a, b| b.total_cmp(a));
        deltas.dedup();
        let trajectory: Vec<(f64, f64)> = deltas
            .iter()
            .map(|&d| {
                let sub: Vec<RatioRow> = rows.iter().filter(|r| r.delta >= d).cloned().collect();
                (d, spread(&sub))
            })
            .collect();
        let values: Vec<f64> = trajectory.iter().map(|t| t.1).collect();
        let (stability, divergent) = assess_trajectory(&values);
        RatioReport {
            beta,
            m_hat: spread(&rows),
            rows,
            per_epsilon,
            trajectory,
            stability,
            divergent,
            depth,
        }
    }

    /// True when the stability statistic is below [`STABLE_GROWTH`].
    pub fn is_stable(&self) -> bool {
        self.stability.is_some_and(|g| g < STABLE_GROWTH)
    }
}

/// Rank of the cloud needed to resolve every scheduled delta.
fn cloud_depth(model: &dyn CodedModel, deltas: &[f64]) -> Result<usize> {
    let mut depth = 0;
    for &d in deltas {
        depth = depth.max(model.packing_depth(d)?);
    }
    Ok(depth)
}

fn check_schedule(op: &'static str, epsilons: &[f64], deltas: &[f64]) -> Result<()> {
    if epsilons.is_empty() {
        return Err(Error::Empty { op, param: "epsilons" });
    }
    if deltas.is_empty() {
        return Err(Error::Empty { op, param: "delta_schedule" });
    }
    for &e in epsilons {
        check_positive(op, "epsilon", e)?;
    }
    for &d in deltas {
        check_positive(op, "delta", d)?;
    }
    Ok(())
}

/// One group of sets packed at a common set of deltas.
struct Group {
    epsilon: f64,
    deltas: Vec<f64>,
    /// Sampled points of each set, in index order.
    members: Vec<Vec<usize>>,
    measures: Vec<f64>,
}

fn rows_for_groups(cloud: &Cloud, beta: f64, groups: &[Group]) -> Result<Vec<RatioRow>> {
    let tasks: Vec<(usize, f64)> = groups
        .iter()
        .enumerate()
        .flat_map(|(g, group)| group.deltas.iter().map(move |&d| (g, d)))
        .collect();
    let points = cloud.points();
    let chunks: Vec<Result<Vec<RatioRow>>> = tasks
        .par_iter()
        .map(|&(g, delta)| {
            let group = &groups[g];
            group
                .members
                .iter()
                .zip(&group.measures)
                .enumerate()
                .map(|(id, (members, &measure))| {
                    let count = greedy_packing_subset(points, members, delta)?.count;
                    Ok(RatioRow {
                        component_id: id,
                        epsilon: group.epsilon,
                        delta,
                        packing_count: count,
                        measure,
                        ratio: count as f64 * delta.powf(beta) / measure,
                    })
                })
                .collect()
        })
        .collect();
    let mut rows = Vec::new();
    for chunk in chunks {
        rows.extend(chunk?);
    }
    Ok(rows)
}

/// Sampled points grouped by their rank-`rank` prefix class.
fn members_by_class(cloud_len: usize, alphabet: usize, depth: usize, rank: usize, class_of: &[usize], classes: usize) -> Vec<Vec<usize>> {
    let stride = alphabet.pow((depth - rank) as u32);
    let mut members = vec![Vec::new(); classes];
    for i in 0..cloud_len {
        members[class_of[i / stride]].push(i);
    }
    members
}

/// Ratios `N_delta(R) delta^beta / mu(R)` over all epsilon-components `R`
/// and admissible deltas.
pub fn minkowski_ratio_report(
    model: &dyn CodedModel,
    mu: &dyn SetFunction,
    beta: f64,
    epsilons: &[f64],
    deltas: &[f64],
    budget: u64,
) -> Result<RatioReport> {
    const OP: &str = "minkowski_ratio_report";
    check_schedule(OP, epsilons, deltas)?;
    let admissible: Vec<(f64, Vec<f64>)> = epsilons
        .iter()
        .map(|&e| (e, deltas.iter().copied().filter(|&d| d <= e / 4.0).collect::<Vec<_>>()))
        .filter(|(_, ds)| !ds.is_empty())
        .collect();
    if admissible.is_empty() {
        return Err(invalid(OP, "delta_schedule", "no delta satisfies delta <= epsilon/4"));
    }
    let used: Vec<f64> = admissible.iter().flat_map(|(_, ds)| ds.iter().copied()).collect();
    let mut depth = cloud_depth(model, &used)?;
    let mut ranks = Vec::new();
    for (e, _) in &admissible {
        let k = model.depth_for(*e)?;
        depth = depth.max(k);
        ranks.push(k);
    }
    check_budget(OP, model.alphabet_len(), depth, budget)?;
    let cloud = model.sample(depth, budget)?;
    let mut groups = Vec::new();
    for ((epsilon, ds), rank) in admissible.into_iter().zip(ranks) {
        let partition = epsilon_components(model, epsilon, rank, budget)?;
        let members = members_by_class(
            cloud.len(),
            model.alphabet_len(),
            depth,
            rank,
            &partition.class_of,
            partition.len(),
        );
        let measures = partition
            .classes
            .iter()
            .enumerate()
            .map(|(id, set)| match mu.measure(set)? {
                m if m > 0.0 => Ok(m),
                _ => Err(Error::ZeroMeasure { op: OP, set: id }),
            })
            .collect::<Result<Vec<_>>>()?;
        groups.push(Group {
            epsilon,
            deltas: ds,
            members,
            measures,
        });
    }
    let rows = rows_for_groups(&cloud, beta, &groups)?;
    Ok(RatioReport::from_rows(beta, rows, epsilons, depth))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankReport {
    pub rank: usize,
    /// Largest cell diameter at this rank.
    pub size: f64,
    pub m_hat: f64,
    pub rows: Vec<RatioRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionReport {
    pub ranks: Vec<RankReport>,
    pub m_hat_max: f64,
}

/// The ratio computation with components replaced by the rank-k cylinder
/// partitions. At rank `k` only deltas below the smallest cell scale are
/// used. Rows store that cell scale in their `epsilon` field.
pub fn partition_criterion_check(
    model: &dyn CodedModel,
    mu: &dyn SetFunction,
    beta: f64,
    ranks: &[usize],
    deltas: &[f64],
    budget: u64,
) -> Result<PartitionReport> {
    const OP: &str = "partition_criterion_check";
    if ranks.is_empty() {
        return Err(Error::Empty { op: OP, param: "ranks" });
    }
    if deltas.is_empty() {
        return Err(Error::Empty { op: OP, param: "delta_schedule" });
    }
    let mut sorted = ranks.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let sizes: Vec<f64> = sorted.iter().map(|&k| model.max_cell_diameter(k)).collect();
    if sizes.windows(2).any(|w| w[1] >= w[0]) {
        return Err(invalid(OP, "ranks", "partition sizes do not decrease with rank"));
    }
    let mut groups = Vec::new();
    for &k in &sorted {
        let floor = model.cell_scale_floor(k);
        let ds: Vec<f64> = deltas.iter().copied().filter(|&d| d <= floor).collect();
        if ds.is_empty() {
            return Err(invalid(OP, "delta_schedule", format!("no delta below the rank-{k} cell scale {floor}")));
        }
        groups.push((k, floor, ds));
    }
    let used: Vec<f64> = groups.iter().flat_map(|g| g.2.iter().copied()).collect();
    let depth = cloud_depth(model, &used)?.max(*sorted.last().unwrap_or(&0));
    check_budget(OP, model.alphabet_len(), depth, budget)?;
    let cloud = model.sample(depth, budget)?;
    let alphabet = model.alphabet_len();
    let mut out = Vec::new();
    for ((k, floor, ds), size) in groups.into_iter().zip(sizes) {
        let cells = check_budget(OP, alphabet, k, budget)?;
        let class_of: Vec<usize> = (0..cells).collect();
        let members = members_by_class(cloud.len(), alphabet, depth, k, &class_of, cells);
        let measures = (0..cells)
            .map(|i| {
                let set = MeasurableSet::cylinder(CylinderWord::from_index(i, alphabet, k));
                match mu.measure(&set)? {
                    m if m > 0.0 => Ok(m),
                    _ => Err(Error::ZeroMeasure { op: OP, set: i }),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let group = Group {
            epsilon: floor,
            deltas: ds,
            members,
            measures,
        };
        let rows = rows_for_groups(&cloud, beta, std::slice::from_ref(&group))?;
        out.push(RankReport {
            rank: k,
            size,
            m_hat: spread(&rows),
            rows,
        });
    }
    let m_hat_max = out.iter().map(|r| r.m_hat).fold(1.0, f64::max);
    Ok(PartitionReport {
        ranks: out,
        m_hat_max,
    })
}

/// A map between coded models that preserves the coding up to a word
/// bijection.
#[derive(Debug, Clone)]
pub enum TransportMap {
    Identity,
    /// Coordinatewise scaling of a Euclidean model; words are unchanged.
    Scaling(Vec<f64>),
    /// A word bijection between symbolic models.
    Code(CodeMap),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportReport {
    pub source: RatioReport,
    pub target: RatioReport,
    pub source_slope: f64,
    pub target_slope: f64,
    pub slopes_agree: bool,
    /// Target `M_hat` divided by source `M_hat`.
    pub m_hat_factor: f64,
}

/// Allowed gap between the fitted box-dimension slopes of source and target.
pub const SLOPE_TOLERANCE: f64 = 0.05;

fn fitted_slope(model: &dyn CodedModel, deltas: &[f64], budget: u64) -> Result<f64> {
    let depth = cloud_depth(model, deltas)?;
    let cloud = model.sample(depth, budget)?;
    let samples = deltas
        .iter()
        .map(|&d| Ok((d, greedy_packing(cloud.points(), d)?.count)))
        .collect::<Result<Vec<_>>>()?;
    Ok(fit_box_dimension(&samples)?.slope)
}

/// Runs the ratio report on a source model and on its image under a
/// bi-Lipschitz map, with the pushed-forward measure and the source's beta.
#[allow(clippy::too_many_arguments)]
pub fn bilipschitz_transport_check(
    source: &dyn CodedModel,
    mu: &BernoulliMeasure,
    beta: f64,
    map: &TransportMap,
    target: &dyn CodedModel,
    epsilons: &[f64],
    deltas: &[f64],
    budget: u64,
) -> Result<TransportReport> {
    const OP: &str = "bilipschitz_transport_check";
    let symbolic = |m: &dyn CodedModel| !m.metric().is_real();
    match map {
        TransportMap::Scaling(_) if symbolic(source) || symbolic(target) => {
            return Err(Error::Unsupported {
                op: OP,
                reason: "scaling maps act on Euclidean models".into(),
            })
        }
        TransportMap::Code(_) if !symbolic(source) || !symbolic(target) => {
            return Err(Error::Unsupported {
                op: OP,
                reason: "word bijections act on symbolic models".into(),
            })
        }
        _ => {}
    }
    if source.alphabet_len() != target.alphabet_len() {
        return Err(invalid(OP, "target", "alphabet sizes differ"));
    }
    let source_report = minkowski_ratio_report(source, mu, beta, epsilons, deltas, budget)?;
    let target_report = match map {
        TransportMap::Code(code) => {
            let nu = Pushforward { map: code, mu };
            minkowski_ratio_report(target, &nu, beta, epsilons, deltas, budget)?
        }
        _ => minkowski_ratio_report(target, mu, beta, epsilons, deltas, budget)?,
    };
    let source_slope = fitted_slope(source, deltas, budget)?;
    let target_slope = fitted_slope(target, deltas, budget)?;
    Ok(TransportReport {
        m_hat_factor: target_report.m_hat / source_report.m_hat,
        source: source_report,
        target: target_report,
        slopes_agree: (source_slope - target_slope).abs() <= SLOPE_TOLERANCE,
        source_slope,
        target_slope,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumEstimate {
    pub rank: usize,
    /// Largest cell diameter at the rank.
    pub delta: f64,
    pub bin_width: f64,
    /// `(lower bin edge, count)` for every occupied bin, increasing.
    pub histogram: Vec<(f64, usize)>,
}

impl SpectrumEstimate {
    pub fn total(&self) -> usize {
        self.histogram.iter().map(|h| h.1).sum()
    }
}

/// Histogram of `ln mu(C) / ln diam(C)` over the rank-`rank` cylinders.
pub fn coarse_multifractal_spectrum(
    model: &dyn CodedModel,
    mu: &BernoulliMeasure,
    rank: usize,
    budget: u64,
) -> Result<SpectrumEstimate> {
    const OP: &str = "coarse_multifractal_spectrum";
    if rank == 0 {
        return Err(invalid(OP, "rank", "must be at least 1"));
    }
    let alphabet = model.alphabet_len();
    let count = check_budget(OP, alphabet, rank, budget)?;
    let mut bins: std::collections::BTreeMap<i64, usize> = std::collections::BTreeMap::new();
    for i in 0..count {
        let word = CylinderWord::from_index(i, alphabet, rank);
        let diam = model.cell_diameter(word.letters());
        if !(diam > 0.0 && diam < 1.0) {
            return Err(invalid(OP, "rank", format!("cell {word} has diameter {diam} outside (0, 1)")));
        }
        let alpha = mu.word_mass(word.letters()).ln() / diam.ln();
        let alpha = (alpha * 1e9).round() / 1e9;
        *bins.entry((alpha / SPECTRUM_BIN_WIDTH).floor() as i64).or_default() += 1;
    }
    Ok(SpectrumEstimate {
        rank,
        delta: model.max_cell_diameter(rank),
        bin_width: SPECTRUM_BIN_WIDTH,
        histogram: bins
            .into_iter()
            .map(|(b, c)| (b as f64 * SPECTRUM_BIN_WIDTH, c))
            .collect(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DoublingReport {
    pub depth: usize,
    pub centers: usize,
    pub max_ratio: f64,
    /// Center cell index and radius attaining the maximum.
    pub worst: (usize, f64),
}

/// Largest observed `mu(B(x, 2r)) / mu(B(x, r))`.
///
/// Balls are unions of rank-`depth` cells: a cell belongs to `B(x, r)`
/// when its distance to the cell of `x` is below `r`. Centers are the cell
/// representatives, thinned to at most `max_centers` by a fixed stride.
pub fn doubling_measure_check(
    model: &dyn CodedModel,
    mu: &BernoulliMeasure,
    scales: &[f64],
    depth: usize,
    max_centers: usize,
    budget: u64,
) -> Result<DoublingReport> {
    const OP: &str = "doubling_measure_check";
    if scales.is_empty() {
        return Err(Error::Empty { op: OP, param: "scales" });
    }
    for &r in scales {
        check_positive(OP, "scale", r)?;
    }
    if max_centers == 0 {
        return Err(invalid(OP, "max_centers", "must be positive"));
    }
    let alphabet = model.alphabet_len();
    let count = check_budget(OP, alphabet, depth, budget)?;
    let cells: CellSet = model.cells(depth, budget)?;
    let masses: Vec<f64> = (0..count)
        .map(|i| mu.word_mass(CylinderWord::from_index(i, alphabet, depth).letters()))
        .collect();
    let stride = count.div_ceil(max_centers).max(1);
    let centers: Vec<usize> = (0..count).step_by(stride).collect();
    let results: Vec<(f64, (usize, f64))> = centers
        .par_iter()
        .map(|&c| {
            let dist: Vec<f64> = (0..count).map(|j| cells.cell_distance(c, j)).collect();
            let ball = |r: f64| -> f64 {
                dist.iter().zip(&masses).filter(|(d, _)| **d < r).map(|(_, m)| m).sum()
            };
            scales
                .iter()
                .map(|&r| (ball(2.0 * r) / ball(r), (c, r)))
                .fold((0.0, (c, scales[0])), |a, b| if b.0 > a.0 { b } else { a })
        })
        .collect();
    let (max_ratio, worst) = results
        .into_iter()
        .fold((0.0, (0, scales[0])), |a, b| if b.0 > a.0 { b } else { a });
    Ok(DoublingReport {
        depth,
        centers: centers.len(),
        max_ratio,
        worst,
    })
}
