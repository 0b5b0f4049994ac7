use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};

use minkowski_core::geometry::greedy_packing;
use minkowski_core::model::CodedModel;
use minkowski_core::verify::{DoublingReport, RatioReport};
use minkowski_core::{
    bilipschitz_transport_check, coarse_multifractal_spectrum, doubling_measure_check, epsilon_components,
    fit_box_dimension, minkowski_ratio_report, partition_criterion_check, solve_beta_sequence, CodeMap, Error,
    Instance, LoadedModel, PointSet, SetFunction, TransportMap,
};

use crate::{Common, Schedule};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(Error),
    Io(io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) if e.is_budget() => 3,
            CliError::Core(_) => 2,
            CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => CliError::Io(io),
            other => CliError::Io(io::Error::other(format!("{other:?}"))),
        }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn load(common: &Common) -> CliResult<LoadedModel> {
    let text = std::fs::read_to_string(&common.model)
        .map_err(|e| io::Error::new(e.kind(), format!("cannot read {}: {e}", common.model.display())))?;
    Ok(LoadedModel::from_json(&text)?)
}

fn table(common: &Common) -> CliResult<csv::Writer<Box<dyn Write>>> {
    let sink: Box<dyn Write> = match &common.out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).map_err(|e| io::Error::new(e.kind(), format!("cannot create {}: {e}", path.display())))?,
        )),
        None => Box::new(io::stdout().lock()),
    };
    Ok(csv::Writer::from_writer(sink))
}

/// `1 / r_max` for maps, `n` for symbolic spaces.
fn natural_base(model: &LoadedModel) -> Option<f64> {
    let r_max = |ratios: Vec<f64>| 1.0 / ratios.into_iter().fold(0.0, f64::max);
    match &model.instance {
        Instance::Sponge { system, .. } => Some(r_max(system.digits().iter().flat_map(|d| d.ratios()).collect())),
        Instance::Similar { system, .. } => Some(r_max(system.ratios())),
        Instance::Symbolic(s) => Some(s.n() as f64),
        Instance::Points(_) => None,
    }
}

fn deltas(model: &LoadedModel, schedule: &Schedule) -> CliResult<Vec<f64>> {
    let (lo, hi) = schedule
        .delta_range
        .ok_or_else(|| usage("--delta-range k_min..k_max is required"))?;
    let base = match schedule.delta_base {
        Some(b) => b,
        None => natural_base(model).ok_or_else(|| usage("--delta-base is required for point-list models"))?,
    };
    if !(base > 1.0 && base.is_finite()) {
        return Err(usage(format!("--delta-base must exceed 1, got {base}")));
    }
    Ok((lo..=hi).map(|k| base.powi(-k)).collect())
}

fn check_list<T>(name: &str, values: &[T]) -> CliResult {
    if values.is_empty() {
        return Err(usage(format!("--{name} must list at least one value")));
    }
    Ok(())
}

pub fn dim(common: &Common, schedule: &Schedule, fit: bool) -> CliResult {
    let model = load(common)?;
    let mut out = io::stdout().lock();
    if let Some(name) = &model.name {
        writeln!(out, "model: {name}")?;
    }
    match &model.instance {
        Instance::Sponge {
            system, permutation, ..
        } => {
            let seq = solve_beta_sequence(system)?;
            if let Some(p) = permutation {
                writeln!(out, "coordinate_order: {p:?}")?;
            }
            for (j, b) in seq.betas.iter().enumerate() {
                writeln!(out, "beta_{}: {b}", j + 1)?;
            }
            writeln!(out, "beta: {}", seq.total())?;
        }
        Instance::Points(_) => {}
        _ => writeln!(out, "beta: {}", model.beta()?)?,
    }
    if fit {
        let deltas = deltas(&model, schedule)?;
        let samples = match &model.instance {
            Instance::Points(cloud) => counts(cloud, &deltas)?,
            _ => {
                let coded = model.require_coded("dim")?;
                let depth = cloud_depth(coded, &deltas)?;
                counts(coded.sample(depth, common.depth_budget)?.points(), &deltas)?
            }
        };
        let fit = fit_box_dimension(&samples)?;
        writeln!(out, "fit_slope: {}", fit.slope)?;
        writeln!(out, "fit_intercept: {}", fit.intercept)?;
        writeln!(out, "fit_residual: {}", fit.residual)?;
    }
    Ok(())
}

fn counts(set: &dyn PointSet, deltas: &[f64]) -> CliResult<Vec<(f64, usize)>> {
    Ok(deltas
        .iter()
        .map(|&d| greedy_packing(set, d).map(|p| (d, p.count)))
        .collect::<Result<_, _>>()?)
}

fn cloud_depth(model: &dyn CodedModel, deltas: &[f64]) -> CliResult<usize> {
    let mut depth = 0;
    for &d in deltas {
        depth = depth.max(model.packing_depth(d)?);
    }
    Ok(depth)
}

pub fn pack(common: &Common, schedule: &Schedule, explicit: &[f64], depth: Option<usize>) -> CliResult {
    let model = load(common)?;
    let deltas = if explicit.is_empty() {
        deltas(&model, schedule)?
    } else {
        explicit.to_vec()
    };
    let mut rows: Vec<(f64, Option<usize>, usize)> = Vec::with_capacity(deltas.len());
    match &model.instance {
        Instance::Points(cloud) => {
            for &d in &deltas {
                rows.push((d, None, greedy_packing(cloud, d)?.count));
            }
        }
        _ => {
            let coded = model.require_coded("pack")?;
            for &d in &deltas {
                let k = match depth {
                    Some(k) => k,
                    None => coded.packing_depth(d)?,
                };
                let cloud = coded.sample(k, common.depth_budget)?;
                rows.push((d, Some(k), greedy_packing(cloud.points(), d)?.count));
            }
        }
    }
    let mut w = table(common)?;
    w.write_record(["delta", "depth", "packing_count"])?;
    for (d, k, n) in &rows {
        w.write_record([d.to_string(), k.map_or(String::new(), |k| k.to_string()), n.to_string()])?;
    }
    w.flush()?;
    drop(w);
    if common.out.is_some() {
        let mut out = io::stdout().lock();
        for (d, _, n) in &rows {
            writeln!(out, "count[delta={d}]: {n}")?;
        }
    }
    Ok(())
}

pub fn components(common: &Common, epsilons: &[f64], depth: Option<usize>) -> CliResult {
    check_list("epsilon", epsilons)?;
    let model = load(common)?;
    let coded = model.require_coded("components")?;
    let mu = model.measure()?;
    let mut parts = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let k = match depth {
            Some(k) => k,
            None => coded.depth_for(eps)?,
        };
        parts.push(epsilon_components(coded, eps, k, common.depth_budget)?);
    }
    let mut w = table(common)?;
    w.write_record(["epsilon", "depth", "component_id", "cylinders", "measure"])?;
    for part in &parts {
        for (id, class) in part.classes.iter().enumerate() {
            let words: Vec<String> = class.words().iter().map(ToString::to_string).collect();
            w.write_record([
                part.epsilon.to_string(),
                part.depth.to_string(),
                id.to_string(),
                words.join(" "),
                mu.measure(class)?.to_string(),
            ])?;
        }
    }
    w.flush()?;
    drop(w);
    let mut out = io::stdout().lock();
    for part in &parts {
        writeln!(out, "components[epsilon={}]: {}", part.epsilon, part.len())?;
    }
    Ok(())
}

fn write_ratio_rows(w: &mut csv::Writer<Box<dyn Write>>, report: &RatioReport) -> CliResult {
    for r in &report.rows {
        w.write_record([
            r.component_id.to_string(),
            r.epsilon.to_string(),
            r.delta.to_string(),
            r.packing_count.to_string(),
            r.measure.to_string(),
            r.ratio.to_string(),
        ])?;
    }
    Ok(())
}

const RATIO_HEADER: [&str; 6] = ["component_id", "epsilon", "delta", "packing_count", "measure", "ratio"];

fn write_summary(out: &mut impl Write, report: &RatioReport) -> io::Result<()> {
    writeln!(out, "beta: {}", report.beta)?;
    writeln!(out, "M_hat: {}", report.m_hat)?;
    writeln!(out, "divergent_flag: {}", report.divergent)?;
    writeln!(out, "depth: {}", report.depth)?;
    match report.stability {
        Some(g) => writeln!(out, "log_growth: {g}")?,
        None => writeln!(out, "log_growth: n/a")?,
    }
    for (eps, m) in &report.per_epsilon {
        writeln!(out, "M_hat[epsilon={eps}]: {m}")?;
    }
    let path: Vec<String> = report.trajectory.iter().map(|(d, m)| format!("{d}:{m}")).collect();
    writeln!(out, "trajectory: {}", path.join(" "))
}

pub fn verify(common: &Common, schedule: &Schedule, epsilons: &[f64]) -> CliResult {
    check_list("epsilon", epsilons)?;
    let model = load(common)?;
    let coded = model.require_coded("verify")?;
    let deltas = deltas(&model, schedule)?;
    let mu = model.measure()?;
    let report = minkowski_ratio_report(coded, &mu, model.beta()?, epsilons, &deltas, common.depth_budget)?;
    let mut w = table(common)?;
    w.write_record(RATIO_HEADER)?;
    write_ratio_rows(&mut w, &report)?;
    w.flush()?;
    drop(w);
    write_summary(&mut io::stdout().lock(), &report)?;
    Ok(())
}

pub fn criterion(common: &Common, schedule: &Schedule, ranks: &[usize]) -> CliResult {
    check_list("ranks", ranks)?;
    let model = load(common)?;
    let coded = model.require_coded("criterion")?;
    let deltas = deltas(&model, schedule)?;
    let mu = model.measure()?;
    let beta = model.beta()?;
    let report = partition_criterion_check(coded, &mu, beta, ranks, &deltas, common.depth_budget)?;
    let mut w = table(common)?;
    w.write_record(["rank", "cell_size", "component_id", "delta", "packing_count", "measure", "ratio"])?;
    for rank in &report.ranks {
        for r in &rank.rows {
            w.write_record([
                rank.rank.to_string(),
                rank.size.to_string(),
                r.component_id.to_string(),
                r.delta.to_string(),
                r.packing_count.to_string(),
                r.measure.to_string(),
                r.ratio.to_string(),
            ])?;
        }
    }
    w.flush()?;
    drop(w);
    let mut out = io::stdout().lock();
    writeln!(out, "beta: {beta}")?;
    for rank in &report.ranks {
        writeln!(out, "M_hat[rank={}]: {}", rank.rank, rank.m_hat)?;
    }
    writeln!(out, "M_hat_max: {}", report.m_hat_max)?;
    Ok(())
}

pub fn transport(
    common: &Common,
    schedule: &Schedule,
    epsilons: &[f64],
    scale: &[f64],
    permutation: &[usize],
) -> CliResult {
    check_list("epsilon", epsilons)?;
    let model = load(common)?;
    let deltas = deltas(&model, schedule)?;
    let mu = model.measure()?;
    let beta = model.beta()?;
    let budget = common.depth_budget;
    let report = match (&model.instance, scale.is_empty(), permutation.is_empty()) {
        (_, true, true) => return Err(usage("one of --scale or --permutation is required")),
        (Instance::Sponge { model: source, .. } | Instance::Similar { model: source, .. }, false, true) => {
            let target = source.scaled(scale)?;
            let map = TransportMap::Scaling(scale.to_vec());
            bilipschitz_transport_check(source, &mu, beta, &map, &target, epsilons, &deltas, budget)?
        }
        (Instance::Symbolic(system), true, false) => {
            let map = TransportMap::Code(CodeMap::permutation(permutation.to_vec())?);
            bilipschitz_transport_check(system, &mu, beta, &map, system, epsilons, &deltas, budget)?
        }
        (_, false, _) => return Err(usage("--scale applies to sponge and similar models")),
        (_, _, false) => return Err(usage("--permutation applies to symbolic models")),
    };
    let mut w = table(common)?;
    let mut header = vec!["side"];
    header.extend(RATIO_HEADER);
    w.write_record(&header)?;
    for (side, rep) in [("source", &report.source), ("target", &report.target)] {
        for r in &rep.rows {
            w.write_record([
                side.to_string(),
                r.component_id.to_string(),
                r.epsilon.to_string(),
                r.delta.to_string(),
                r.packing_count.to_string(),
                r.measure.to_string(),
                r.ratio.to_string(),
            ])?;
        }
    }
    w.flush()?;
    drop(w);
    let mut out = io::stdout().lock();
    writeln!(out, "beta: {beta}")?;
    writeln!(out, "source_M_hat: {}", report.source.m_hat)?;
    writeln!(out, "target_M_hat: {}", report.target.m_hat)?;
    writeln!(out, "M_hat_factor: {}", report.m_hat_factor)?;
    writeln!(out, "source_slope: {}", report.source_slope)?;
    writeln!(out, "target_slope: {}", report.target_slope)?;
    writeln!(out, "slopes_agree: {}", report.slopes_agree)?;
    writeln!(out, "divergent_flag: {}", report.target.divergent)?;
    Ok(())
}

pub fn spectrum(common: &Common, rank: usize) -> CliResult {
    let model = load(common)?;
    let coded = model.require_coded("spectrum")?;
    let mu = model.measure()?;
    let est = coarse_multifractal_spectrum(coded, &mu, rank, common.depth_budget)?;
    let mut w = table(common)?;
    w.write_record(["alpha_lo", "alpha_hi", "count"])?;
    for (lo, n) in &est.histogram {
        w.write_record([lo.to_string(), (lo + est.bin_width).to_string(), n.to_string()])?;
    }
    w.flush()?;
    drop(w);
    let mut out = io::stdout().lock();
    writeln!(out, "rank: {}", est.rank)?;
    writeln!(out, "cylinders: {}", est.total())?;
    writeln!(out, "occupied_bins: {}", est.histogram.len())?;
    Ok(())
}

pub fn doubling(common: &Common, schedule: &Schedule, depth: Option<usize>, centers: usize) -> CliResult {
    let model = load(common)?;
    let coded = model.require_coded("doubling")?;
    let scales = deltas(&model, schedule)?;
    let mu = model.measure()?;
    let k = match depth {
        Some(k) => k,
        None => {
            let r_min = scales.iter().copied().fold(f64::INFINITY, f64::min);
            coded.depth_for(r_min)?
        }
    };
    let report: DoublingReport = doubling_measure_check(coded, &mu, &scales, k, centers, common.depth_budget)?;
    let mut out = io::stdout().lock();
    writeln!(out, "depth: {}", report.depth)?;
    writeln!(out, "centers: {}", report.centers)?;
    writeln!(out, "max_ratio: {}", report.max_ratio)?;
    writeln!(out, "worst_center: {}", report.worst.0)?;
    writeln!(out, "worst_radius: {}", report.worst.1)?;
    Ok(())
}
