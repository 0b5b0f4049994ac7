//! JSON model files.
//!
//! ```json
//! {"type": "sponge", "d": 2,
//!  "digits": [[{"ratio": [1, 2], "offset": [0, 1]}, {"ratio": [1, 3], "offset": [0, 1]}],
//!             {"label": "b", "maps": [{"ratio": [1, 2], "offset": [1, 2], "orientation": -1},
//!                                     {"ratio": [1, 3], "offset": [2, 3]}]}]}
//! {"type": "similar", "d": 1,
//!  "maps": [{"ratio": [1, 3], "translation": [[0, 1]]}, {"ratio": 0.3333, "translation": [0.5]}]}
//! {"type": "symbolic", "n": 3, "m": 2, "flavor": "half", "digits": [[0, 0], [1, 1], [2, 0]]}
//! {"type": "points", "d": 1, "points": [[0], [1], [2]]}
//! ```
//!
//! Numbers are `[numerator, denominator]` pairs or plain reals; sponge maps
//! whose ratio and offset are both rational are validated exactly. Every
//! model also accepts `name`, `weights`, `beta` and `metric`
//! (`"euclidean"` or `"max"`).

use serde::Deserialize;

use crate::dimension::{solve_beta_sequence, solve_similarity_dimension, symbolic_beta};
use crate::error::{Error, Result};
use crate::geometry::{Metric, PointCloud};
use crate::ifs::{rational, DiagonalMap, IntervalMap, Orientation, SimilarIFS, Similitude, SpongeSystem};
use crate::measure::{bernoulli_weights, BernoulliMeasure};
use crate::model::{CodedModel, EuclideanIfs};
use crate::symbolic::{Flavor, SymbolicSystem};

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
enum Num {
    Ratio([i64; 2]),
    Real(f64),
}

impl Num {
    fn value(self) -> Result<f64> {
        match self {
            Num::Ratio([_, 0]) => Err(Error::Model("zero denominator".into())),
            Num::Ratio([p, q]) => Ok(p as f64 / q as f64),
            Num::Real(x) => Ok(x),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum OrientationSpec {
    Sign(i64),
    Name(String),
}

impl OrientationSpec {
    fn resolve(&self) -> Result<Orientation> {
        match self {
            OrientationSpec::Sign(s) => Orientation::from_sign(*s),
            OrientationSpec::Name(n) => match n.as_str() {
                "preserving" | "+" => Ok(Orientation::Preserving),
                "reversing" | "-" => Ok(Orientation::Reversing),
                other => Err(Error::Model(format!("unknown orientation `{other}`"))),
            },
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct MapSpec {
    ratio: Num,
    offset: Num,
    orientation: Option<OrientationSpec>,
}

impl MapSpec {
    fn build(&self) -> Result<IntervalMap> {
        let orientation = self
            .orientation
            .as_ref()
            .map_or(Ok(Orientation::Preserving), OrientationSpec::resolve)?;
        match (self.ratio, self.offset) {
            (Num::Ratio([p, q]), Num::Ratio([a, b])) if q != 0 && b != 0 => {
                IntervalMap::exact(rational(p, q), rational(a, b), orientation)
            }
            (r, o) => IntervalMap::new(r.value()?, o.value()?, orientation),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum DigitSpec {
    Plain(Vec<MapSpec>),
    Labeled { label: String, maps: Vec<MapSpec> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimilitudeSpec {
    ratio: Num,
    translation: Vec<Num>,
    linear: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoxSpec {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum MetricSpec {
    Euclidean,
    Max,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
enum FlavorSpec {
    Full,
    Half,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum ModelSpec {
    Sponge {
        d: usize,
        digits: Vec<DigitSpec>,
        name: Option<String>,
        weights: Option<Vec<f64>>,
        beta: Option<f64>,
        metric: Option<MetricSpec>,
    },
    Similar {
        d: usize,
        maps: Vec<SimilitudeSpec>,
        osc_open_set: Option<BoxSpec>,
        name: Option<String>,
        weights: Option<Vec<f64>>,
        beta: Option<f64>,
        metric: Option<MetricSpec>,
    },
    Symbolic {
        n: u32,
        m: u32,
        flavor: FlavorSpec,
        digits: Vec<(i64, u32)>,
        name: Option<String>,
        weights: Option<Vec<f64>>,
        beta: Option<f64>,
    },
    Points {
        d: usize,
        points: Vec<Vec<f64>>,
        name: Option<String>,
        metric: Option<MetricSpec>,
    },
}

/// The geometric content of a model file.
#[derive(Debug, Clone)]
pub enum Instance {
    Sponge {
        system: SpongeSystem,
        model: EuclideanIfs,
        /// Coordinate order applied at load time, if any.
        permutation: Option<Vec<usize>>,
    },
    Similar {
        system: SimilarIFS,
        model: EuclideanIfs,
    },
    Symbolic(SymbolicSystem),
    Points(PointCloud),
}

/// A parsed and structurally validated model file.
#[derive(Debug, Clone)]
pub struct LoadedModel {
    pub name: Option<String>,
    pub instance: Instance,
    weights: Option<Vec<f64>>,
    beta: Option<f64>,
}

fn metric_of(spec: Option<MetricSpec>) -> Metric {
    match spec {
        Some(MetricSpec::Max) => Metric::MaxNorm,
        _ => Metric::Euclidean,
    }
}

fn check_dim(d: usize, got: usize, what: &str) -> Result<()> {
    if d != got {
        return Err(Error::Model(format!("{what} has dimension {got}, expected d = {d}")));
    }
    Ok(())
}

impl LoadedModel {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ModelSpec = serde_json::from_str(text).map_err(|e| Error::Model(e.to_string()))?;
        Self::from_spec(spec)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Model(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    fn from_spec(spec: ModelSpec) -> Result<Self> {
        match spec {
            ModelSpec::Sponge {
                d,
                digits,
                name,
                weights,
                beta,
                metric,
            } => {
                let mut maps = Vec::with_capacity(digits.len());
                for (i, digit) in digits.iter().enumerate() {
                    let (label, specs) = match digit {
                        DigitSpec::Plain(specs) => (i.to_string(), specs),
                        DigitSpec::Labeled { label, maps } => (label.clone(), maps),
                    };
                    check_dim(d, specs.len(), &format!("digit {label}"))?;
                    let comps = specs.iter().map(MapSpec::build).collect::<Result<Vec<_>>>()?;
                    maps.push(DiagonalMap::new(label, comps));
                }
                let mut system = SpongeSystem::new(maps)?;
                let mut permutation = None;
                if !system.validate_coordinate_ordering() {
                    if let Some((normalized, perm)) = system.normalize_coordinates() {
                        system = normalized;
                        permutation = Some(perm);
                    }
                }
                let model = EuclideanIfs::from_sponge(&system).with_metric(metric_of(metric))?;
                Ok(LoadedModel {
                    name,
                    instance: Instance::Sponge {
                        system,
                        model,
                        permutation,
                    },
                    weights,
                    beta,
                })
            }
            ModelSpec::Similar {
                d,
                maps,
                osc_open_set,
                name,
                weights,
                beta,
                metric,
            } => {
                let mut sims = Vec::with_capacity(maps.len());
                for (i, m) in maps.iter().enumerate() {
                    check_dim(d, m.translation.len(), &format!("map {i} translation"))?;
                    let translation = m.translation.iter().map(|t| t.value()).collect::<Result<Vec<_>>>()?;
                    let mut sim = Similitude::scaling(m.ratio.value()?, translation);
                    if let Some(rows) = &m.linear {
                        if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                            return Err(Error::Model(format!("map {i}: linear part must be {d}x{d}")));
                        }
                        sim.linear = rows.concat();
                    }
                    sims.push(sim);
                }
                let system = SimilarIFS::new(sims, osc_open_set.map(|b| (b.lo, b.hi)))?;
                check_dim(d, system.dim(), "system")?;
                let model = EuclideanIfs::from_similar(&system).with_metric(metric_of(metric))?;
                Ok(LoadedModel {
                    name,
                    instance: Instance::Similar { system, model },
                    weights,
                    beta,
                })
            }
            ModelSpec::Symbolic {
                n,
                m,
                flavor,
                digits,
                name,
                weights,
                beta,
            } => {
                let flavor = match flavor {
                    FlavorSpec::Full => Flavor::Full,
                    FlavorSpec::Half => Flavor::Half,
                };
                let system = SymbolicSystem::new(n, m, digits, flavor)?;
                if flavor == Flavor::Half {
                    system.require_nonoverlapping()?;
                }
                Ok(LoadedModel {
                    name,
                    instance: Instance::Symbolic(system),
                    weights,
                    beta,
                })
            }
            ModelSpec::Points { d, points, name, metric } => {
                for p in &points {
                    check_dim(d, p.len(), "point")?;
                }
                Ok(LoadedModel {
                    name,
                    instance: Instance::Points(PointCloud::from_points(&points, metric_of(metric))?),
                    weights: None,
                    beta: None,
                })
            }
        }
    }

    /// The instance as a coded model; point lists have no coding.
    pub fn coded(&self) -> Option<&dyn CodedModel> {
        match &self.instance {
            Instance::Sponge { model, .. } | Instance::Similar { model, .. } => Some(model),
            Instance::Symbolic(s) => Some(s),
            Instance::Points(_) => None,
        }
    }

    pub fn require_coded(&self, op: &'static str) -> Result<&dyn CodedModel> {
        self.coded().ok_or(Error::Unsupported {
            op,
            reason: "point-list models have no coding".into(),
        })
    }

    /// Exponent used by reports: the file's `beta`, else the box dimension
    /// of the instance.
    pub fn beta(&self) -> Result<f64> {
        if let Some(b) = self.beta {
            return Ok(b);
        }
        match &self.instance {
            Instance::Sponge { system, .. } => Ok(solve_beta_sequence(system)?.total()),
            Instance::Similar { system, .. } => solve_similarity_dimension(&system.ratios()),
            Instance::Symbolic(s) => symbolic_beta(s.n(), s.m(), s.digits()),
            Instance::Points(_) => Err(Error::Model("point lists carry no exponent".into())),
        }
    }

    /// The file's `weights`, else the instance's natural measure: the
    /// level-exponent weights for sponges, `r_i^s` for similarity systems,
    /// uniform for symbolic spaces.
    pub fn measure(&self) -> Result<BernoulliMeasure> {
        if let Some(w) = &self.weights {
            let mu = BernoulliMeasure::new(w.clone())?;
            let alphabet = self.coded().map_or(0, |m| m.alphabet_len());
            if mu.alphabet_len() != alphabet {
                return Err(Error::Model(format!(
                    "{} weights for {alphabet} digits",
                    mu.alphabet_len()
                )));
            }
            return Ok(mu);
        }
        match &self.instance {
            Instance::Sponge { system, .. } => bernoulli_weights(system, &solve_beta_sequence(system)?),
            Instance::Similar { system, .. } => {
                let ratios = system.ratios();
                BernoulliMeasure::natural(&ratios, solve_similarity_dimension(&ratios)?)
            }
            Instance::Symbolic(s) => BernoulliMeasure::uniform(s.len()),
            Instance::Points(_) => Err(Error::Model("point lists carry no measure".into())),
        }
    }
}
