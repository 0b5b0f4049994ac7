//! Minkowski measures on self-similar sets, self-affine sponges and
//! symbolic spaces.
//!
//! The crate computes the quantities involved in deciding whether a
//! measure `mu` on a compact set `X` of box dimension `beta` satisfies
//! `M^-1 mu(R) <= N_delta(R) delta^beta <= M mu(R)` for every
//! epsilon-component `R` and all small `delta`:
//!
//! - [`ifs`]: diagonal sponges, similarity systems and their validity
//!   conditions;
//! - [`dimension`]: Moran-equation solvers and box-dimension fits;
//! - [`measure`]: Bernoulli measures, cylinder sets and pushforwards;
//! - [`geometry`]: packing numbers, epsilon-components, Hausdorff distance
//!   and Minkowski content estimates;
//! - [`symbolic`]: full- and half-symbolic spaces;
//! - [`model`]: the coded-model interface shared by all of the above;
//! - [`verify`]: ratio reports and related empirical checks;
//! - [`modelfile`]: JSON model files.

pub mod dimension;
pub mod error;
pub mod geometry;
pub mod ifs;
pub mod measure;
pub mod model;
pub mod modelfile;
pub mod symbolic;
pub mod verify;

pub use dimension::{
    box_dimension_sponge, fit_box_dimension, moran_sum, solve_beta_sequence, solve_similarity_dimension,
    symbolic_beta, BetaSequence, DimensionFit,
};
pub use error::{Error, Result};
pub use geometry::{
    epsilon_components, greedy_packing, greedy_packing_subset, hausdorff_distance, minkowski_content_estimate,
    ComponentPartition, Metric, PackingResult, PointCloud, PointSet,
};
pub use ifs::{CylinderWord, DiagonalMap, IntervalMap, Orientation, Pillar, SimilarIFS, Similitude, SpongeSystem};
pub use measure::{
    bernoulli_weights, equivalence_test, projected_measure, pushforward_measure, BernoulliMeasure, CodeMap,
    MeasurableSet, SetFunction,
};
pub use model::{sample_attractor, Cloud, CodedModel, EuclideanIfs};
pub use modelfile::{Instance, LoadedModel};
pub use symbolic::{
    check_nonoverlapping, enumerate_cylinders, metric_full, metric_half, symbolic_point_cloud, Flavor,
    SymbolicCloud, SymbolicPoint, SymbolicSystem,
};
pub use verify::{
    bilipschitz_transport_check, coarse_multifractal_spectrum, doubling_measure_check, minkowski_ratio_report,
    partition_criterion_check, RatioReport, RatioRow, SpectrumEstimate, TransportMap, TransportReport,
};
