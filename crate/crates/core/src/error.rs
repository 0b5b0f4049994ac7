use thiserror::Error;

/// Errors raised by the library. Every variant names the operation that
/// failed and the parameter that was rejected.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{op}: invalid parameter `{param}`: {reason}")]
    InvalidParameter {
        op: &'static str,
        param: &'static str,
        reason: String,
    },

    #[error("{op}: `{param}` must be positive, got {value}")]
    NonPositive {
        op: &'static str,
        param: &'static str,
        value: f64,
    },

    #[error("{op}: empty input `{param}`")]
    Empty { op: &'static str, param: &'static str },

    #[error("{op}: letter {letter} is not a digit of an alphabet of size {alphabet}")]
    InvalidLetter {
        op: &'static str,
        letter: usize,
        alphabet: usize,
    },

    #[error("{op}: coordinate level {level} out of range 1..={dim}")]
    LevelOutOfRange {
        op: &'static str,
        level: usize,
        dim: usize,
    },

    #[error("coordinate ordering condition violated: digit {digit} has ratios {ratios:?}, which are not strictly decreasing")]
    CoordinateOrdering { digit: usize, ratios: Vec<f64> },

    #[error("neat projection condition violated at level {level}: projected open boxes of prefixes {first} and {second} overlap")]
    NeatProjection {
        level: usize,
        first: usize,
        second: usize,
    },

    #[error("non-overlapping condition violated: words {first:?} and {second:?} extend to distinct points at distance zero")]
    NonOverlapping {
        first: Vec<usize>,
        second: Vec<usize>,
    },

    #[error("{op}: {needed} cells exceed the budget of {budget}")]
    BudgetExceeded {
        op: &'static str,
        needed: u128,
        budget: u64,
    },

    #[error("{op}: depth {depth} too shallow for scale {scale}: cell diameter {diameter} exceeds scale/4")]
    DepthTooShallow {
        op: &'static str,
        depth: usize,
        scale: f64,
        diameter: f64,
    },

    #[error("{op}: word {outer:?} is a prefix of word {inner:?}")]
    NestedWords {
        op: &'static str,
        outer: Vec<usize>,
        inner: Vec<usize>,
    },

    #[error("{op}: set {set} has zero measure")]
    ZeroMeasure { op: &'static str, set: usize },

    #[error("{op}: map table is not a bijection: {reason}")]
    NonBijective { op: &'static str, reason: String },

    #[error("{op}: word of rank {rank} exceeds the map table rank {max}")]
    RankExceeded {
        op: &'static str,
        rank: usize,
        max: usize,
    },

    #[error("{op}: unsupported: {reason}")]
    Unsupported { op: &'static str, reason: String },

    #[error("model file: {0}")]
    Model(String),
}

impl Error {
    /// True for budget failures; the CLI maps these to a distinct exit code.
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::BudgetExceeded { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(op: &'static str, param: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        op,
        param,
        reason: reason.into(),
    }
}

pub(crate) fn check_positive(op: &'static str, param: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositive { op, param, value })
    }
}

/// Checks that `count^depth` fits in `budget`, returning the count.
pub(crate) fn check_budget(
    op: &'static str,
    alphabet: usize,
    depth: usize,
    budget: u64,
) -> Result<usize> {
    let mut needed: u128 = 1;
    for _ in 0..depth {
        needed = needed.saturating_mul(alphabet as u128);
        if needed > budget as u128 {
            return Err(Error::BudgetExceeded {
                op,
                needed,
                budget,
            });
        }
    }
    Ok(needed as usize)
}
