use thiserror::Error;

/// Errors raised by the certification library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("sigma must be positive and finite, got {0}")]
    InvalidSigma(f64),

    #[error("probability {0} is outside [0, 1]")]
    ProbabilityOutOfRange(f64),

    #[error("probability {0} must lie strictly inside (0, 1)")]
    ProbabilityNotInterior(f64),

    #[error("alpha must lie strictly inside (0, 1), got {0}")]
    InvalidAlpha(f64),

    #[error("at least 2 samples are required, got {0}")]
    TooFewSamples(usize),

    #[error("sample count {actual} does not match the confidence budget (m = {expected})")]
    SampleCountMismatch { expected: usize, actual: usize },

    #[error("sample list is empty")]
    EmptySamples,

    #[error("invalid score range ({a}, {b})")]
    InvalidRange { a: f64, b: f64 },

    #[error("value {value} lies outside the score range ({a}, {b})")]
    OutsideRange { value: f64, a: f64, b: f64 },

    #[error("score matrix has {len} entries, not a multiple of k = {k}")]
    RaggedMatrix { len: usize, k: usize },

    #[error("row {row} sums to {sum}, expected 1 within 1e-6")]
    RowSum { row: usize, sum: f64 },

    #[error("row {row} holds {value}, which is not a probability")]
    InvalidScore { row: usize, value: f64 },

    #[error("class index {index} out of range for {k} classes")]
    ClassIndex { index: usize, k: usize },

    #[error("the margin measure needs at least two classes")]
    MarginNeedsTwoClasses,

    #[error("number of levels must be positive")]
    NoLevels,

    #[error("levels must be sorted in non-decreasing order")]
    UnsortedLevels,

    #[error("{levels} levels but {probs} probabilities")]
    LevelLengthMismatch { levels: usize, probs: usize },

    #[error("exceedance probabilities must be non-increasing in the level")]
    NonMonotoneProbabilities,

    #[error("threshold {c} lies outside the open range ({a}, {b})")]
    InvalidThreshold { c: f64, a: f64, b: f64 },

    #[error("search parameters need 0 < tau < r_max, got tau = {tau}, r_max = {r_max}")]
    InvalidSearch { tau: f64, r_max: f64 },

    #[error("point has dimension {actual}, classifier expects {expected}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("classifier has no one-dimensional structure")]
    NotOneDimensional,

    #[error("invalid classifier: {0}")]
    InvalidClassifier(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
