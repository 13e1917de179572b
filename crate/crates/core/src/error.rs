use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SkeinError {
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("malformed PD code: {0}")]
    MalformedPd(String),
    #[error("index {index} out of range (len {len})")]
    Index { index: usize, len: usize },
    #[error("diagram too large for state sum: {0} crossings")]
    Capacity(usize),
    #[error("singular matrix for generator {0}")]
    SingularMatrix(usize),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("slope ({p},{q}) is not coprime")]
    NotCoprime { p: i64, q: i64 },
    #[error("arity mismatch: {0}")]
    ArityMismatch(String),
    #[error("Euler characteristic mismatch: {0}")]
    EulerMismatch(String),
    #[error("edge {0} is glued to itself")]
    SelfLoopEdge(usize),
    #[error("kernel rank mismatch: expected {expected}, got {got}")]
    RankMismatch { expected: usize, got: usize },
    #[error("weight vectors belong to different tracks")]
    TrackMismatch,
    #[error("root order must be odd, got {0}")]
    EvenN(u64),
    #[error("zero scalar in central character: {0}")]
    ZeroScalar(String),
    #[error("normal form failure: {0}")]
    NormalFormFailure(String),
    #[error("element does not act as a scalar (residual {0:e})")]
    NotScalar(f64),
    #[error("zero shear weight on edge {0}")]
    ZeroWeight(usize),
    #[error("holonomy conventions disagree: {0}")]
    ConventionMismatch(String),
    #[error("unsupported curve: {0}")]
    UnsupportedCurve(String),
    #[error("no candidate within the search bound: {0}")]
    SearchExhausted(String),
    #[error("puncture invariant not scalar (residual {0:e})")]
    NonScalar(f64),
    #[error("parse error: {0}")]
    Parse(String),
}

impl SkeinError {
    /// True for errors that signal a broken construction rather than bad input.
    pub fn is_invariant_violation(&self) -> bool {
        matches!(
            self,
            SkeinError::NormalFormFailure(_)
                | SkeinError::NotScalar(_)
                | SkeinError::ConventionMismatch(_)
                | SkeinError::SearchExhausted(_)
                | SkeinError::NonScalar(_)
                | SkeinError::RankMismatch { .. }
        )
    }
}

pub type Result<T, E = SkeinError> = std::result::Result<T, E>;
